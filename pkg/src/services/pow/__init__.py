"""Proof-of-work sealing and difficulty adjustment."""

from .sealing import (
    EpochSeed,
    SealResult,
    SealStatus,
    calc_difficulty,
    difficulty_target,
    epoch_seed,
    mine,
    mix,
    seed_for_height,
    verify_pow,
)

__all__ = [
    "EpochSeed",
    "SealResult",
    "SealStatus",
    "calc_difficulty",
    "difficulty_target",
    "epoch_seed",
    "mine",
    "mix",
    "seed_for_height",
    "verify_pow",
]
