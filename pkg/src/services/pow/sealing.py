"""
Seeded hash-mixing proof of work.

A seal is a (nonce, mix_digest) pair where
``mix_digest = sha256(seal_hash || nonce || epoch seed)`` and the digest,
read as a big-endian integer, is at most ``(2**256 - 1) // difficulty``.
Epoch seeds form a hash chain starting from a fixed constant, one seed per
``epoch_blocks`` heights.
"""

import struct
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field

from src.core.config import ConsensusParams
from src.core.encoding import seal_hash, sha256
from src.models.data_models import MAX_UINT64, MAX_UINT256, ZERO_HASH, Hash256, Header
from src.models.exceptions import InvalidDifficultyError, NonMonotonicTimestampError
from src.models.input_models import ComputeBudget

logger = structlog.get_logger(__name__)

GENESIS_SEED_CONSTANT = b"tamperproof-iot/epoch-seed/v1"
CANCEL_CHECK_INTERVAL = 1024


class EpochSeed(BaseModel):
    model_config = ConfigDict(frozen=True)

    epoch_index: int = Field(..., ge=0)
    seed: Hash256


class SealStatus(str, Enum):
    SEALED = "sealed"
    EXHAUSTED = "exhausted"
    CANCELLED = "cancelled"


class SealResult(BaseModel):
    """
    Outcome of a nonce search.

    On exhaustion, nonce and mix_digest hold the last trial, which does not
    meet the target; tamper tooling writes them as a fake seal.
    """

    model_config = ConfigDict(frozen=True)

    status: SealStatus
    nonce: int = Field(0, ge=0, le=MAX_UINT64)
    mix_digest: Hash256 = ZERO_HASH
    attempts: int = Field(0, ge=0)

    @property
    def sealed(self) -> bool:
        return self.status == SealStatus.SEALED

    def apply(self, h: Header) -> Header:
        return h.model_copy(update={"nonce": self.nonce, "mix_digest": self.mix_digest})


@lru_cache(maxsize=None)
def _seed_bytes(epoch_index: int) -> bytes:
    if epoch_index == 0:
        return sha256(GENESIS_SEED_CONSTANT)
    return sha256(_seed_bytes(epoch_index - 1))


def epoch_seed(epoch_index: int) -> EpochSeed:
    # iterative warm-up keeps the cached recursion shallow
    for index in range(0, epoch_index, 256):
        _seed_bytes(index)
    return EpochSeed(epoch_index=epoch_index, seed=_seed_bytes(epoch_index))


def seed_for_height(height: int, params: ConsensusParams) -> EpochSeed:
    return epoch_seed(height // params.epoch_blocks)


def difficulty_target(difficulty: int) -> int:
    """
    Largest mix value that satisfies a difficulty.

    Raises:
        InvalidDifficultyError: If difficulty < 1
    """
    if difficulty < 1:
        raise InvalidDifficultyError(difficulty)
    return MAX_UINT256 // difficulty


def mix(seal: bytes, nonce: int, seed: EpochSeed) -> bytes:
    return sha256(seal + struct.pack(">Q", nonce) + seed.seed)


def mine(
    h: Header,
    seed: EpochSeed,
    budget: ComputeBudget,
    rng_seed: int,
    cancelled: Optional[Callable[[], bool]] = None,
) -> SealResult:
    """
    Search nonces for a seal of ``h``.

    The search starts at a nonce drawn from ``rng_seed`` and counts upward
    (wrapping at 2**64), so the same seed always yields the same seal.

    Args:
        h: Header to seal; nonce and mix_digest are ignored
        seed: Epoch seed for h.height
        budget: Maximum nonce trials
        rng_seed: Seed of the starting nonce
        cancelled: Polled every CANCEL_CHECK_INTERVAL trials

    Returns:
        SealResult with status SEALED, EXHAUSTED or CANCELLED
    """
    target = difficulty_target(h.difficulty)
    sealing_hash = seal_hash(h)
    nonce = int(np.random.default_rng(rng_seed).integers(0, MAX_UINT64, dtype=np.uint64, endpoint=True))

    digest = ZERO_HASH
    for attempt in range(1, budget.max_attempts + 1):
        if cancelled is not None and attempt % CANCEL_CHECK_INTERVAL == 0 and cancelled():
            return SealResult(status=SealStatus.CANCELLED, nonce=nonce, mix_digest=digest, attempts=attempt - 1)
        digest = mix(sealing_hash, nonce, seed)
        if int.from_bytes(digest, "big") <= target:
            return SealResult(status=SealStatus.SEALED, nonce=nonce, mix_digest=digest, attempts=attempt)
        if attempt < budget.max_attempts:
            nonce = (nonce + 1) & MAX_UINT64

    logger.debug("Nonce search exhausted", height=h.height, difficulty=h.difficulty, attempts=budget.max_attempts)
    return SealResult(status=SealStatus.EXHAUSTED, nonce=nonce, mix_digest=digest, attempts=budget.max_attempts)


def verify_pow(h: Header, seed: EpochSeed) -> bool:
    digest = mix(seal_hash(h), h.nonce, seed)
    return digest == h.mix_digest and int.from_bytes(digest, "big") <= difficulty_target(h.difficulty)


def calc_difficulty(parent: Header, child_timestamp: int, params: ConsensusParams) -> int:
    """
    Difficulty of a child block.

    Moves the parent difficulty by ``parent.difficulty // divisor``: up when
    the child arrives faster than the target spacing, down otherwise, never
    below the configured floor.

    Raises:
        NonMonotonicTimestampError: If child_timestamp <= parent.timestamp
    """
    if child_timestamp <= parent.timestamp:
        raise NonMonotonicTimestampError(parent.timestamp, child_timestamp)
    step = parent.difficulty // params.difficulty_bound_divisor
    if child_timestamp - parent.timestamp < params.target_spacing_s:
        adjusted = parent.difficulty + step
    else:
        adjusted = parent.difficulty - step
    return max(adjusted, params.min_difficulty)
