"""
Tests for nonce search, seal verification, epoch seeds and difficulty.
"""

import pytest

from src.core.config import ConsensusParams
from src.core.encoding import seal_hash
from src.models.exceptions import InvalidDifficultyError, NonMonotonicTimestampError
from src.models.input_models import ComputeBudget
from src.services.chain import make_genesis
from src.services.pow import (
    SealStatus,
    calc_difficulty,
    difficulty_target,
    epoch_seed,
    mine,
    mix,
    seed_for_height,
    verify_pow,
)


class TestMine:
    """Nonce search"""

    @pytest.fixture
    def header(self, params):
        return make_genesis(params).header.model_copy(update={"height": 1, "timestamp": 13})

    def test_seal_verifies(self, header, params):
        seed = seed_for_height(1, params)
        result = mine(header, seed, ComputeBudget(max_attempts=100_000), rng_seed=3)
        assert result.status == SealStatus.SEALED
        assert verify_pow(result.apply(header), seed)

    def test_same_seed_same_seal(self, header, params):
        seed = seed_for_height(1, params)
        first = mine(header, seed, ComputeBudget(max_attempts=100_000), rng_seed=9)
        second = mine(header, seed, ComputeBudget(max_attempts=100_000), rng_seed=9)
        assert first == second

    def test_huge_difficulty_exhausts(self, header, params):
        hard = header.model_copy(update={"difficulty": 2**240})
        seed = seed_for_height(1, params)
        for rng_seed in range(3):
            result = mine(hard, seed, ComputeBudget(max_attempts=1000), rng_seed)
            assert result.status == SealStatus.EXHAUSTED
            assert result.attempts == 1000
            assert not verify_pow(result.apply(hard), seed)

    def test_cancellation(self, header, params):
        hard = header.model_copy(update={"difficulty": 2**240})
        result = mine(hard, seed_for_height(1, params), ComputeBudget(max_attempts=10_000), 0, cancelled=lambda: True)
        assert result.status == SealStatus.CANCELLED
        assert result.attempts < 10_000

    def test_tampered_header_fails_verification(self, header, params):
        seed = seed_for_height(1, params)
        sealed = mine(header, seed, ComputeBudget(max_attempts=100_000), 1).apply(header)
        assert not verify_pow(sealed.model_copy(update={"gas_used": 21000}), seed)

    def test_wrong_epoch_seed_fails(self, header, params):
        sealed = mine(header, epoch_seed(0), ComputeBudget(max_attempts=100_000), 1).apply(header)
        assert not verify_pow(sealed, epoch_seed(1))

    def test_mix_digest_is_mix_of_seal_hash(self, header, params):
        seed = seed_for_height(1, params)
        sealed = mine(header, seed, ComputeBudget(max_attempts=100_000), 4).apply(header)
        assert sealed.mix_digest == mix(seal_hash(sealed), sealed.nonce, seed)
        assert mix(seal_hash(sealed), sealed.nonce, epoch_seed(1)) != sealed.mix_digest
        assert mix(seal_hash(sealed), sealed.nonce ^ 1, seed) != sealed.mix_digest


class TestEpochSeeds:
    def test_seed_chain(self):
        assert epoch_seed(0).seed != epoch_seed(1).seed
        assert epoch_seed(5) == epoch_seed(5)

    def test_height_to_epoch(self):
        params = ConsensusParams(epoch_blocks=30)
        assert seed_for_height(29, params).epoch_index == 0
        assert seed_for_height(30, params).epoch_index == 1

    def test_deep_epoch(self):
        assert epoch_seed(2000).epoch_index == 2000


class TestDifficulty:
    """Difficulty adjustment and targets"""

    @pytest.fixture
    def parent(self):
        return make_genesis(ConsensusParams()).header.model_copy(update={"difficulty": 1280, "timestamp": 100})

    def test_fast_block_raises_difficulty(self, parent):
        assert calc_difficulty(parent, 105, ConsensusParams()) == 1290

    def test_slow_block_lowers_difficulty(self, parent):
        assert calc_difficulty(parent, 113, ConsensusParams()) == 1270

    def test_floor(self):
        params = ConsensusParams(min_difficulty=16, genesis_difficulty=16)
        parent = make_genesis(params).header
        assert calc_difficulty(parent, 1000, params) == 16

    def test_timestamp_must_advance(self, parent):
        with pytest.raises(NonMonotonicTimestampError):
            calc_difficulty(parent, 100, ConsensusParams())

    def test_target(self):
        assert difficulty_target(1) == 2**256 - 1
        with pytest.raises(InvalidDifficultyError):
            difficulty_target(0)
