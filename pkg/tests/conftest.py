"""
Shared fixtures: low-difficulty consensus constants and block factories.
"""

from typing import Callable, Dict, List, Optional, Sequence, Tuple

import pytest

from src.core.config import ConsensusParams
from src.core.encoding import block_hash
from src.models.data_models import Block, Header, SensorRecord, Transaction
from src.models.input_models import ComputeBudget, DeviceConfig
from src.services.chain import ChainStore, build_block, make_genesis, seal_block
from src.services.iot import make_sensor_tx
from src.services.state import TransitionResult, WorldState

SEAL_BUDGET = ComputeBudget(max_attempts=200_000)


@pytest.fixture
def params() -> ConsensusParams:
    """Difficulty 16 everywhere: below the adjustment divisor, so it never moves"""
    return ConsensusParams(min_difficulty=1, genesis_difficulty=16, target_spacing_s=13, max_headers_fetch=4)


@pytest.fixture
def genesis(params: ConsensusParams) -> Block:
    return make_genesis(params)


@pytest.fixture
def store(genesis: Block, params: ConsensusParams) -> ChainStore:
    return ChainStore(genesis, params)


@pytest.fixture
def sensor_tx() -> Callable[..., Transaction]:
    """Factory for sensor transactions of one device"""

    def make(device_id: str = "dev-1", seq: int = 0, temperature: int = 3400, reading_time: Optional[int] = None):
        device = DeviceConfig(device_id=device_id, node_id="endpoint-1", readings=[temperature])
        reading = SensorRecord(
            device_id=device_id,
            reading_time=reading_time if reading_time is not None else 10 * (seq + 1),
            temperature=temperature,
            seq=seq,
        )
        return make_sensor_tx(device, reading)

    return make


@pytest.fixture
def block_factory(params: ConsensusParams) -> Callable[..., Tuple[Block, TransitionResult]]:
    """
    Build (and by default seal) a child block.

    The timestamp defaults to parent + target spacing, which keeps the
    difficulty constant.
    """

    def make(
        parent: Header,
        parent_state: WorldState,
        transactions: Sequence[Transaction] = (),
        timestamp: Optional[int] = None,
        uncles: Sequence[Header] = (),
        overrides: Optional[Dict[str, object]] = None,
        rng_seed: int = 0,
        seal: bool = True,
    ) -> Tuple[Block, TransitionResult]:
        when = timestamp if timestamp is not None else parent.timestamp + params.target_spacing_s
        block, result = build_block(parent, parent_state, transactions, when, params, uncles, overrides)
        if seal:
            block, sealed = seal_block(block, params, SEAL_BUDGET, rng_seed)
            assert sealed.sealed
        return block, result

    return make


@pytest.fixture
def grow(block_factory) -> Callable[..., List[Block]]:
    """
    Extend a store's canonical chain through import_block.

    ``transactions`` maps a 0-based offset to that block's body.
    """

    def extend(
        target: ChainStore,
        count: int,
        transactions: Optional[Dict[int, Sequence[Transaction]]] = None,
        rng_seed: int = 0,
        parent_hash: Optional[bytes] = None,
    ) -> List[Block]:
        blocks: List[Block] = []
        cursor = parent_hash if parent_hash is not None else target.head
        for offset in range(count):
            parent = target.get_block(cursor)
            assert parent is not None
            block, _ = block_factory(
                parent.header,
                target.post_state(cursor),
                (transactions or {}).get(offset, ()),
                rng_seed=rng_seed + offset,
            )
            outcome = target.import_block(block)
            assert outcome.accepted, outcome.label
            cursor = block_hash(block.header)
            blocks.append(block)
        return blocks

    return extend
