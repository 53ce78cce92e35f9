"""
Private-fork race between an attacker and the honest miners.

The honest network confirms a sensor record and keeps mining. The attacker
forks off from the record block's parent, replaces the record with a forged
one and mines in secret, publishing the fork once its total difficulty
exceeds the honest chain's. Each step one side finds a block, the attacker
with probability ``attacker_power``. Blocks are real: they are built,
sealed and imported through the same chain code as in the network
simulator, with difficulty held at the floor.
"""

from typing import List, Optional

import numpy as np
import pandas as pd
import structlog
from pydantic import BaseModel, ConfigDict

from src.core.config import ConsensusParams
from src.core.encoding import block_hash
from src.models.data_models import Block, SensorRecord, Transaction
from src.models.input_models import ComputeBudget, DeviceConfig, MajorityAttackSpec
from src.services.chain import ChainStore, build_block, make_genesis, seal_block
from src.services.iot.devices import make_sensor_tx
from src.services.state import read_record

logger = structlog.get_logger(__name__)

RACE_DEVICE = DeviceConfig(device_id="dev-1", node_id="endpoint-1", readings=[3400])
HONEST_TEMPERATURE = 3400
FORGED_TEMPERATURE = -400
SEALING_BUDGET = ComputeBudget(max_attempts=1_000_000)


class MajorityAttackResult(BaseModel):
    """Outcome of one race"""

    model_config = ConfigDict(frozen=True)

    attacker_power: float
    fork_depth: int
    seed: int
    attacker_won: bool
    final_td_gap: int
    blocks_mined: int
    published_at: Optional[int] = None


def _race_params(params: ConsensusParams) -> ConsensusParams:
    return params.model_copy(update={"genesis_difficulty": params.min_difficulty})


def _record_tx(temperature: int) -> Transaction:
    reading = SensorRecord(device_id=RACE_DEVICE.device_id, reading_time=0, temperature=temperature, seq=0)
    return make_sensor_tx(RACE_DEVICE, reading)


class _Miner:
    """One side of the race: a private store that only grows by its own blocks"""

    def __init__(self, genesis: Block, params: ConsensusParams, seed: int, side: int):
        self.store = ChainStore(genesis, params)
        self.chain: List[Block] = []
        self.seed = seed
        self.side = side

    def mine_next(self, transactions: List[Transaction]) -> Block:
        params = self.store.params
        parent = self.store.head_header
        block, result = build_block(
            parent,
            self.store.canonical_state(),
            transactions,
            parent.timestamp + params.target_spacing_s,
            params,
        )
        rng_seed = (self.seed * 1_000_003 + parent.height * 2 + self.side) & 0xFFFFFFFF
        block, _ = seal_block(block, params, SEALING_BUDGET, rng_seed)
        self.store.write_mined_block(block, result.state)
        self.chain.append(block)
        return block


def majority_attack(
    params: ConsensusParams,
    attacker_power: float,
    fork_depth: int,
    horizon_blocks: int,
    seed: int,
) -> MajorityAttackResult:
    """
    Race a tampered private fork against the honest chain.

    Args:
        params: Consensus constants; difficulty is pinned to min_difficulty
        attacker_power: Attacker share of total hash rate, in [0, 1)
        fork_depth: Honest confirmations on top of the record block before the race starts
        horizon_blocks: Blocks mined by both sides together before the race ends
        seed: Seed of the per-step coin flips and of every nonce search

    Returns:
        MajorityAttackResult; attacker_won is True when the honest node's
        canonical state holds the forged reading at the end

    Raises:
        ValueError: If attacker_power or fork_depth is out of range
    """
    if not 0.0 <= attacker_power < 1.0:
        raise ValueError(f"attacker_power {attacker_power} outside [0, 1)")
    if fork_depth < 1:
        raise ValueError(f"fork_depth must be >= 1, got {fork_depth}")

    race_params = _race_params(params)
    genesis = make_genesis(race_params)
    honest = _Miner(genesis, race_params, seed, side=0)
    attacker = _Miner(genesis, race_params, seed, side=1)

    honest.mine_next([_record_tx(HONEST_TEMPERATURE)])
    for _ in range(fork_depth):
        honest.mine_next([])

    coin = np.random.default_rng(seed)
    published_at: Optional[int] = None
    mined = 0
    while mined < horizon_blocks:
        mined += 1
        if coin.random() < attacker_power:
            attacker.mine_next([_record_tx(FORGED_TEMPERATURE)] if not attacker.chain else [])
        else:
            honest.mine_next([])

        if attacker.chain and attacker.store.head_td > honest.store.head_td:
            for block in attacker.chain:
                outcome = honest.store.import_block(block)
                if not outcome.accepted:
                    logger.error("Honest node rejected the attacker fork", error=outcome.label, seed=seed)
                    break
            published_at = mined
            break

    record = read_record(honest.store.canonical_state(), RACE_DEVICE.device_id, 0)
    won = record is not None and record.temperature == FORGED_TEMPERATURE
    gap = attacker.store.head_td - honest.store.td[block_hash(honest.chain[-1].header)]

    logger.debug(
        "Majority attack race finished",
        power=attacker_power,
        seed=seed,
        won=won,
        mined=mined,
        published_at=published_at,
    )
    return MajorityAttackResult(
        attacker_power=attacker_power,
        fork_depth=fork_depth,
        seed=seed,
        attacker_won=won,
        final_td_gap=gap,
        blocks_mined=mined,
        published_at=published_at,
    )


def majority_attack_sweep(params: ConsensusParams, spec: MajorityAttackSpec, base_seed: int) -> pd.DataFrame:
    """
    Run ``spec.seeds`` races per attacker power.

    Returns:
        One row per power with columns power, runs, wins, win_rate, mean_td_gap
    """
    rows = []
    for power in spec.powers:
        results = [
            majority_attack(params, power, spec.fork_depth, spec.horizon_blocks, base_seed + k)
            for k in range(spec.seeds)
        ]
        frame = pd.DataFrame([r.model_dump() for r in results])
        rows.append(
            {
                "power": power,
                "runs": len(frame),
                "wins": int(frame["attacker_won"].sum()),
                "win_rate": float(frame["attacker_won"].mean()),
                "mean_td_gap": float(frame["final_td_gap"].mean()),
            }
        )
        logger.info("Majority attack sweep point", power=power, win_rate=rows[-1]["win_rate"])
    return pd.DataFrame(rows, columns=["power", "runs", "wins", "win_rate", "mean_td_gap"])
