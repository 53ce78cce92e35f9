"""
Block assembly: genesis, transaction selection, unsealed blocks and sealing.

Miners, tamper tooling and tests all build blocks through these helpers so
that every commitment in a header is computed the same way.
"""

from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from src.core.config import ConsensusParams
from src.core.encoding import block_hash, uncle_list_hash
from src.core.merkle import EMPTY_ROOT, receipts_root, transactions_root
from src.models.data_models import ZERO_HASH, Block, Header, Transaction
from src.models.input_models import ComputeBudget
from src.services.pow import SealResult, calc_difficulty, mine, seed_for_height
from src.services.state import TransitionResult, WorldState, apply_transactions, expected_seq, payload_key


def make_genesis(params: ConsensusParams) -> Block:
    """The unsealed genesis block every node of a network starts from."""
    header = Header(
        parent_hash=ZERO_HASH,
        uncle_root=uncle_list_hash([]),
        state_root=WorldState().root,
        tx_root=EMPTY_ROOT,
        receipt_root=EMPTY_ROOT,
        bloom=0,
        difficulty=params.genesis_difficulty,
        height=0,
        gas_limit=params.block_gas_limit,
        gas_used=0,
        timestamp=params.genesis_timestamp,
    )
    return Block(header=header)


def select_transactions(
    pool: Iterable[Transaction], state: WorldState, params: ConsensusParams
) -> List[Transaction]:
    """
    Pick pool transactions that will succeed on top of ``state``.

    Transactions are taken in pool order, a sender's next one becoming
    eligible once its predecessor is picked, up to the block gas limit.
    """
    pending = list(pool)
    capacity = params.block_gas_limit // params.fixed_tx_gas
    next_seq: Dict[str, int] = {}
    written: Set[bytes] = set()
    chosen: List[Transaction] = []

    progress = True
    while progress and len(chosen) < capacity:
        progress = False
        remaining: List[Transaction] = []
        for tx in pending:
            if len(chosen) >= capacity:
                break
            if tx.sender not in next_seq:
                next_seq[tx.sender] = expected_seq(state, tx.sender)
            key = payload_key(tx)
            if tx.seq < next_seq[tx.sender] or key is None or tx.gas < params.fixed_tx_gas:
                continue
            if tx.seq > next_seq[tx.sender]:
                remaining.append(tx)
                continue
            if key in state or key in written:
                continue
            chosen.append(tx)
            written.add(key)
            next_seq[tx.sender] += 1
            progress = True
        pending = remaining
    return chosen


def build_block(
    parent: Header,
    parent_state: WorldState,
    transactions: Sequence[Transaction],
    timestamp: int,
    params: ConsensusParams,
    uncles: Sequence[Header] = (),
    overrides: Optional[Dict[str, object]] = None,
) -> Tuple[Block, TransitionResult]:
    """
    Execute transactions and assemble an unsealed child of ``parent``.

    Args:
        parent: Parent header
        parent_state: Post-state of the parent
        transactions: Body, in order
        timestamp: Child timestamp (must be after the parent's)
        params: Consensus constants
        uncles: Uncle headers to include
        overrides: Header fields to force after the commitments are computed

    Returns:
        (unsealed block, transition result)
    """
    result = apply_transactions(parent_state, transactions, params.block_gas_limit, params.fixed_tx_gas)
    header = Header(
        parent_hash=block_hash(parent),
        uncle_root=uncle_list_hash(uncles),
        state_root=result.state.root,
        tx_root=transactions_root(transactions),
        receipt_root=receipts_root(result.receipts),
        bloom=result.bloom,
        difficulty=calc_difficulty(parent, timestamp, params),
        height=parent.height + 1,
        gas_limit=parent.gas_limit,
        gas_used=result.gas_used,
        timestamp=timestamp,
    )
    if overrides:
        header = header.model_copy(update=overrides)
    return Block(header=header, transactions=tuple(transactions), uncles=tuple(uncles)), result


def seal_block(
    block: Block, params: ConsensusParams, budget: ComputeBudget, rng_seed: int
) -> Tuple[Block, SealResult]:
    """Mine a seal for the block; on exhaustion the block carries the last trial."""
    seal = mine(block.header, seed_for_height(block.header.height, params), budget, rng_seed)
    return block.model_copy(update={"header": seal.apply(block.header)}), seal
