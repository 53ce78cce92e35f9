"""
Storage-level tampering of one node's chain database.

An edit rewrites a sensor record inside a stored block, recomputes as many
commitments as the reseal mode allows and writes the result into the
target store only. Except in reseal mode ``none`` the forged block gets a
new hash and is written beside the original, with the canonical index and
head pointer moved onto it.
"""

from typing import List, Optional, Tuple

import structlog
from pydantic import BaseModel, ConfigDict

from src.core.encoding import block_hash, decode_payload, encode_sensor_record, seal_hash
from src.core.merkle import receipts_root, transactions_root
from src.models.data_models import MAX_UINT64, Block, Header, SensorRecord, Transaction
from src.models.exceptions import EncodingError, GasLimitExceededError, TamperPreconditionError, TamperTargetMissingError
from src.models.input_models import ComputeBudget, ResealMode, TamperSpec
from src.services.chain import ChainStore
from src.services.pow import SealStatus, difficulty_target, mine, mix, seed_for_height
from src.services.state import TransitionResult, WorldState, apply_transactions

logger = structlog.get_logger(__name__)


class TamperReceipt(BaseModel):
    """What an injection changed on the target node"""

    model_config = ConfigDict(frozen=True)

    node_id: str
    original_hash: bytes
    forged_hash: bytes
    height: int
    field: str
    old_value: int
    new_value: int
    reseal: ResealMode
    seal_status: Optional[SealStatus] = None
    attempts: int = 0
    rebuilt: int = 0
    claimed_td: int

    def summary(self) -> dict:
        return {
            "node": self.node_id,
            "original": self.original_hash.hex(),
            "forged": self.forged_hash.hex(),
            "height": self.height,
            "field": self.field,
            "old": self.old_value,
            "new": self.new_value,
            "reseal": self.reseal.value,
            "seal_status": self.seal_status.value if self.seal_status else None,
            "attempts": self.attempts,
            "rebuilt": self.rebuilt,
            "claimed_td": self.claimed_td,
        }


def find_record_tx(block: Block, device_id: str, seq: int) -> Optional[int]:
    """Index of the transaction carrying a device reading, or None"""
    for index, tx in enumerate(block.transactions):
        try:
            decoded = decode_payload(tx.payload)
        except EncodingError:
            continue
        if isinstance(decoded, SensorRecord) and decoded.device_id == device_id and decoded.seq == seq:
            return index
    return None


def _resolve_target(store: ChainStore, spec: TamperSpec) -> bytes:
    device_id, seq = spec.edit.record
    target = spec.target_block
    if target is None:
        for block in store.canonical_blocks():
            if find_record_tx(block, device_id, seq) is not None:
                return block_hash(block.header)
        raise TamperTargetMissingError(spec.target_node, spec.edit.path)
    if target == "head":
        return store.head
    if isinstance(target, int):
        found = store.canonical_hash(target)
        if found is None:
            raise TamperTargetMissingError(spec.target_node, f"height {target}")
        return found
    raw = bytes.fromhex(target)
    if not store.has_block(raw):
        raise TamperTargetMissingError(spec.target_node, target)
    return raw


def fake_seal(header: Header, nonce: int, store: ChainStore) -> Header:
    """A nonce with its honestly computed mix; the nonce is bumped while it happens to meet the target."""
    seed = seed_for_height(header.height, store.params)
    sealing_hash = seal_hash(header)
    target = difficulty_target(header.difficulty)
    digest = mix(sealing_hash, nonce, seed)
    while int.from_bytes(digest, "big") <= target:
        nonce = (nonce + 1) & MAX_UINT64
        digest = mix(sealing_hash, nonce, seed)
    return header.model_copy(update={"nonce": nonce, "mix_digest": digest})


class _SharedBudget:
    """Nonce trials shared by every header re-mined in one injection"""

    def __init__(self, budget: Optional[ComputeBudget]):
        self.remaining = budget.max_attempts if budget is not None else 0
        self.spent = 0

    def seal(self, header: Header, store: ChainStore, rng_seed: int) -> Tuple[Header, SealStatus]:
        if self.remaining <= 0:
            return fake_seal(header, rng_seed, store), SealStatus.EXHAUSTED
        result = mine(
            header,
            seed_for_height(header.height, store.params),
            ComputeBudget(max_attempts=self.remaining),
            rng_seed,
        )
        self.remaining -= result.attempts
        self.spent += result.attempts
        return result.apply(header), result.status


def inject(store: ChainStore, spec: TamperSpec, at_time: int = 0) -> TamperReceipt:
    """
    Apply a tamper spec to one node's store.

    Args:
        store: The target node's chain database; no other store is touched
        spec: What to edit and how to reseal it
        at_time: Simulation time of the edit (ms), for logging

    Returns:
        TamperReceipt describing the forged block

    Raises:
        TamperTargetMissingError: If the block or record does not exist
        TamperPreconditionError: If the target is genesis, its parent state is
            gone, the value is out of range or the claimed td is not positive
    """
    device_id, seq = spec.edit.record
    target_hash = _resolve_target(store, spec)
    original = store.blocks[target_hash]
    if original.header.height == 0:
        raise TamperPreconditionError(spec.target_node, "the genesis block cannot be edited")

    tx_index = find_record_tx(original, device_id, seq)
    if tx_index is None:
        raise TamperTargetMissingError(spec.target_node, spec.edit.path)
    parent_state = store.post_state(original.header.parent_hash)
    if parent_state is None:
        raise TamperPreconditionError(spec.target_node, "parent post-state is missing")

    old_tx = original.transactions[tx_index]
    old_record = decode_payload(old_tx.payload)
    assert isinstance(old_record, SensorRecord)
    try:
        new_record = SensorRecord.model_validate({**old_record.model_dump(), "temperature": spec.edit.value})
    except ValueError as e:
        raise TamperPreconditionError(spec.target_node, f"invalid forged value: {e}") from e
    transactions: List[Transaction] = list(original.transactions)
    transactions[tx_index] = old_tx.model_copy(update={"payload": encode_sensor_record(new_record)})

    if spec.reseal.mode == ResealMode.NONE:
        forged_hash, claimed, status, attempts, rebuilt = _overwrite_in_place(
            store, target_hash, original, transactions, parent_state, spec
        )
    else:
        forged_hash, claimed, status, attempts, rebuilt = _write_forged(
            store, target_hash, original, transactions, parent_state, spec
        )

    store.compromised = True
    receipt = TamperReceipt(
        node_id=spec.target_node,
        original_hash=target_hash,
        forged_hash=forged_hash,
        height=original.header.height,
        field=spec.edit.path,
        old_value=old_record.temperature,
        new_value=spec.edit.value,
        reseal=spec.reseal.mode,
        seal_status=status,
        attempts=attempts,
        rebuilt=rebuilt,
        claimed_td=claimed,
    )
    logger.warning(
        "Chain database tampered",
        node=spec.target_node,
        height=receipt.height,
        field=receipt.field,
        reseal=receipt.reseal.value,
        forged=forged_hash.hex()[:16],
        at_ms=at_time,
    )
    return receipt


def _overwrite_in_place(
    store: ChainStore,
    target_hash: bytes,
    original: Block,
    transactions: List[Transaction],
    parent_state: WorldState,
    spec: TamperSpec,
) -> Tuple[bytes, int, Optional[SealStatus], int, int]:
    """Replace the body and post-states under unchanged headers."""
    claimed = store.td[target_hash] + spec.claimed_td_delta
    _check_td(claimed, spec)

    store.blocks[target_hash] = original.model_copy(update={"transactions": tuple(transactions)})
    state = _transition(parent_state, transactions, original.header, store, spec).state
    store.post_states[target_hash] = state

    # Canonical descendants inherit the edited state.
    if store.is_canonical(target_hash):
        for height in range(original.header.height + 1, store.head_header.height + 1):
            child = store.blocks[store.canonical[height]]
            state = _transition(state, list(child.transactions), child.header, store, spec).state
            store.post_states[store.canonical[height]] = state

    if spec.claimed_td_delta:
        for h in list(store.td):
            if _descends_from(store, h, target_hash):
                store.td[h] += spec.claimed_td_delta
    return target_hash, claimed, None, 0, 0


def _write_forged(
    store: ChainStore,
    target_hash: bytes,
    original: Block,
    transactions: List[Transaction],
    parent_state: WorldState,
    spec: TamperSpec,
) -> Tuple[bytes, int, Optional[SealStatus], int, int]:
    mode = spec.reseal.mode
    budget = _SharedBudget(spec.reseal.budget)

    forged, state = _recommit(original, original.header.parent_hash, transactions, parent_state, store, spec)
    if mode == ResealMode.FAKE_NONCE:
        header, status = fake_seal(forged.header, spec.reseal.nonce, store), SealStatus.EXHAUSTED
    else:
        header, status = budget.seal(forged.header, store, spec.reseal.rng_seed)
    forged = forged.model_copy(update={"header": header})

    forged_hash = block_hash(header)
    claimed = store.td[original.header.parent_hash] + header.difficulty + spec.claimed_td_delta
    _check_td(claimed, spec)
    _write(store, forged_hash, forged, state, claimed)

    head_hash, head_td, rebuilt = forged_hash, claimed, 0
    if mode == ResealMode.REBUILD_DESCENDANTS and store.is_canonical(target_hash):
        for height in range(original.header.height + 1, store.head_header.height + 1):
            descendant = store.blocks[store.canonical[height]]
            child, state = _recommit(descendant, head_hash, list(descendant.transactions), state, store, spec)
            child_header, child_status = budget.seal(child.header, store, spec.reseal.rng_seed + height)
            if child_status != SealStatus.SEALED:
                status = child_status
            child = child.model_copy(update={"header": child_header})
            head_hash = block_hash(child_header)
            head_td += child_header.difficulty
            _write(store, head_hash, child, state, head_td)
            rebuilt += 1

    store.force_head(head_hash)
    return forged_hash, claimed, status, budget.spent, rebuilt


def _recommit(
    template: Block,
    parent_hash: bytes,
    transactions: List[Transaction],
    parent_state: WorldState,
    store: ChainStore,
    spec: TamperSpec,
) -> Tuple[Block, WorldState]:
    """Recompute a block's commitments over new transactions and a new parent, keeping its uncles."""
    result = _transition(parent_state, transactions, template.header, store, spec)
    header = template.header.model_copy(
        update={
            "parent_hash": parent_hash,
            "tx_root": transactions_root(transactions),
            "receipt_root": receipts_root(result.receipts),
            "state_root": result.state.root,
            "bloom": result.bloom,
            "gas_used": result.gas_used,
        }
    )
    return Block(header=header, transactions=tuple(transactions), uncles=template.uncles), result.state


def _transition(
    parent_state: WorldState, transactions: List[Transaction], header: Header, store: ChainStore, spec: TamperSpec
) -> TransitionResult:
    try:
        return apply_transactions(parent_state, transactions, header.gas_limit, store.params.fixed_tx_gas)
    except GasLimitExceededError as e:
        raise TamperPreconditionError(spec.target_node, str(e)) from e


def _write(store: ChainStore, h: bytes, block: Block, state: WorldState, td: int) -> None:
    store.blocks[h] = block
    store.headers[h] = block.header
    store.post_states[h] = state
    store.td[h] = td


def _check_td(claimed: int, spec: TamperSpec) -> None:
    if claimed < 1:
        raise TamperPreconditionError(spec.target_node, f"claimed total difficulty {claimed} is not positive")


def _descends_from(store: ChainStore, h: bytes, ancestor: bytes) -> bool:
    """True when ancestor is h or one of its ancestors."""
    ancestor_height = store.headers[ancestor].height
    header = store.headers[h]
    while header.height > ancestor_height:
        h = header.parent_hash
        header = store.headers[h]
    return h == ancestor
