"""
Local chain audit.

A node re-validates its own canonical chain block by block: hash linkage,
body commitments, the state transition, the stored post-state and the
seal. The first failing check of a block produces one TamperLog naming the
divergent field. When a block fails its seal and the store still holds a
validly sealed sibling, the two bodies are compared so the log names the
edited record instead of the seal.
"""

from typing import List, Optional, Tuple

import structlog

from src.core.encoding import RECORD_KEY_PREFIX, block_hash, decode_payload, parse_record_key, seal_hash
from src.core.merkle import receipts_root, transactions_root
from src.models.data_models import Block, SensorRecord, TamperLog
from src.models.exceptions import EncodingError, GasLimitExceededError
from src.services.chain import ChainStore
from src.services.pow import difficulty_target, mix, seed_for_height, verify_pow
from src.services.state import WorldState, apply_transactions

logger = structlog.get_logger(__name__)

Finding = Tuple[str, bytes, bytes]


def _temperature_bytes(raw: Optional[bytes]) -> bytes:
    if raw is None:
        return b"<absent>"
    try:
        decoded = decode_payload(raw)
    except EncodingError:
        return raw
    if isinstance(decoded, SensorRecord):
        return str(decoded.temperature).encode()
    return raw


def _state_finding(honest: WorldState, stored: WorldState) -> Finding:
    differences = honest.diff(stored)
    for key, (old, new) in differences.items():
        if key.startswith(RECORD_KEY_PREFIX):
            device_id, seq = parse_record_key(key)
            old_value, new_value = _temperature_bytes(old), _temperature_bytes(new)
            if old_value != new_value:
                return f"state:{device_id}:{seq}:temperature", old_value, new_value
        return f"state:{key.hex()}", old or b"<absent>", new or b"<absent>"
    return "state:root", honest.root, stored.root


def _sibling_finding(store: ChainStore, h: bytes, block: Block) -> Optional[Finding]:
    """Compare a badly sealed block with a sealed sibling holding the same transactions."""
    header = block.header
    for other_hash, other in store.blocks.items():
        if other_hash == h or other.header.parent_hash != header.parent_hash:
            continue
        if not verify_pow(other.header, seed_for_height(other.header.height, store.params)):
            continue
        originals = {(tx.sender, tx.seq): tx for tx in other.transactions}
        for tx in block.transactions:
            original = originals.get((tx.sender, tx.seq))
            if original is None or original.payload == tx.payload:
                continue
            try:
                forged_record = decode_payload(tx.payload)
                original_record = decode_payload(original.payload)
            except EncodingError:
                return f"tx:{tx.sender}:{tx.seq}:payload", original.payload, tx.payload
            if isinstance(forged_record, SensorRecord) and isinstance(original_record, SensorRecord):
                return (
                    f"state:{forged_record.device_id}:{forged_record.seq}:temperature",
                    str(original_record.temperature).encode(),
                    str(forged_record.temperature).encode(),
                )
            return f"tx:{tx.sender}:{tx.seq}:payload", original.payload, tx.payload
    return None


def _audit_block(store: ChainStore, h: bytes, block: Block, expected_parent: bytes) -> Optional[Finding]:
    header = block.header
    params = store.params

    actual_hash = block_hash(header)
    if actual_hash != h:
        return "header:hash", h, actual_hash
    if header.parent_hash != expected_parent:
        return "header:parent_hash", expected_parent, header.parent_hash

    computed_tx_root = transactions_root(block.transactions)
    if computed_tx_root != header.tx_root:
        return "body:tx_root", header.tx_root, computed_tx_root

    parent_state = store.post_state(expected_parent)
    if parent_state is None:
        return "state:parent", expected_parent, b"<absent>"
    try:
        result = apply_transactions(parent_state, block.transactions, header.gas_limit, params.fixed_tx_gas)
    except GasLimitExceededError as e:
        return "body:gas_used", str(header.gas_limit).encode(), str(e.gas_required).encode()

    computed_receipt_root = receipts_root(result.receipts)
    if computed_receipt_root != header.receipt_root:
        return "body:receipt_root", header.receipt_root, computed_receipt_root
    if result.state.root != header.state_root:
        return "body:state_root", header.state_root, result.state.root

    stored_state = store.post_state(h)
    if stored_state is None or stored_state.root != header.state_root:
        return _state_finding(result.state, stored_state if stored_state is not None else WorldState())

    seed = seed_for_height(header.height, params)
    if not verify_pow(header, seed):
        sibling = _sibling_finding(store, h, block)
        if sibling is not None:
            return sibling
        digest = mix(seal_hash(header), header.nonce, seed)
        return "header:seal", difficulty_target(header.difficulty).to_bytes(32, "big"), digest
    return None


def audit_local_chain(store: ChainStore, node_id: str, now_ms: int) -> List[TamperLog]:
    """
    Re-validate every canonical block of a node's store.

    Args:
        store: The node's chain database
        node_id: Recorded as the detecting node
        now_ms: Simulation time recorded on each log

    Returns:
        One TamperLog per failing block, ordered by height; empty when the
        store was only ever written by honest operations
    """
    logs: List[TamperLog] = []
    for height in range(1, store.head_header.height + 1):
        h = store.canonical[height]
        block = store.blocks[h]
        finding = _audit_block(store, h, block, store.canonical[height - 1])
        if finding is None:
            continue
        field, old_value, new_value = finding
        logs.append(
            TamperLog(
                detecting_node=node_id,
                block_hash=h,
                field=field,
                old_value=old_value,
                new_value=new_value,
                detected_at=now_ms,
            )
        )

    if logs:
        logger.warning("Local chain audit found tampering", node=node_id, blocks=len(logs))
    return logs
