"""
State transition for the sensor contract.

Each transaction is charged a fixed amount of gas. A transaction whose
sequence number does not continue its sender's, whose payload cannot be
decoded, or which would overwrite an existing record gets a failure receipt
and leaves the state untouched. Successful sensor records land under
``rec:`` keys, tamper logs under ``log:`` keys.
"""

from typing import Dict, List, NamedTuple, Optional, Sequence

from src.core.encoding import (
    LOG_KEY_PREFIX,
    bloom_bits_for,
    bloom_or,
    decode_payload,
    decode_sensor_record,
    decode_tamper_log,
    decode_u64,
    encode_u64,
    log_key,
    record_key,
    seq_key,
    tx_hash,
)
from src.models.data_models import Receipt, SensorRecord, TamperLog, Transaction
from src.models.exceptions import EncodingError, GasLimitExceededError

from .world_state import WorldState

DEFAULT_TX_GAS = 21000


class TransitionResult(NamedTuple):
    state: WorldState
    receipts: List[Receipt]
    gas_used: int
    bloom: int


def expected_seq(state: WorldState, sender: str) -> int:
    """Next sequence number the state accepts from a sender"""
    raw = state.get(seq_key(sender))
    return 0 if raw is None else decode_u64(raw)


def payload_key(tx: Transaction) -> Optional[bytes]:
    try:
        decoded = decode_payload(tx.payload)
    except EncodingError:
        return None
    if isinstance(decoded, SensorRecord):
        return record_key(decoded.device_id, decoded.seq)
    return log_key(tx.payload)


def apply_transactions(
    parent_state: WorldState,
    txs: Sequence[Transaction],
    gas_limit: int,
    fixed_tx_gas: int = DEFAULT_TX_GAS,
) -> TransitionResult:
    """
    Execute transactions in order on top of a parent state.

    Args:
        parent_state: State before the block; never modified
        txs: Block transactions, in block order
        gas_limit: Block gas limit
        fixed_tx_gas: Gas charged per transaction

    Returns:
        TransitionResult with the new state, one receipt per transaction,
        total gas and the OR of receipt blooms

    Raises:
        GasLimitExceededError: If the cumulative gas would pass gas_limit
    """
    required = fixed_tx_gas * len(txs)
    if required > gas_limit:
        raise GasLimitExceededError(gas_limit, required)

    updates: Dict[bytes, bytes] = {}
    receipts: List[Receipt] = []

    def current(key: bytes) -> Optional[bytes]:
        return updates[key] if key in updates else parent_state.get(key)

    for tx in txs:
        raw_seq = current(seq_key(tx.sender))
        next_seq = 0 if raw_seq is None else decode_u64(raw_seq)
        key = payload_key(tx)

        ok = tx.seq == next_seq and tx.gas >= fixed_tx_gas and key is not None and current(key) is None
        if ok:
            assert key is not None
            updates[key] = tx.payload
            updates[seq_key(tx.sender)] = encode_u64(next_seq + 1)
            bloom = bloom_bits_for(tx.contract, key)
        else:
            bloom = 0
        receipts.append(Receipt(tx_hash=tx_hash(tx), status=ok, gas_used=fixed_tx_gas, bloom_bits=bloom))

    return TransitionResult(
        state=parent_state.with_updates(updates),
        receipts=receipts,
        gas_used=required,
        bloom=bloom_or(r.bloom_bits for r in receipts),
    )


def read_record(state: WorldState, device_id: str, seq: int) -> Optional[SensorRecord]:
    """Return the stored reading for (device_id, seq), or None if never written."""
    raw = state.get(record_key(device_id, seq))
    if raw is None:
        return None
    return decode_sensor_record(raw)


def read_tamper_logs(state: WorldState) -> List[TamperLog]:
    """All tamper logs held in the contract's log region, ordered by key."""
    return [decode_tamper_log(value) for key, value in state.items() if key.startswith(LOG_KEY_PREFIX)]


def has_tamper_log(state: WorldState, payload: bytes) -> bool:
    return log_key(payload) in state
