"""
Tests for the world state and the sensor-contract transition.
"""

import pytest

from src.core.encoding import encode_tamper_log
from src.models.data_models import TamperLog, Transaction
from src.models.exceptions import GasLimitExceededError
from src.services.state import (
    WorldState,
    apply_transactions,
    expected_seq,
    has_tamper_log,
    read_record,
    read_tamper_logs,
)

GAS_LIMIT = 1_000_000


class TestWorldState:
    def test_root_ignores_write_order(self):
        a = WorldState().with_updates({b"k1": b"v1"}).with_updates({b"k2": b"v2"})
        b = WorldState().with_updates({b"k2": b"v2"}).with_updates({b"k1": b"v1"})
        assert a.root == b.root
        assert a == b

    def test_updates_leave_original_untouched(self):
        base = WorldState({b"k": b"old"})
        updated = base.with_updates({b"k": b"new"})
        assert base.get(b"k") == b"old"
        assert updated.get(b"k") == b"new"
        assert base.root != updated.root

    def test_diff_lists_changed_keys(self):
        left = WorldState({b"a": b"1", b"b": b"2"})
        right = WorldState({b"a": b"1", b"b": b"3", b"c": b"4"})
        assert left.diff(right) == {b"b": (b"2", b"3"), b"c": (None, b"4")}


class TestApplyTransactions:
    """Sensor transactions against the contract"""

    def test_record_is_stored(self, sensor_tx):
        result = apply_transactions(WorldState(), [sensor_tx(temperature=3400)], GAS_LIMIT)
        record = read_record(result.state, "dev-1", 0)
        assert record is not None and record.temperature == 3400
        assert result.receipts[0].status is True
        assert result.gas_used == 21000
        assert result.bloom != 0

    def test_parent_state_is_not_modified(self, sensor_tx):
        parent = WorldState()
        apply_transactions(parent, [sensor_tx()], GAS_LIMIT)
        assert len(parent) == 0

    def test_sequence_continues(self, sensor_tx):
        result = apply_transactions(WorldState(), [sensor_tx(seq=0), sensor_tx(seq=1, temperature=3300)], GAS_LIMIT)
        assert expected_seq(result.state, "dev-1") == 2
        assert read_record(result.state, "dev-1", 1).temperature == 3300

    def test_out_of_order_sequence_fails_without_state_change(self, sensor_tx):
        result = apply_transactions(WorldState(), [sensor_tx(seq=1)], GAS_LIMIT)
        assert result.receipts[0].status is False
        assert result.receipts[0].bloom_bits == 0
        assert result.state.root == WorldState().root
        assert result.gas_used == 21000

    def test_replayed_record_fails(self, sensor_tx):
        first = apply_transactions(WorldState(), [sensor_tx(seq=0)], GAS_LIMIT)
        again = apply_transactions(first.state, [sensor_tx(seq=0)], GAS_LIMIT)
        assert again.receipts[0].status is False

    def test_undecodable_payload_fails(self):
        tx = Transaction(sender="dev-1", contract="temperature-log", payload=b"\xff", seq=0, gas=21000)
        result = apply_transactions(WorldState(), [tx], GAS_LIMIT)
        assert result.receipts[0].status is False

    def test_gas_limit(self, sensor_tx):
        with pytest.raises(GasLimitExceededError) as exc_info:
            apply_transactions(WorldState(), [sensor_tx(seq=0), sensor_tx(seq=1)], 30000)
        assert exc_info.value.gas_required == 42000

    def test_empty_body(self):
        result = apply_transactions(WorldState(), [], GAS_LIMIT)
        assert result.gas_used == 0 and result.bloom == 0 and result.receipts == []

    def test_tamper_log_lands_in_log_region(self):
        log = TamperLog(
            detecting_node="endpoint-1",
            block_hash=b"\x01" * 32,
            field="state:dev-1:0:temperature",
            old_value=b"3400",
            new_value=b"-400",
            detected_at=5,
        )
        payload = encode_tamper_log(log)
        tx = Transaction(sender="endpoint-1", contract="tamper-log", payload=payload, seq=0, gas=21000)
        result = apply_transactions(WorldState(), [tx], GAS_LIMIT)
        assert has_tamper_log(result.state, payload)
        assert read_tamper_logs(result.state) == [log]
