"""
Tests for the local chain audit.
"""

import pytest

from src.models.input_models import TamperSpec
from src.services.iot import audit_local_chain
from src.services.tamper import inject


def _tamper(store, mode: str) -> None:
    reseal = {"mode": mode, "nonce": 42}
    if mode in ("honest_repow", "rebuild_descendants"):
        reseal["budget"] = {"max_attempts": 400_000}
    inject(
        store,
        TamperSpec.model_validate(
            {
                "target_node": "endpoint-1",
                "edit": {"path": "record:dev-1:0:temperature", "value": -400},
                "reseal": reseal,
            }
        ),
    )


class TestAuditLocalChain:
    @pytest.fixture
    def chain(self, store, grow, sensor_tx):
        return grow(store, 3, {0: [sensor_tx(temperature=3400)]})

    def test_honest_store_is_clean(self, store, chain):
        assert audit_local_chain(store, "endpoint-1", 1000) == []

    def test_fake_nonce_names_the_edited_record(self, store, chain):
        _tamper(store, "fake_nonce")
        logs = audit_local_chain(store, "endpoint-1", 300_000)

        assert len(logs) == 1
        log = logs[0]
        assert log.field == "state:dev-1:0:temperature"
        assert log.old_value == b"3400"
        assert log.new_value == b"-400"
        assert log.block_hash == store.canonical_hash(1)
        assert log.detecting_node == "endpoint-1"
        assert log.detected_at == 300_000

    def test_body_edit_under_original_header(self, store, chain):
        _tamper(store, "none")
        logs = audit_local_chain(store, "endpoint-1", 0)
        assert [log.field for log in logs] == ["body:tx_root"]

    @pytest.mark.parametrize("mode", ["honest_repow", "rebuild_descendants"])
    def test_resealed_edits_pass_local_audit(self, store, chain, mode):
        _tamper(store, mode)
        assert audit_local_chain(store, "endpoint-1", 0) == []

    def test_stored_state_edit(self, store, chain):
        h = store.canonical_hash(3)
        forged = store.post_states[h].with_updates({b"junk": b"\x00"})
        store.post_states[h] = forged
        logs = audit_local_chain(store, "endpoint-1", 0)
        assert len(logs) == 1
        assert logs[0].field == "state:" + b"junk".hex()
