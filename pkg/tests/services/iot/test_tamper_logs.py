"""
Tests for tamper log transactions and the upload queue.
"""

from typing import List, Tuple

import pytest

from src.core.encoding import decode_tamper_log, tx_hash
from src.models.data_models import BroadcastReport, TamperLog, Transaction
from src.models.exceptions import TransactionStrandedError
from src.services.iot import TamperLogUploader, make_tamper_log_tx, upload_tamper_log
from src.services.iot.tamper_logs import UPLOAD_HISTORY
from src.services.state import WorldState, apply_transactions, read_tamper_logs


class FakeNetwork:
    """Hands transactions to a fixed set of peers"""

    def __init__(self, recipients: Tuple[str, ...] = ("miner-1",)):
        self.recipients = recipients
        self.sent: List[Transaction] = []

    def send_transaction(self, node_id: str, tx: Transaction) -> BroadcastReport:
        self.sent.append(tx)
        return BroadcastReport(tx_hash=tx_hash(tx), recipients=self.recipients)


@pytest.fixture
def log() -> TamperLog:
    return TamperLog(
        detecting_node="endpoint-1",
        block_hash=b"\x11" * 32,
        field="state:dev-1:0:temperature",
        old_value=b"3400",
        new_value=b"-400",
        detected_at=300_000,
    )


class TestMakeTamperLogTx:
    def test_node_is_sender(self, log):
        tx = make_tamper_log_tx("endpoint-1", log, seq=3)
        assert (tx.sender, tx.seq, tx.contract) == ("endpoint-1", 3, "tamper-log")
        assert decode_tamper_log(tx.payload) == log

    def test_lands_in_log_region(self, log):
        tx = make_tamper_log_tx("endpoint-1", log, seq=0)
        state = apply_transactions(WorldState(), [tx], gas_limit=1_000_000).state
        assert read_tamper_logs(state) == [log]


class TestUploadTamperLog:
    def test_upload(self, log):
        uploader = TamperLogUploader("endpoint-1")
        network = FakeNetwork()
        tx = upload_tamper_log(uploader, log, network)

        assert network.sent == [tx]
        assert not uploader.pending
        assert len(uploader.uploaded) == 1
        assert not uploader.transactions

    def test_stranded_keeps_log_and_seq(self, log):
        uploader = TamperLogUploader("endpoint-1")
        with pytest.raises(TransactionStrandedError):
            upload_tamper_log(uploader, log, FakeNetwork(recipients=()))
        assert len(uploader.pending) == 1

        network = FakeNetwork()
        tx = upload_tamper_log(uploader, log, network)
        assert tx.seq == 0
        assert not uploader.pending

    def test_already_on_chain(self, log):
        uploader = TamperLogUploader("endpoint-1")
        on_chain = make_tamper_log_tx("miner-1", log, seq=0)
        state = apply_transactions(WorldState(), [on_chain], gas_limit=1_000_000).state
        network = FakeNetwork()

        assert upload_tamper_log(uploader, log, network, canonical_state=state) is None
        assert network.sent == []

    def test_add_skips_duplicates(self, log):
        uploader = TamperLogUploader("endpoint-1")
        assert uploader.add([log, log]) == 1
        assert uploader.add([log]) == 0

    def test_upload_history_is_bounded(self, log):
        uploader = TamperLogUploader("endpoint-1")
        network = FakeNetwork()
        for offset in range(UPLOAD_HISTORY + 5):
            upload_tamper_log(uploader, log.model_copy(update={"detected_at": log.detected_at + offset}), network)

        assert len(uploader.uploaded) == UPLOAD_HISTORY
        assert not uploader.transactions
        assert network.sent[-1].seq == UPLOAD_HISTORY + 4
