"""
On-chain tamper logging.

A detecting node signs nothing; its node id is the sender and its own
transaction counter supplies the seq. Logs already present in canonical
state (matched by content hash) are never uploaded twice.
"""

from collections import deque
from typing import Deque, Dict, List, Optional, Protocol

import structlog

from src.core.encoding import encode_tamper_log, sha256
from src.models.data_models import BroadcastReport, TamperLog, Transaction
from src.models.exceptions import TransactionStrandedError
from src.services.state import WorldState, has_tamper_log
from src.services.state.transition import DEFAULT_TX_GAS

logger = structlog.get_logger(__name__)

TAMPER_LOG_CONTRACT = "tamper-log"
UPLOAD_HISTORY = 256


class TransactionSender(Protocol):
    def send_transaction(self, node_id: str, tx: Transaction) -> BroadcastReport: ...


def make_tamper_log_tx(
    node_id: str, log: TamperLog, seq: int, contract: str = TAMPER_LOG_CONTRACT, gas: int = DEFAULT_TX_GAS
) -> Transaction:
    return Transaction(sender=node_id, contract=contract, payload=encode_tamper_log(log), seq=seq, gas=gas)


class TamperLogUploader:
    """
    Pending tamper logs of one node.

    Logs wait here from detection until they are handed to at least one peer;
    a stranded upload keeps its transaction (and seq) for the next attempt.
    Only the last UPLOAD_HISTORY uploaded digests are remembered; an older
    log detected again is caught by the on-chain check instead.
    """

    def __init__(self, node_id: str, contract: str = TAMPER_LOG_CONTRACT):
        self.node_id = node_id
        self.contract = contract
        self.pending: Dict[bytes, TamperLog] = {}
        self.transactions: Dict[bytes, Transaction] = {}
        self.uploaded: Deque[bytes] = deque(maxlen=UPLOAD_HISTORY)
        self._next_seq = 0

    def add(self, logs: List[TamperLog]) -> int:
        """Queue logs not seen before; returns how many were new."""
        added = 0
        for log in logs:
            digest = sha256(encode_tamper_log(log))
            if digest in self.pending or digest in self.uploaded:
                continue
            self.pending[digest] = log
            added += 1
        return added

    def transaction_for(self, digest: bytes) -> Transaction:
        tx = self.transactions.get(digest)
        if tx is None:
            tx = make_tamper_log_tx(self.node_id, self.pending[digest], self._next_seq, self.contract)
            self._next_seq += 1
            self.transactions[digest] = tx
        return tx

    def mark_uploaded(self, digest: bytes) -> None:
        self.pending.pop(digest, None)
        self.transactions.pop(digest, None)
        if digest not in self.uploaded:
            self.uploaded.append(digest)


def upload_tamper_log(
    uploader: TamperLogUploader,
    log: TamperLog,
    network: TransactionSender,
    canonical_state: Optional[WorldState] = None,
) -> Optional[Transaction]:
    """
    Serialize a tamper log into a transaction and broadcast it.

    Args:
        uploader: The detecting node's pending-log queue
        log: Log produced by the audit
        network: Broadcast surface (send_transaction)
        canonical_state: When given, an identical log already on chain is skipped

    Returns:
        The broadcast transaction, or None when the log was already on chain

    Raises:
        TransactionStrandedError: If no suitable peer took the transaction;
            the log stays pending
    """
    payload = encode_tamper_log(log)
    digest = sha256(payload)
    if canonical_state is not None and has_tamper_log(canonical_state, payload):
        uploader.mark_uploaded(digest)
        logger.info("Tamper log already on chain", node=uploader.node_id, log=digest.hex()[:16])
        return None

    uploader.add([log])
    tx = uploader.transaction_for(digest)
    report = network.send_transaction(uploader.node_id, tx)
    if report.stranded:
        raise TransactionStrandedError(uploader.node_id, report.tx_hash)

    uploader.mark_uploaded(digest)
    logger.info("Tamper log uploaded", node=uploader.node_id, log=digest.hex()[:16], peers=len(report.recipients))
    return tx
