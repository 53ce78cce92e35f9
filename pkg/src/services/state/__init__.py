"""World state and the state transition."""

from .world_state import WorldState
from .transition import (
    TransitionResult,
    apply_transactions,
    expected_seq,
    has_tamper_log,
    payload_key,
    read_record,
    read_tamper_logs,
)

__all__ = [
    "WorldState",
    "TransitionResult",
    "apply_transactions",
    "expected_seq",
    "has_tamper_log",
    "payload_key",
    "read_record",
    "read_tamper_logs",
]
