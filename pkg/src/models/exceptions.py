"""
Custom Exceptions for the tamperproof IoT chain
"""

from enum import Enum
from typing import Optional


class TamperproofError(Exception):
    """Base exception for every error raised by this package"""


class EncodingError(TamperproofError):
    """Exception raised when bytes cannot be decoded into a chain type"""

    def __init__(self, type_name: str, detail: str):
        self.type_name = type_name
        self.detail = detail
        super().__init__(f"Cannot decode {type_name}: {detail}")


class InvalidDifficultyError(TamperproofError, ValueError):
    """Exception raised for a difficulty below 1"""

    def __init__(self, difficulty: int):
        self.difficulty = difficulty
        super().__init__(f"Difficulty must be >= 1, got {difficulty}")


class NonMonotonicTimestampError(TamperproofError, ValueError):
    """Exception raised when a child timestamp does not follow its parent"""

    def __init__(self, parent_timestamp: int, child_timestamp: int):
        self.parent_timestamp = parent_timestamp
        self.child_timestamp = child_timestamp
        super().__init__(
            f"Child timestamp {child_timestamp} is not after parent timestamp {parent_timestamp}"
        )


class GasLimitExceededError(TamperproofError):
    """Exception raised when a transaction list does not fit in the block gas limit"""

    def __init__(self, gas_limit: int, gas_required: int):
        self.gas_limit = gas_limit
        self.gas_required = gas_required
        super().__init__(f"Gas required {gas_required} exceeds block gas limit {gas_limit}")


class UnknownBlockError(TamperproofError, KeyError):
    """Exception raised when a block hash is not in the store"""

    def __init__(self, block_hash: bytes):
        self.block_hash = block_hash
        super().__init__(f"Unknown block {block_hash.hex()}")


class ValidationErrorKind(str, Enum):
    """The ten ways a block can fail import validation, in check order"""

    KNOWN_BLOCK = "KnownBlock"
    UNKNOWN_PARENT = "UnknownParent"
    MISSING_PARENT_STATE = "MissingParentState"
    INVALID_HEADER = "InvalidHeader"
    INVALID_UNCLES = "InvalidUncles"
    GAS_USED_MISMATCH = "GasUsedMismatch"
    BLOOM_MISMATCH = "BloomMismatch"
    TX_ROOT_MISMATCH = "TxRootMismatch"
    RECEIPT_ROOT_MISMATCH = "ReceiptRootMismatch"
    STATE_ROOT_MISMATCH = "StateRootMismatch"


class ValidationError(TamperproofError):
    """
    Exception raised when a block fails validation.

    Attributes:
        kind: Which validation condition failed
        reason: Sub-reason for InvalidHeader / InvalidUncles (e.g. "BadSeal")
        block_hash: Hash of the rejected block, when known
    """

    def __init__(
        self,
        kind: ValidationErrorKind,
        reason: Optional[str] = None,
        block_hash: Optional[bytes] = None,
    ):
        self.kind = kind
        self.reason = reason
        self.block_hash = block_hash
        message = kind.value if reason is None else f"{kind.value}: {reason}"
        if block_hash is not None:
            message = f"{message} (block {block_hash.hex()[:16]})"
        super().__init__(message)

    @property
    def label(self) -> str:
        """Short label used in event logs, e.g. 'InvalidHeader:BadSeal'"""
        if self.reason is None:
            return self.kind.value
        return f"{self.kind.value}:{self.reason}"


class TamperTargetMissingError(TamperproofError):
    """Exception raised when a tamper spec points at data the target store does not hold"""

    def __init__(self, node_id: str, target: str):
        self.node_id = node_id
        self.target = target
        super().__init__(f"Tamper target '{target}' not found on node '{node_id}'")


class TamperPreconditionError(TamperproofError):
    """Exception raised when a tamper request violates its preconditions"""

    def __init__(self, node_id: str, detail: str):
        self.node_id = node_id
        self.detail = detail
        super().__init__(f"Cannot tamper node '{node_id}': {detail}")


class BudgetTooSmallError(TamperproofError):
    """Exception raised when forging sealed headers exhausts the compute budget"""

    def __init__(self, node_id: str, max_attempts: int, sealed: int, required: int):
        self.node_id = node_id
        self.max_attempts = max_attempts
        self.sealed = sealed
        self.required = required
        super().__init__(
            f"Budget of {max_attempts} attempts sealed only {sealed}/{required} forged headers "
            f"for node '{node_id}'"
        )


class TransactionStrandedError(TamperproofError):
    """Exception raised when a transaction finds no suitable peer ("broadcast to null")"""

    def __init__(self, node_id: str, tx_hash: bytes):
        self.node_id = node_id
        self.tx_hash = tx_hash
        super().__init__(f"Transaction {tx_hash.hex()[:16]} from '{node_id}' stranded: no suitable peer")


class ConfigError(TamperproofError):
    """Exception raised when a scenario configuration cannot be loaded"""

    def __init__(self, source: str, detail: str):
        self.source = source
        self.detail = detail
        super().__init__(f"Invalid scenario config '{source}': {detail}")


class ScenarioAssertionError(TamperproofError):
    """Exception raised when a scenario verdict is false"""

    def __init__(self, scenario: str, failed: list):
        self.scenario = scenario
        self.failed = failed
        super().__init__(f"Scenario '{scenario}' failed {len(failed)} assertion(s): {', '.join(failed)}")
