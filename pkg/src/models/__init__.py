"""
Pydantic models and exceptions for the application.

- `data_models`: chain values (Header, Block, Transaction, Receipt,
  SensorRecord, TamperLog).
- `input_models`: scenario file schemas (imported directly, they depend on
  `src.core.config`).
- `exceptions`: the TamperproofError hierarchy.
"""

from .data_models import Block, Header, Receipt, SensorRecord, TamperLog, Transaction
from .exceptions import TamperproofError, ValidationError, ValidationErrorKind

__all__ = [
    "Block",
    "Header",
    "Receipt",
    "SensorRecord",
    "TamperLog",
    "Transaction",
    "TamperproofError",
    "ValidationError",
    "ValidationErrorKind",
]
