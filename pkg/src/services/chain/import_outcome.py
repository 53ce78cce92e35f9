"""
Result type of importing a block or header.
"""

from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict

from src.models.exceptions import ValidationError


class ImportKind(str, Enum):
    EXTENDED_CANONICAL = "ExtendedCanonical"
    SIDE_CHAIN = "SideChain"
    REORGANIZED = "Reorganized"
    REJECTED = "Rejected"


class ImportOutcome(BaseModel):
    """What an import did to the store; reverted and applied are oldest-first"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: ImportKind
    block_hash: bytes
    old_head: Optional[bytes] = None
    new_head: Optional[bytes] = None
    reverted: Tuple[bytes, ...] = ()
    applied: Tuple[bytes, ...] = ()
    error: Optional[ValidationError] = None

    @classmethod
    def rejected(cls, block_hash: bytes, error: ValidationError) -> "ImportOutcome":
        return cls(kind=ImportKind.REJECTED, block_hash=block_hash, error=error)

    @property
    def accepted(self) -> bool:
        return self.kind != ImportKind.REJECTED

    @property
    def head_changed(self) -> bool:
        return self.kind in (ImportKind.EXTENDED_CANONICAL, ImportKind.REORGANIZED)

    @property
    def label(self) -> str:
        if self.error is not None:
            return self.error.label
        return self.kind.value
