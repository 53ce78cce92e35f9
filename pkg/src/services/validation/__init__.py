"""Block import validation."""

from .block_validator import (
    BlockStoreView,
    HeaderFault,
    UncleFault,
    validate_block,
    validate_header,
    validate_uncles,
)

__all__ = [
    "BlockStoreView",
    "HeaderFault",
    "UncleFault",
    "validate_block",
    "validate_header",
    "validate_uncles",
]
