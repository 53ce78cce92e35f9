"""
Header-only chain kept by light nodes.
"""

from src.core.encoding import block_hash
from src.models.data_models import Header
from src.models.exceptions import ValidationError, ValidationErrorKind
from src.services.validation import validate_header

from .header_index import HeaderIndex
from .import_outcome import ImportOutcome


class HeaderChain(HeaderIndex):
    """Light client store: headers and td, no bodies or state"""

    def import_header(self, h: Header) -> ImportOutcome:
        """
        Check a header's linkage, difficulty and seal, then apply fork choice.

        Args:
            h: Header received from a peer

        Returns:
            ImportOutcome; state-dependent checks are never run
        """
        own_hash = block_hash(h)
        cached = self.bad_blocks.get(own_hash)
        if cached is not None:
            return ImportOutcome.rejected(own_hash, cached)
        if own_hash in self.headers:
            return ImportOutcome.rejected(own_hash, ValidationError(ValidationErrorKind.KNOWN_BLOCK, block_hash=own_hash))

        parent = self.headers.get(h.parent_hash)
        if parent is None:
            return ImportOutcome.rejected(
                own_hash, ValidationError(ValidationErrorKind.UNKNOWN_PARENT, block_hash=own_hash)
            )

        fault = validate_header(h, parent, self.params)
        if fault is not None:
            error = ValidationError(ValidationErrorKind.INVALID_HEADER, reason=fault.value, block_hash=own_hash)
            self.bad_blocks[own_hash] = error
            return ImportOutcome.rejected(own_hash, error)

        self._record(own_hash, h, self.td[h.parent_hash] + h.difficulty)
        return self._choose_head(own_hash)
