"""
Header index with total-difficulty fork choice.

Shared by the full ChainStore and the light HeaderChain: both keep headers,
total difficulties and a canonical height index, and both switch heads by
the same rule (extend the head, or reorganize onto a strictly heavier fork).
"""

from typing import Dict, List, Optional, Tuple

import structlog

from src.core.config import ConsensusParams
from src.core.encoding import block_hash
from src.models.data_models import Header
from src.models.exceptions import UnknownBlockError, ValidationError

from .import_outcome import ImportKind, ImportOutcome


class HeaderIndex:
    """Headers, total difficulty, canonical index and head pointer"""

    def __init__(self, genesis: Header, params: ConsensusParams):
        self.params = params
        self.logger = structlog.get_logger(__name__)

        self.genesis_hash = block_hash(genesis)
        self.headers: Dict[bytes, Header] = {self.genesis_hash: genesis}
        self.td: Dict[bytes, int] = {self.genesis_hash: genesis.difficulty}
        self.canonical: Dict[int, bytes] = {0: self.genesis_hash}
        self.head: bytes = self.genesis_hash
        self.bad_blocks: Dict[bytes, ValidationError] = {}

    # Queries

    def has_header(self, h: bytes) -> bool:
        return h in self.headers

    def get_header(self, h: bytes) -> Optional[Header]:
        return self.headers.get(h)

    @property
    def head_header(self) -> Header:
        return self.headers[self.head]

    @property
    def head_td(self) -> int:
        return self.td[self.head]

    def total_difficulty(self, h: bytes) -> int:
        """
        Total difficulty of a stored block.

        Raises:
            UnknownBlockError: If the hash is not stored
        """
        try:
            return self.td[h]
        except KeyError:
            raise UnknownBlockError(h) from None

    def canonical_hash(self, height: int) -> Optional[bytes]:
        return self.canonical.get(height)

    def is_canonical(self, h: bytes) -> bool:
        header = self.headers.get(h)
        return header is not None and self.canonical.get(header.height) == h

    def status(self) -> Tuple[bytes, int, int]:
        """(head hash, head td, head height) as advertised to peers"""
        return self.head, self.head_td, self.head_header.height

    # Sync support

    def locator(self) -> List[bytes]:
        """Canonical hashes from head back to genesis at doubling distances."""
        hashes: List[bytes] = []
        height = self.head_header.height
        step = 1
        while height > 0:
            hashes.append(self.canonical[height])
            if len(hashes) >= 10:
                step *= 2
            height -= step
        hashes.append(self.genesis_hash)
        return hashes

    def headers_after(self, locator: List[bytes], limit: int) -> List[Header]:
        """Canonical headers following the first locator hash this index holds canonically."""
        start = 1
        for h in locator:
            if self.is_canonical(h):
                start = self.headers[h].height + 1
                break
        end = min(self.head_header.height, start + limit - 1)
        return [self.headers[self.canonical[height]] for height in range(start, end + 1)]

    # Fork choice

    def _record(self, h: bytes, header: Header, td: int) -> None:
        self.headers[h] = header
        self.td[h] = td

    def _choose_head(self, h: bytes) -> ImportOutcome:
        header = self.headers[h]
        old_head = self.head
        if header.parent_hash == self.head:
            self.canonical[header.height] = h
            self.head = h
            return ImportOutcome(
                kind=ImportKind.EXTENDED_CANONICAL, block_hash=h, old_head=old_head, new_head=h, applied=(h,)
            )
        if self.td[h] > self.td[self.head]:
            reverted, applied = self.reorg(h)
            return ImportOutcome(
                kind=ImportKind.REORGANIZED,
                block_hash=h,
                old_head=old_head,
                new_head=h,
                reverted=tuple(reverted),
                applied=tuple(applied),
            )
        return ImportOutcome(kind=ImportKind.SIDE_CHAIN, block_hash=h, old_head=old_head, new_head=old_head)

    def reorg(self, new_head: bytes) -> Tuple[List[bytes], List[bytes]]:
        """
        Make new_head canonical.

        Args:
            new_head: Stored block whose ancestry is fully stored

        Returns:
            (reverted, applied) block hashes, each oldest-first
        """
        branch: List[bytes] = []
        cursor = new_head
        while not self.is_canonical(cursor):
            branch.append(cursor)
            cursor = self.headers[cursor].parent_hash
        ancestor_height = self.headers[cursor].height

        old_height = self.head_header.height
        reverted = [self.canonical[height] for height in range(ancestor_height + 1, old_height + 1)]
        for height in range(ancestor_height + 1, old_height + 1):
            del self.canonical[height]

        applied = list(reversed(branch))
        for h in applied:
            self.canonical[self.headers[h].height] = h
        self.head = new_head
        self._on_reverted(reverted)

        self.logger.info(
            "Chain reorganized",
            new_head=new_head.hex()[:16],
            common_ancestor_height=ancestor_height,
            reverted=len(reverted),
            applied=len(applied),
        )
        return reverted, applied

    def reconsider(self, h: bytes) -> Optional[ImportOutcome]:
        """
        Re-run fork choice for an already stored block.

        Used when a peer announces a branch this node already stores.

        Returns:
            The reorg outcome, or None when h is unknown, canonical or not heavier
        """
        if h not in self.headers or self.is_canonical(h) or self.td[h] <= self.head_td:
            return None
        old_head = self.head
        reverted, applied = self.reorg(h)
        return ImportOutcome(
            kind=ImportKind.REORGANIZED,
            block_hash=h,
            old_head=old_head,
            new_head=h,
            reverted=tuple(reverted),
            applied=tuple(applied),
        )

    def _on_reverted(self, reverted: List[bytes]) -> None:
        """Hook for subclasses; called with blocks dropped from the canonical chain."""

    def force_head(self, h: bytes) -> None:
        """
        Point the canonical chain at h without fork choice.

        Canonical heights above h are dropped. Used by storage-level edits.
        """
        header = self.headers[h]
        for height in [k for k in self.canonical if k > header.height]:
            del self.canonical[height]
        cursor = h
        while self.canonical.get(self.headers[cursor].height) != cursor:
            self.canonical[self.headers[cursor].height] = cursor
            cursor = self.headers[cursor].parent_hash
        self.head = h
