"""
Per-node chain database.

ChainStore keeps full blocks and post-states next to the header index,
validates every imported block, caches bad blocks and remembers orphaned
headers as uncle candidates. Its content can be dumped to and loaded from
a single JSON document (layout in docs/chain_db.md).
"""

import json
from collections import OrderedDict
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

from src.core.config import ConsensusParams
from src.core.encoding import block_hash, decode_block, encode_block
from src.models.data_models import Block, Header
from src.models.exceptions import ValidationError, ValidationErrorKind
from src.services.state import WorldState
from src.services.validation import validate_block, validate_header

from .header_index import HeaderIndex
from .import_outcome import ImportKind, ImportOutcome

CHAIN_DB_VERSION = 1

CACHED_ERROR_KINDS = frozenset(
    {
        ValidationErrorKind.INVALID_HEADER,
        ValidationErrorKind.INVALID_UNCLES,
        ValidationErrorKind.TX_ROOT_MISMATCH,
        ValidationErrorKind.RECEIPT_ROOT_MISMATCH,
        ValidationErrorKind.STATE_ROOT_MISMATCH,
    }
)

FALSIFICATION_ERROR_KINDS = CACHED_ERROR_KINDS | {
    ValidationErrorKind.GAS_USED_MISMATCH,
    ValidationErrorKind.BLOOM_MISMATCH,
}


def parse_error_label(label: str, block_hash_: Optional[bytes] = None) -> ValidationError:
    kind, _, reason = label.partition(":")
    return ValidationError(ValidationErrorKind(kind), reason=reason or None, block_hash=block_hash_)


class ChainStore(HeaderIndex):
    """Full node database: blocks, post-states, td, canonical index, bad blocks"""

    def __init__(self, genesis: Block, params: ConsensusParams):
        super().__init__(genesis.header, params)
        self.blocks: Dict[bytes, Block] = {self.genesis_hash: genesis}
        self.post_states: Dict[bytes, WorldState] = {self.genesis_hash: WorldState()}
        self.orphans: "OrderedDict[bytes, Header]" = OrderedDict()
        self.compromised = False

    # Queries

    def has_block(self, h: bytes) -> bool:
        return h in self.blocks

    def get_block(self, h: bytes) -> Optional[Block]:
        return self.blocks.get(h)

    def post_state(self, h: bytes) -> Optional[WorldState]:
        return self.post_states.get(h)

    def canonical_state(self) -> WorldState:
        return self.post_states[self.head]

    def canonical_blocks(self) -> Iterator[Block]:
        """Canonical blocks from genesis to head"""
        for height in range(0, self.head_header.height + 1):
            yield self.blocks[self.canonical[height]]

    # Import

    def import_block(self, b: Block) -> ImportOutcome:
        """
        Validate a block and apply fork choice.

        Args:
            b: Block received from a peer

        Returns:
            ImportOutcome; rejections carry the ValidationError
        """
        h = block_hash(b.header)
        cached = self.bad_blocks.get(h)
        if cached is not None:
            return ImportOutcome.rejected(h, cached)

        try:
            result = validate_block(b, self)
        except ValidationError as e:
            if e.kind in CACHED_ERROR_KINDS:
                self.bad_blocks[h] = e
            self.logger.debug("Block rejected", block=h.hex()[:16], error=e.label)
            return ImportOutcome.rejected(h, e)

        return self._store(b, h, result.state)

    def write_mined_block(self, b: Block, state: WorldState) -> ImportOutcome:
        """Store a block sealed by this node without re-validating it."""
        return self._store(b, block_hash(b.header), state)

    def _store(self, b: Block, h: bytes, state: WorldState) -> ImportOutcome:
        parent_td = self.td[b.header.parent_hash]
        self._record(h, b.header, parent_td + b.header.difficulty)
        self.blocks[h] = b
        self.post_states[h] = state

        outcome = self._choose_head(h)
        if outcome.kind == ImportKind.SIDE_CHAIN:
            self.orphans[h] = b.header
        if outcome.head_changed:
            for applied in outcome.applied:
                self.orphans.pop(applied, None)
            self._prune_orphans()
        return outcome

    def _on_reverted(self, reverted: List[bytes]) -> None:
        for h in reverted:
            self.orphans[h] = self.headers[h]

    def _prune_orphans(self) -> None:
        floor = self.head_header.height - self.params.uncle_depth
        for h in [h for h, header in self.orphans.items() if header.height < floor]:
            del self.orphans[h]

    # Uncles

    def uncle_candidates(self, tip: bytes, verify_seals: Optional[bool] = None) -> List[Header]:
        """
        Orphaned headers a block built on ``tip`` may include as uncles.

        Args:
            tip: Parent of the block being built
            verify_seals: Skip candidates that fail header validation;
                defaults to True unless this store was tampered with

        Returns:
            At most max_uncles headers, in orphaning order
        """
        verify = (not self.compromised) if verify_seals is None else verify_seals

        ancestors: Dict[bytes, Header] = {}
        included = set()
        cursor = tip
        for _ in range(self.params.uncle_depth + 1):
            block = self.blocks.get(cursor)
            if block is None:
                break
            ancestors[cursor] = block.header
            included.update(block_hash(u) for u in block.uncles)
            if block.header.height == 0:
                break
            cursor = block.header.parent_hash

        candidates: List[Header] = []
        for h, header in self.orphans.items():
            if len(candidates) >= self.params.max_uncles:
                break
            if h in ancestors or h in included or self.is_canonical(h):
                continue
            if header.parent_hash not in ancestors or header.parent_hash == tip:
                continue
            if verify and (
                h in self.bad_blocks
                or validate_header(header, ancestors[header.parent_hash], self.params) is not None
            ):
                continue
            candidates.append(header)
        return candidates

    # Persistence

    def to_dict(self) -> Dict[str, Any]:
        return {
            "version": CHAIN_DB_VERSION,
            "params": self.params.model_dump(),
            "genesis": self.genesis_hash.hex(),
            "head": self.head.hex(),
            "compromised": self.compromised,
            "blocks": {h.hex(): encode_block(b).hex() for h, b in sorted(self.blocks.items())},
            "td": {h.hex(): td for h, td in sorted(self.td.items())},
            "canonical": {str(height): h.hex() for height, h in sorted(self.canonical.items())},
            "post_states": {
                h.hex(): {k.hex(): v.hex() for k, v in state.items()}
                for h, state in sorted(self.post_states.items())
            },
            "bad_blocks": {h.hex(): e.label for h, e in sorted(self.bad_blocks.items())},
            "orphans": [h.hex() for h in self.orphans],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ChainStore":
        params = ConsensusParams.model_validate(data["params"])
        blocks = {bytes.fromhex(h): decode_block(bytes.fromhex(raw)) for h, raw in data["blocks"].items()}
        genesis_hash = bytes.fromhex(data["genesis"])

        store = cls(blocks[genesis_hash], params)
        store.blocks = blocks
        store.headers = {h: b.header for h, b in blocks.items()}
        store.td = {bytes.fromhex(h): int(td) for h, td in data["td"].items()}
        store.canonical = {int(height): bytes.fromhex(h) for height, h in data["canonical"].items()}
        store.head = bytes.fromhex(data["head"])
        store.post_states = {
            bytes.fromhex(h): WorldState({bytes.fromhex(k): bytes.fromhex(v) for k, v in entries.items()})
            for h, entries in data["post_states"].items()
        }
        store.bad_blocks = {
            bytes.fromhex(h): parse_error_label(label, bytes.fromhex(h)) for h, label in data["bad_blocks"].items()
        }
        store.orphans = OrderedDict((bytes.fromhex(h), store.headers[bytes.fromhex(h)]) for h in data["orphans"])
        store.compromised = bool(data["compromised"])
        return store

    def dump(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), sort_keys=True, indent=1), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ChainStore":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
