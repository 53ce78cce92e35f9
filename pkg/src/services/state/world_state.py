"""
Persistent key-value world state with a Merkle commitment.
"""

from types import MappingProxyType
from typing import Dict, Iterator, Mapping, Optional, Tuple

from src.core.encoding import encode_state_leaf
from src.core.merkle import merkle_root


class WorldState:
    """
    Immutable map of byte keys to byte values.

    The root is a Merkle commitment over entries sorted by key, so two states
    holding the same entries share a root regardless of write order.
    Updates return a new WorldState and leave this one untouched.
    """

    __slots__ = ("_entries", "_root")

    def __init__(self, entries: Optional[Mapping[bytes, bytes]] = None):
        self._entries: Dict[bytes, bytes] = dict(entries or {})
        self._root: Optional[bytes] = None

    @property
    def entries(self) -> Mapping[bytes, bytes]:
        return MappingProxyType(self._entries)

    @property
    def root(self) -> bytes:
        if self._root is None:
            self._root = merkle_root([encode_state_leaf(k, v) for k, v in self.items()])
        return self._root

    def get(self, key: bytes) -> Optional[bytes]:
        return self._entries.get(key)

    def items(self) -> Iterator[Tuple[bytes, bytes]]:
        """Entries in key order"""
        for key in sorted(self._entries):
            yield key, self._entries[key]

    def with_updates(self, updates: Mapping[bytes, bytes]) -> "WorldState":
        if not updates:
            return self
        merged = dict(self._entries)
        merged.update(updates)
        return WorldState(merged)

    def diff(self, other: "WorldState") -> Dict[bytes, Tuple[Optional[bytes], Optional[bytes]]]:
        """Keys whose values differ, mapped to (this value, other value)."""
        keys = set(self._entries) | set(other._entries)
        return {
            k: (self._entries.get(k), other._entries.get(k))
            for k in sorted(keys)
            if self._entries.get(k) != other._entries.get(k)
        }

    def __contains__(self, key: object) -> bool:
        return key in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WorldState):
            return NotImplemented
        return self._entries == other._entries

    def __hash__(self) -> int:
        return hash(self.root)

    def __repr__(self) -> str:
        return f"WorldState(entries={len(self._entries)}, root={self.root.hex()[:16]})"
