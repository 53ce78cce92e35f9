"""Chain database, fork choice and block assembly."""

from .block_builder import build_block, make_genesis, seal_block, select_transactions
from .chain_store import CACHED_ERROR_KINDS, FALSIFICATION_ERROR_KINDS, ChainStore
from .header_chain import HeaderChain
from .header_index import HeaderIndex
from .import_outcome import ImportKind, ImportOutcome

__all__ = [
    "build_block",
    "make_genesis",
    "seal_block",
    "select_transactions",
    "CACHED_ERROR_KINDS",
    "FALSIFICATION_ERROR_KINDS",
    "ChainStore",
    "HeaderChain",
    "HeaderIndex",
    "ImportKind",
    "ImportOutcome",
]
