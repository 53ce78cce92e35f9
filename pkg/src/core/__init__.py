"""
Core components: settings, logging, canonical encoding and Merkle commitment.
"""

from .config import ConsensusParams, NetworkParams, Settings, get_settings, reload_settings
from .merkle import EMPTY_ROOT, merkle_root

__all__ = [
    "ConsensusParams",
    "NetworkParams",
    "Settings",
    "get_settings",
    "reload_settings",
    "EMPTY_ROOT",
    "merkle_root",
]
