"""
Peer bookkeeping of a simulated node.
"""

from enum import Enum
from typing import Optional

from pydantic import BaseModel

from src.models.input_models import NodeRole

from .events import HeadAdvert


class PeerStatus(str, Enum):
    ACTIVE = "active"
    BAD = "bad"
    DISCONNECTED = "disconnected"


class PeerRecord(BaseModel):
    """
    What a node knows about one peer.

    BAD marks a peer this node demoted; DISCONNECTED marks a peer that
    demoted this node. Neither receives messages or is selected again.
    """

    peer_id: str
    role: NodeRole
    advertised_head: Optional[HeadAdvert] = None
    status: PeerStatus = PeerStatus.ACTIVE

    @property
    def active(self) -> bool:
        return self.status == PeerStatus.ACTIVE

    @property
    def is_light(self) -> bool:
        return self.role == NodeRole.LIGHT

    @property
    def td(self) -> int:
        return self.advertised_head.td if self.advertised_head is not None else 0

    @property
    def height(self) -> int:
        return self.advertised_head.height if self.advertised_head is not None else 0
