"""Discrete-event simulation of the node network."""

from .events import EVENT_LOG_VERSION, EventKind, EventLog, HeadAdvert, SimEvent
from .network import NetworkSimulator
from .node import SimNode
from .peers import PeerRecord, PeerStatus

__all__ = [
    "EVENT_LOG_VERSION",
    "EventKind",
    "EventLog",
    "HeadAdvert",
    "SimEvent",
    "NetworkSimulator",
    "SimNode",
    "PeerRecord",
    "PeerStatus",
]
