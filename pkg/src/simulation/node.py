"""
Simulated node: role, chain store, peers, pools and mining state.
"""

from collections import OrderedDict
from typing import Dict, List, Optional, Union

import numpy as np

from src.core.config import ConsensusParams
from src.core.encoding import tx_hash
from src.models.data_models import Block, Transaction
from src.models.input_models import NodeRole, NodeSpec
from src.services.chain import ChainStore, HeaderChain
from src.services.iot import TamperLogUploader
from src.services.state import expected_seq

from .events import HeadAdvert
from .peers import PeerRecord, PeerStatus


class SimNode:
    """One participant of the simulated network"""

    def __init__(self, spec: NodeSpec, genesis: Block, params: ConsensusParams, rng: np.random.Generator):
        self.id = spec.id
        self.role = spec.role
        self.mining_power = spec.mining_power
        self.rng = rng

        self.store: Union[ChainStore, HeaderChain]
        if spec.role == NodeRole.LIGHT:
            self.store = HeaderChain(genesis.header, params)
        else:
            self.store = ChainStore(genesis, params)

        self.peers: Dict[str, PeerRecord] = {}
        self.tx_pool: "OrderedDict[bytes, Transaction]" = OrderedDict()
        self.stranded: "OrderedDict[bytes, Transaction]" = OrderedDict()
        self.uploader = TamperLogUploader(spec.id)

        self.mining_generation = 0
        self.mining_paused = False
        self.sync_peer: Optional[str] = None
        self.sync_more = False
        self.audit_clean = True

    @property
    def is_light(self) -> bool:
        return self.role == NodeRole.LIGHT

    @property
    def is_miner(self) -> bool:
        return self.role == NodeRole.MINER and self.mining_power > 0

    @property
    def chain(self) -> ChainStore:
        assert isinstance(self.store, ChainStore), f"{self.id} is a light node"
        return self.store

    @property
    def headers(self) -> HeaderChain:
        assert isinstance(self.store, HeaderChain), f"{self.id} is a full node"
        return self.store

    def advert(self) -> HeadAdvert:
        head, td, height = self.store.status()
        return HeadAdvert(head=head, td=td, height=height)

    def connect(self, other: "SimNode") -> None:
        self.peers[other.id] = PeerRecord(peer_id=other.id, role=other.role, advertised_head=other.advert())

    def active_peers(self, full_only: bool = False) -> List[PeerRecord]:
        return [p for p in self.peers.values() if p.active and not (full_only and p.is_light)]

    def can_receive_from(self, peer_id: str) -> bool:
        record = self.peers.get(peer_id)
        return record is not None and record.status == PeerStatus.ACTIVE

    # Transaction pool

    def add_to_pool(self, tx: Transaction) -> bool:
        """Queue a transaction once; returns False for one already pooled or consumed."""
        h = tx_hash(tx)
        if h in self.tx_pool or tx.seq < expected_seq(self.chain.canonical_state(), tx.sender):
            return False
        self.tx_pool[h] = tx
        return True

    def prune_pool(self) -> None:
        """Drop transactions the canonical state has already consumed."""
        if self.is_light:
            return
        state = self.chain.canonical_state()
        next_seq: Dict[str, int] = {}
        for h in list(self.tx_pool):
            tx = self.tx_pool[h]
            if tx.sender not in next_seq:
                next_seq[tx.sender] = expected_seq(state, tx.sender)
            if tx.seq < next_seq[tx.sender]:
                del self.tx_pool[h]

    def reinject(self, transactions: List[Transaction]) -> None:
        for tx in transactions:
            self.tx_pool.setdefault(tx_hash(tx), tx)
