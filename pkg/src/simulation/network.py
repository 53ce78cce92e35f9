"""
Discrete-event network simulator.

A single timeline drives every node: exponential mining races, constant
latency full-mesh delivery, locator-based header sync followed by body
fetch, light-client header import and bad-peer demotion. Tamper actions are
applied between events. Everything random is drawn from per-node numpy
generators spawned from the run seed, so the EventLog is a pure function of
(nodes, schedule, seed).
"""

from typing import Any, Callable, Dict, List, Optional, Sequence, Set

import numpy as np
import structlog

from src.core.config import ConsensusParams, NetworkParams
from src.core.encoding import block_hash, tx_hash
from src.models.data_models import Block, BroadcastReport, Header, SensorRecord, Transaction
from src.models.exceptions import (
    BudgetTooSmallError,
    TamperPreconditionError,
    TamperTargetMissingError,
    TransactionStrandedError,
    ValidationError,
    ValidationErrorKind,
)
from src.models.input_models import ComputeBudget, DeviceConfig, LightFetch, LightTamperAction, NodeSpec, TamperAction
from src.services.chain import (
    FALSIFICATION_ERROR_KINDS,
    ImportKind,
    ImportOutcome,
    build_block,
    make_genesis,
    seal_block,
    select_transactions,
)
from src.services.iot import audit_local_chain, make_sensor_tx, upload_tamper_log
from src.services.state import read_record
from src.services.tamper import LightTamperReceipt, TamperReceipt, inject, tamper_light_head

from .events import EventKind, EventLog, EventQueue, SimEvent
from .node import SimNode
from .peers import PeerRecord, PeerStatus

logger = structlog.get_logger(__name__)

SETTLE_BLOCKS = 20


class NetworkSimulator:
    """
    The simulated network: nodes, event queue and event log.

    Args:
        params: Consensus constants shared by every node
        network: Latency and honest sealing budget
        node_specs: Topology; every node peers with every other node
        seed: Run seed
    """

    def __init__(
        self,
        params: ConsensusParams,
        network: NetworkParams,
        node_specs: Sequence[NodeSpec],
        seed: int,
    ):
        self.params = params
        self.network = network
        self.seed = seed
        self.genesis = make_genesis(params)

        streams = np.random.SeedSequence(seed).spawn(len(node_specs))
        self.nodes: Dict[str, SimNode] = {
            spec.id: SimNode(spec, self.genesis, params, np.random.default_rng(stream))
            for spec, stream in zip(node_specs, streams)
        }
        for node in self.nodes.values():
            for other in self.nodes.values():
                if other.id != node.id:
                    node.connect(other)

        self.queue = EventQueue()
        self.log = EventLog()
        self.now = 0
        self.block_outcomes: Dict[bytes, Dict[str, str]] = {}
        self.tamper_receipts: List[TamperReceipt] = []
        self.light_receipts: List[LightTamperReceipt] = []
        self.forged_canonical: Dict[str, Set[bytes]] = {}
        self._in_flight = 0
        self._started = False

        self._handlers: Dict[EventKind, Callable[[SimNode, SimEvent], None]] = {
            EventKind.BLOCK_FOUND: self._on_block_found,
            EventKind.NEW_BLOCK: self._on_new_block,
            EventKind.NEW_TX: self._on_new_tx,
            EventKind.GET_HEADERS: self._on_get_headers,
            EventKind.HEADERS: self._on_headers,
            EventKind.GET_BODIES: self._on_get_bodies,
            EventKind.BODIES: self._on_bodies,
            EventKind.STATUS: self._on_status,
            EventKind.SENSOR_TICK: self._on_sensor_tick,
            EventKind.TAMPER_ACTION: self._on_tamper_action,
            EventKind.LIGHT_TAMPER: self._on_light_tamper,
            EventKind.LIGHT_FETCH: self._on_light_fetch,
        }

    # Scheduling

    def schedule(self, event: SimEvent) -> None:
        """Queue an event; it may not lie in the past."""
        if event.time < self.now:
            raise ValueError(f"event at {event.time} ms scheduled after simulation time {self.now} ms")
        if event.node not in self.nodes:
            raise KeyError(event.node)
        if event.is_message:
            self._in_flight += 1
        self.queue.push(event)

    def schedule_reading(self, device: DeviceConfig, reading: SensorRecord) -> None:
        self.schedule(
            SimEvent(
                time=reading.reading_time * 1000, kind=EventKind.SENSOR_TICK, node=device.node_id, data=(device, reading)
            )
        )

    def schedule_tamper(self, action: TamperAction) -> None:
        self.schedule(SimEvent(time=action.at_ms, kind=EventKind.TAMPER_ACTION, node=action.spec.target_node, data=action.spec))

    def schedule_light_tamper(self, action: LightTamperAction) -> None:
        self.schedule(SimEvent(time=action.at_ms, kind=EventKind.LIGHT_TAMPER, node=action.target_node, data=action))

    def schedule_light_fetch(self, fetch: LightFetch) -> None:
        self.schedule(SimEvent(time=fetch.at_ms, kind=EventKind.LIGHT_FETCH, node=fetch.node, data=fetch))

    def _send(self, origin: SimNode, to: str, kind: EventKind, data: Any = None) -> None:
        self.schedule(
            SimEvent(
                time=self.now + self.network.latency_ms,
                kind=kind,
                node=to,
                sender=origin.id,
                status=origin.advert(),
                data=data,
            )
        )

    # Running

    def run(self, until: int, drain: bool = True) -> EventLog:
        """
        Process events up to ``until`` ms.

        Args:
            until: Last simulation time processed
            drain: Afterwards, deliver in-flight messages and keep the miners
                going (no new readings or tampers) until honest full nodes agree
                on a head, for at most SETTLE_BLOCKS target spacings

        Returns:
            The event log
        """
        if not self._started:
            self._started = True
            for node in self.nodes.values():
                self._schedule_mining(node)

        while len(self.queue) and self.queue.peek_time() <= until:  # type: ignore[operator]
            self._dispatch(self.queue.pop())

        if drain:
            deadline = until + SETTLE_BLOCKS * self.params.target_spacing_s * 1000
            while len(self.queue):
                if self._in_flight == 0 and self.honest_heads_agree():
                    break
                event = self.queue.pop()
                if event.time > deadline:
                    break
                if event.is_message or event.kind == EventKind.BLOCK_FOUND:
                    self._dispatch(event)

        logger.info("Simulation finished", until=until, now=self.now, events=len(self.log), seed=self.seed)
        return self.log

    def honest_heads_agree(self) -> bool:
        heads = {n.store.head for n in self.full_nodes() if not n.chain.compromised}
        return len(heads) <= 1

    def full_nodes(self) -> List[SimNode]:
        return [n for n in self.nodes.values() if not n.is_light]

    def _dispatch(self, event: SimEvent) -> None:
        self.now = event.time
        node = self.nodes[event.node]
        if event.is_message:
            self._in_flight -= 1
            assert event.sender is not None
            if not node.can_receive_from(event.sender):
                return
            record = node.peers[event.sender]
            if event.status is not None:
                record.advertised_head = event.status
            self._handlers[event.kind](node, event)
            self._after_peer_update(node, record)
        else:
            self._handlers[event.kind](node, event)

    # Mining

    def _heavier_full_peers(self, node: SimNode) -> List[PeerRecord]:
        return [p for p in node.active_peers(full_only=True) if p.td > node.store.head_td]

    def _schedule_mining(self, node: SimNode) -> None:
        """Redraw the node's next block time, or pause while a full peer is heavier."""
        if not node.is_miner:
            return
        node.mining_generation += 1
        heavier = self._heavier_full_peers(node)
        if heavier:
            if not node.mining_paused:
                self.log.append(self.now, node.id, "MiningPaused", {"peer": heavier[0].peer_id, "td": heavier[0].td})
            node.mining_paused = True
            return
        if node.mining_paused:
            self.log.append(self.now, node.id, "MiningResumed", {"td": node.store.head_td})
        node.mining_paused = False
        mean_ms = self.params.target_spacing_s * 1000 / node.mining_power
        delay = max(1, int(round(node.rng.exponential(mean_ms))))
        self.schedule(
            SimEvent(time=self.now + delay, kind=EventKind.BLOCK_FOUND, node=node.id, generation=node.mining_generation)
        )

    def _update_mining_pause(self, node: SimNode) -> None:
        if node.is_miner and bool(self._heavier_full_peers(node)) != node.mining_paused:
            self._schedule_mining(node)

    def _on_block_found(self, node: SimNode, event: SimEvent) -> None:
        if event.generation != node.mining_generation or node.mining_paused:
            return
        store = node.chain
        parent = store.head_header
        state = store.canonical_state()
        node.prune_pool()
        transactions = select_transactions(node.tx_pool.values(), state, self.params)
        uncles = store.uncle_candidates(store.head)
        timestamp = max(self.now // 1000, parent.timestamp + 1)

        block, result = build_block(parent, state, transactions, timestamp, self.params, uncles)
        budget = ComputeBudget(max_attempts=self.network.mining_budget)
        block, seal = seal_block(block, self.params, budget, int(node.rng.integers(0, 2**32)))
        if not seal.sealed:
            self.log.append(self.now, node.id, "SealExhausted", {"height": block.header.height}, error="BudgetExhausted")
            self._schedule_mining(node)
            return

        outcome = store.write_mined_block(block, result.state)
        h = block_hash(block.header)
        self.log.append(
            self.now,
            node.id,
            EventKind.BLOCK_FOUND.value,
            {
                "hash": h,
                "parent": block.header.parent_hash,
                "height": block.header.height,
                "difficulty": block.header.difficulty,
                "td": store.total_difficulty(h),
                "txs": len(transactions),
                "uncles": [block_hash(u) for u in uncles],
            },
        )
        self.broadcast_block(node, block)
        self._on_head_change(node, outcome)

    # Blocks

    def broadcast_block(self, origin: SimNode, b: Block) -> List[str]:
        """
        Send a block to every active peer (headers only to light peers).

        Returns:
            Recipient ids; per-peer import outcomes are recorded in
            ``block_outcomes`` and the event log on delivery
        """
        recipients = []
        for peer in origin.active_peers():
            self._send(origin, peer.peer_id, EventKind.NEW_BLOCK, b.header if peer.is_light else b)
            recipients.append(peer.peer_id)
        self.block_outcomes.setdefault(block_hash(b.header), {})
        return recipients

    def _on_new_block(self, node: SimNode, event: SimEvent) -> None:
        assert event.sender is not None
        if node.is_light:
            header = event.data.header if isinstance(event.data, Block) else event.data
            self.light_import_header(node.id, header, event.sender, EventKind.NEW_BLOCK)
        else:
            self._import_block(node, event.data, event.sender, EventKind.NEW_BLOCK)

    def _import_block(self, node: SimNode, b: Block, sender: str, via: EventKind) -> ImportOutcome:
        outcome = node.chain.import_block(b)
        self._record_import(node, b.header, sender, via, outcome)

        if outcome.accepted:
            if outcome.head_changed:
                self._on_head_change(node, outcome)
            return outcome
        assert outcome.error is not None
        kind = outcome.error.kind
        if kind == ValidationErrorKind.KNOWN_BLOCK:
            self._reconsider(node, outcome.block_hash)
        elif kind == ValidationErrorKind.UNKNOWN_PARENT:
            if node.sync_peer is None and node.peers[sender].active:
                self._start_sync(node, sender)
        elif kind in FALSIFICATION_ERROR_KINDS:
            self.demote(node, sender, outcome.error)
        return outcome

    def _record_import(self, node: SimNode, header: Header, sender: str, via: EventKind, outcome: ImportOutcome) -> None:
        self.block_outcomes.setdefault(outcome.block_hash, {})[node.id] = outcome.label
        self.log.append(
            self.now,
            node.id,
            via.value,
            {"from": sender, "hash": outcome.block_hash, "height": header.height, "outcome": outcome.kind.value},
            error=None if outcome.accepted else outcome.label,
        )

    def light_import_header(
        self, node_id: str, h: Header, sender: Optional[str] = None, via: EventKind = EventKind.HEADERS
    ) -> ImportOutcome:
        """
        Import a header into a light node: linkage, difficulty and seal only.

        An unknown parent triggers a header sync from a suitable peer; an
        invalid header demotes the sender.
        """
        node = self.nodes[node_id]
        outcome = node.headers.import_header(h)
        if sender is not None:
            self._record_import(node, h, sender, via, outcome)

        if outcome.accepted:
            if outcome.head_changed:
                self._on_head_change(node, outcome)
            return outcome
        assert outcome.error is not None
        kind = outcome.error.kind
        if kind == ValidationErrorKind.KNOWN_BLOCK:
            self._reconsider(node, outcome.block_hash)
        elif kind == ValidationErrorKind.UNKNOWN_PARENT and node.sync_peer is None:
            peer = self.select_sync_peer(node.id)
            if peer is None:
                self.log.append(self.now, node.id, "NoSuitablePeer", {"purpose": "sync", "td": node.store.head_td})
            else:
                self._start_sync(node, peer.peer_id)
        elif kind == ValidationErrorKind.INVALID_HEADER and sender is not None:
            self.demote(node, sender, outcome.error)
        return outcome

    def _reconsider(self, node: SimNode, h: bytes) -> None:
        outcome = node.store.reconsider(h)
        if outcome is not None:
            self._on_head_change(node, outcome)

    def _on_head_change(self, node: SimNode, outcome: ImportOutcome) -> None:
        if outcome.kind == ImportKind.REORGANIZED:
            self.log.append(
                self.now,
                node.id,
                "Reorg",
                {
                    "old_head": outcome.old_head,
                    "new_head": outcome.new_head,
                    "reverted": len(outcome.reverted),
                    "applied": len(outcome.applied),
                },
            )
            if node.is_miner:
                applied = {
                    tx_hash(tx) for h in outcome.applied for tx in node.chain.blocks[h].transactions
                }
                node.reinject(
                    [tx for h in outcome.reverted for tx in node.chain.blocks[h].transactions if tx_hash(tx) not in applied]
                )
        self._after_local_change(node)

    def _after_local_change(self, node: SimNode) -> None:
        self._track_forged_blocks(node)
        if not node.is_light and node.uploader.pending:
            node.audit_clean = not audit_local_chain(node.chain, node.id, self.now)
            self._upload_pending(node)
        self._retry_stranded(node)
        self._schedule_mining(node)

    def _track_forged_blocks(self, node: SimNode) -> None:
        """Log forged blocks entering or leaving a full node's canonical chain."""
        if node.is_light or not self.tamper_receipts:
            return
        forged = {r.forged_hash for r in self.tamper_receipts if r.forged_hash != r.original_hash}
        current = {h for h in forged if node.chain.is_canonical(h)}
        before = self.forged_canonical.get(node.id, set())
        for h in sorted(current - before):
            self.log.append(self.now, node.id, "ForgedBlockCanonical", {"block": h, "td": node.store.head_td})
        for h in sorted(before - current):
            self.log.append(self.now, node.id, "ForgedBlockDropped", {"block": h, "td": node.store.head_td})
        self.forged_canonical[node.id] = current

    # Peers

    def select_sync_peer(self, node_id: str) -> Optional[PeerRecord]:
        """
        Active full peer advertising a strictly greater td than the local head.

        Ties on td go to the greater height, then to peer order.
        """
        node = self.nodes[node_id]
        candidates = self._heavier_full_peers(node)
        if not candidates:
            return None
        return max(candidates, key=lambda p: (p.td, p.height))

    def _tx_peers(self, node: SimNode) -> List[PeerRecord]:
        """Active full peers whose advertised td is not below the local head."""
        return [p for p in node.active_peers(full_only=True) if p.td >= node.store.head_td]

    def demote(self, node: SimNode, peer_id: str, error: ValidationError) -> None:
        """Mark a peer bad after it sent falsified data; the peer loses this node too."""
        record = node.peers[peer_id]
        if record.status == PeerStatus.BAD:
            return
        record.status = PeerStatus.BAD
        self.log.append(self.now, node.id, "PeerDemoted", {"peer": peer_id}, error=error.label)
        logger.warning("Peer demoted", node=node.id, peer=peer_id, error=error.label)

        other = self.nodes[peer_id]
        back = other.peers.get(node.id)
        if back is not None and back.status == PeerStatus.ACTIVE:
            back.status = PeerStatus.DISCONNECTED
            self.log.append(self.now, other.id, "PeerDisconnected", {"peer": node.id})
        if node.sync_peer == peer_id:
            node.sync_peer = None
        if other.sync_peer == node.id:
            other.sync_peer = None

        for affected in (node, other):
            self._update_mining_pause(affected)
            self._maybe_sync(affected)

    def _after_peer_update(self, node: SimNode, record: PeerRecord) -> None:
        if record.active and record.advertised_head is not None and not record.is_light:
            self._reconsider(node, record.advertised_head.head)
        self._maybe_sync(node)
        if node.stranded:
            self._retry_stranded(node)
        if node.uploader.pending and node.audit_clean and self._tx_peers(node):
            self._upload_pending(node)
        self._update_mining_pause(node)

    def _on_status(self, node: SimNode, event: SimEvent) -> None:
        assert event.status is not None and event.sender is not None
        self.log.append(
            self.now, node.id, EventKind.STATUS.value, {"from": event.sender, "td": event.status.td, "height": event.status.height}
        )
        if event.data:
            self._send(node, event.sender, EventKind.STATUS, False)

    def announce_status(self, node: SimNode) -> None:
        """Handshake with every active peer; each answers with its own status."""
        for peer in node.active_peers():
            self._send(node, peer.peer_id, EventKind.STATUS, True)

    # Sync

    def _maybe_sync(self, node: SimNode) -> None:
        if node.sync_peer is not None:
            return
        peer = self.select_sync_peer(node.id)
        if peer is None or peer.advertised_head is None or node.store.has_header(peer.advertised_head.head):
            return
        self._start_sync(node, peer.peer_id)

    def _start_sync(self, node: SimNode, peer_id: str) -> None:
        node.sync_peer = peer_id
        self._send(node, peer_id, EventKind.GET_HEADERS, node.store.locator())

    def _finish_sync(self, node: SimNode, progressed: bool = True) -> None:
        node.sync_peer = None
        if progressed:
            self._maybe_sync(node)

    def _on_get_headers(self, node: SimNode, event: SimEvent) -> None:
        headers = node.store.headers_after(event.data, self.params.max_headers_fetch)
        self.log.append(self.now, node.id, EventKind.GET_HEADERS.value, {"from": event.sender, "count": len(headers)})
        assert event.sender is not None
        self._send(node, event.sender, EventKind.HEADERS, headers)

    def _on_headers(self, node: SimNode, event: SimEvent) -> None:
        headers: List[Header] = event.data
        self.log.append(self.now, node.id, EventKind.HEADERS.value, {"from": event.sender, "count": len(headers)})
        if node.sync_peer != event.sender:
            return
        assert event.sender is not None
        full_batch = len(headers) >= self.params.max_headers_fetch

        if node.is_light:
            for header in headers:
                if node.store.has_header(block_hash(header)):
                    continue
                outcome = self.light_import_header(node.id, header, event.sender, EventKind.HEADERS)
                if not outcome.accepted or node.sync_peer != event.sender:
                    break
            else:
                if full_batch:
                    self._start_sync(node, event.sender)
                    return
            self._finish_sync(node)
            return

        missing = [block_hash(h) for h in headers if not node.chain.has_block(block_hash(h))]
        if not missing:
            if headers:
                self._reconsider(node, block_hash(headers[-1]))
            self._finish_sync(node, progressed=False)
            return
        node.sync_more = full_batch
        self._send(node, event.sender, EventKind.GET_BODIES, missing)

    def _on_get_bodies(self, node: SimNode, event: SimEvent) -> None:
        blocks = [b for b in (node.chain.get_block(h) for h in event.data) if b is not None]
        self.log.append(self.now, node.id, EventKind.GET_BODIES.value, {"from": event.sender, "count": len(blocks)})
        assert event.sender is not None
        self._send(node, event.sender, EventKind.BODIES, blocks)

    def _on_bodies(self, node: SimNode, event: SimEvent) -> None:
        if node.sync_peer != event.sender:
            self.log.append(self.now, node.id, EventKind.BODIES.value, {"from": event.sender, "count": len(event.data)})
            return
        assert event.sender is not None
        for b in event.data:
            outcome = self._import_block(node, b, event.sender, EventKind.BODIES)
            if node.sync_peer != event.sender:
                return
            if not outcome.accepted and outcome.error is not None and outcome.error.kind != ValidationErrorKind.KNOWN_BLOCK:
                break
        else:
            if node.sync_more:
                self._start_sync(node, event.sender)
                return
        self._finish_sync(node)

    # Transactions

    def send_transaction(self, node_id: str, tx: Transaction) -> BroadcastReport:
        """
        Broadcast a transaction from a node to its suitable peers.

        A miner also queues it locally. With no suitable peer the transaction
        is "broadcast to null": it is recorded as stranded and re-sent when
        the node's view improves.
        """
        node = self.nodes[node_id]
        h = tx_hash(tx)
        if not node.is_light:
            node.add_to_pool(tx)

        recipients = tuple(p.peer_id for p in self._tx_peers(node))
        for peer_id in recipients:
            self._send(node, peer_id, EventKind.NEW_TX, tx)
        report = BroadcastReport(tx_hash=h, recipients=recipients)

        if report.stranded:
            if h not in node.stranded:
                node.stranded[h] = tx
                self.log.append(self.now, node.id, "TxStranded", {"tx": h, "sender": tx.sender, "seq": tx.seq})
        elif h in node.stranded:
            del node.stranded[h]
            self.log.append(self.now, node.id, "TxRebroadcast", {"tx": h, "recipients": list(recipients)})
        return report

    def _retry_stranded(self, node: SimNode) -> None:
        if not node.stranded or not self._tx_peers(node):
            return
        for tx in list(node.stranded.values()):
            self.send_transaction(node.id, tx)

    def _on_new_tx(self, node: SimNode, event: SimEvent) -> None:
        tx: Transaction = event.data
        if node.is_light or not node.add_to_pool(tx):
            return
        self.log.append(self.now, node.id, EventKind.NEW_TX.value, {"from": event.sender, "tx": tx_hash(tx)})
        for peer in self._tx_peers(node):
            if peer.peer_id != event.sender:
                self._send(node, peer.peer_id, EventKind.NEW_TX, tx)

    def _on_sensor_tick(self, node: SimNode, event: SimEvent) -> None:
        device, reading = event.data
        tx = make_sensor_tx(device, reading)
        self.log.append(
            self.now,
            node.id,
            EventKind.SENSOR_TICK.value,
            {"device": device.device_id, "seq": reading.seq, "temperature": reading.temperature, "tx": tx_hash(tx)},
        )
        self.send_transaction(node.id, tx)

    # Tamper logs

    def _upload_pending(self, node: SimNode) -> None:
        if not node.audit_clean:
            return
        for log in list(node.uploader.pending.values()):
            try:
                tx = upload_tamper_log(node.uploader, log, self, node.chain.canonical_state())
            except TransactionStrandedError:
                return
            if tx is not None:
                self.log.append(
                    self.now,
                    node.id,
                    "TamperLogUploaded",
                    {"tx": tx_hash(tx), "block": log.block_hash, "field": log.field},
                )

    # Attacks and lookups

    def _on_tamper_action(self, node: SimNode, event: SimEvent) -> None:
        spec = event.data
        try:
            receipt = inject(node.chain, spec, self.now)
        except (TamperTargetMissingError, TamperPreconditionError) as e:
            self.log.append(self.now, node.id, EventKind.TAMPER_ACTION.value, {"detail": str(e)}, error=type(e).__name__)
            return
        self.tamper_receipts.append(receipt)
        self.log.append(self.now, node.id, EventKind.TAMPER_ACTION.value, receipt.summary())

        found = audit_local_chain(node.chain, node.id, self.now)
        for log in found:
            self.log.append(
                self.now,
                node.id,
                "TamperDetected",
                {"block": log.block_hash, "field": log.field, "old": log.old_value, "new": log.new_value},
            )
        node.uploader.add(found)
        node.audit_clean = not found
        self._after_local_change(node)
        self.announce_status(node)

    def _on_light_tamper(self, node: SimNode, event: SimEvent) -> None:
        action: LightTamperAction = event.data
        network_height = max((p.height for p in node.active_peers(full_only=True)), default=0)
        forged_height = max(node.store.head_header.height, network_height) + action.height_lead
        try:
            receipt = tamper_light_head(
                node.headers, node.id, forged_height, action.budget, network_height, action.rng_seed
            )
        except (BudgetTooSmallError, TamperPreconditionError) as e:
            self.log.append(self.now, node.id, EventKind.LIGHT_TAMPER.value, {"detail": str(e)}, error=type(e).__name__)
            return
        self.light_receipts.append(receipt)
        self.log.append(self.now, node.id, EventKind.LIGHT_TAMPER.value, receipt.summary())
        self._after_local_change(node)
        self.announce_status(node)

    def _on_light_fetch(self, node: SimNode, event: SimEvent) -> None:
        fetch: LightFetch = event.data
        self.light_fetch_record(node.id, fetch.device_id, fetch.seq)

    def light_fetch_record(self, node_id: str, device_id: str, seq: int) -> Optional[SensorRecord]:
        """Read one record through a suitable full peer; None when no peer qualifies or the record is absent."""
        node = self.nodes[node_id]
        peers = self._tx_peers(node)
        if not peers:
            self.log.append(
                self.now, node.id, "NoSuitablePeer", {"purpose": "fetch", "device": device_id, "seq": seq}
            )
            return None
        peer = self.nodes[peers[0].peer_id]
        record = read_record(peer.chain.canonical_state(), device_id, seq)
        self.log.append(
            self.now,
            node.id,
            EventKind.LIGHT_FETCH.value,
            {
                "peer": peer.id,
                "device": device_id,
                "seq": seq,
                "temperature": record.temperature if record is not None else None,
            },
        )
        return record
