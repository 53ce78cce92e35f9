"""
Tests for the network simulator.
"""

import pytest

from src.core.config import NetworkParams
from src.core.encoding import block_hash
from src.models.data_models import SensorRecord
from src.models.exceptions import ValidationError, ValidationErrorKind
from src.models.input_models import ComputeBudget, DeviceConfig, NodeSpec, TamperAction, TamperSpec
from src.services.chain import ImportKind
from src.services.iot import make_sensor_tx
from src.services.state import WorldState, read_record
from src.services.tamper import tamper_light_head
from src.simulation import EventKind, NetworkSimulator, PeerStatus, SimEvent

NODES = [
    NodeSpec(id="miner-1", role="miner", mining_power=0.5),
    NodeSpec(id="miner-2", role="miner", mining_power=0.5),
    NodeSpec(id="endpoint-1", role="endpoint"),
    NodeSpec(id="light-1", role="light"),
]
DEVICE = DeviceConfig(device_id="dev-1", node_id="endpoint-1", readings=[3400])
READING = SensorRecord(device_id="dev-1", reading_time=5, temperature=3400, seq=0)


@pytest.fixture
def make_sim(params):
    def make(seed: int = 1) -> NetworkSimulator:
        return NetworkSimulator(params, NetworkParams(latency_ms=50, mining_budget=1_000_000), NODES, seed)

    return make


class TestScheduling:
    def test_rejects_past_events(self, make_sim):
        sim = make_sim()
        sim.now = 1000
        with pytest.raises(ValueError):
            sim.schedule(SimEvent(time=10, kind=EventKind.SENSOR_TICK, node="endpoint-1"))

    def test_rejects_unknown_node(self, make_sim):
        with pytest.raises(KeyError):
            make_sim().schedule(SimEvent(time=10, kind=EventKind.SENSOR_TICK, node="nobody"))

    def test_full_mesh(self, make_sim):
        sim = make_sim()
        assert sorted(sim.nodes["endpoint-1"].peers) == ["light-1", "miner-1", "miner-2"]
        assert [n.id for n in sim.full_nodes()] == ["miner-1", "miner-2", "endpoint-1"]


@pytest.mark.integration
class TestRun:
    def test_reading_reaches_every_full_node(self, make_sim):
        sim = make_sim()
        sim.schedule_reading(DEVICE, READING)
        log = sim.run(until=120_000)

        assert log.find(kind="BlockFound")
        assert sim.honest_heads_agree()
        for node in sim.full_nodes():
            assert read_record(node.chain.canonical_state(), "dev-1", 0) == READING

    def test_same_seed_same_log(self, make_sim):
        logs = []
        for _ in range(2):
            sim = make_sim(seed=7)
            sim.schedule_reading(DEVICE, READING)
            logs.append(sim.run(until=60_000).to_jsonl())
        assert logs[0] == logs[1]

    def test_forged_block_enters_and_leaves_canonical_chain(self, make_sim):
        sim = make_sim()
        sim.schedule_reading(DEVICE, READING)
        spec = TamperSpec.model_validate(
            {
                "target_node": "endpoint-1",
                "edit": {"path": "record:dev-1:0:temperature", "value": -400},
                "reseal": {"mode": "honest_repow", "budget": {"max_attempts": 1_000_000}, "rng_seed": 7},
                "claimed_td_delta": -8,
            }
        )
        sim.schedule_tamper(TamperAction(at_ms=120_000, spec=spec))
        log = sim.run(until=400_000)

        forged = sim.tamper_receipts[0].forged_hash.hex()
        adopted = log.find(kind="ForgedBlockCanonical", node="endpoint-1")
        dropped = log.find(kind="ForgedBlockDropped", node="endpoint-1")
        assert [e["detail"]["block"] for e in adopted] == [forged]
        assert [e["detail"]["block"] for e in dropped] == [forged]
        assert dropped[0]["time"] > adopted[0]["time"]
        assert not log.find(kind="ForgedBlockCanonical", node="miner-1")

    def test_seed_changes_log(self, make_sim):
        first, second = make_sim(seed=1), make_sim(seed=2)
        assert first.run(until=60_000).to_jsonl() != second.run(until=60_000).to_jsonl()


class TestPeers:
    def test_demotion_cuts_both_directions(self, make_sim):
        sim = make_sim()
        miner, endpoint = sim.nodes["miner-1"], sim.nodes["endpoint-1"]
        sim.demote(miner, "endpoint-1", ValidationError(ValidationErrorKind.INVALID_HEADER, reason="BadSeal"))

        assert miner.peers["endpoint-1"].status == PeerStatus.BAD
        assert endpoint.peers["miner-1"].status == PeerStatus.DISCONNECTED
        assert sim.log.find(kind="PeerDemoted", node="miner-1", error="InvalidHeader:BadSeal")
        assert sim.log.find(kind="PeerDisconnected", node="endpoint-1")

        report = sim.send_transaction("endpoint-1", make_sensor_tx(DEVICE, READING))
        assert report.recipients == ("miner-2",)

    def test_sync_peer_must_be_heavier(self, make_sim):
        sim = make_sim()
        assert sim.select_sync_peer("endpoint-1") is None

    def test_broadcast_reaches_every_active_peer(self, make_sim, block_factory):
        sim = make_sim()
        block, _ = block_factory(sim.genesis.header, WorldState())
        recipients = sim.broadcast_block(sim.nodes["miner-1"], block)

        assert sorted(recipients) == ["endpoint-1", "light-1", "miner-2"]
        assert len(sim.queue) == 3

    def test_broadcast_skips_demoted_peer(self, make_sim, block_factory):
        sim = make_sim()
        miner = sim.nodes["miner-1"]
        sim.demote(miner, "endpoint-1", ValidationError(ValidationErrorKind.INVALID_HEADER, reason="BadSeal"))
        block, _ = block_factory(sim.genesis.header, WorldState())
        assert "endpoint-1" not in sim.broadcast_block(miner, block)


class TestPool:
    def test_pool_rejects_duplicates_and_consumed_transactions(self, make_sim, block_factory):
        sim = make_sim()
        endpoint = sim.nodes["endpoint-1"]
        tx = make_sensor_tx(DEVICE, READING)
        assert endpoint.add_to_pool(tx)
        assert not endpoint.add_to_pool(tx)

        block, _ = block_factory(sim.genesis.header, WorldState(), [tx])
        assert endpoint.chain.import_block(block).accepted
        endpoint.prune_pool()
        assert not endpoint.tx_pool

        assert not endpoint.add_to_pool(tx)
        assert not endpoint.tx_pool


class TestLightNode:
    def test_header_import_extends_head(self, make_sim, block_factory):
        sim = make_sim()
        child, _ = block_factory(sim.genesis.header, WorldState())
        grandchild, _ = block_factory(child.header, WorldState(), rng_seed=5)

        orphaned = sim.light_import_header("light-1", grandchild.header)
        assert orphaned.error.kind == ValidationErrorKind.UNKNOWN_PARENT
        assert sim.log.find(kind="NoSuitablePeer", node="light-1")

        assert sim.light_import_header("light-1", child.header).kind == ImportKind.EXTENDED_CANONICAL
        assert sim.light_import_header("light-1", grandchild.header).kind == ImportKind.EXTENDED_CANONICAL
        assert sim.nodes["light-1"].headers.head == block_hash(grandchild.header)

    def test_forged_head_strands_transactions(self, make_sim):
        sim = make_sim()
        light = sim.nodes["light-1"]
        tamper_light_head(light.headers, "light-1", 3, ComputeBudget(max_attempts=500_000), network_height=0)

        device = DeviceConfig(device_id="dev-9", node_id="light-1", readings=[2150])
        tx = make_sensor_tx(device, SensorRecord(device_id="dev-9", reading_time=1, temperature=2150, seq=0))
        assert sim.send_transaction("light-1", tx).stranded
        assert sim.send_transaction("light-1", tx).stranded
        assert len(sim.log.find(kind="TxStranded", node="light-1")) == 1

    def test_fetch_without_suitable_peer(self, make_sim):
        sim = make_sim()
        tamper_light_head(sim.nodes["light-1"].headers, "light-1", 2, ComputeBudget(max_attempts=500_000), network_height=0)
        assert sim.light_fetch_record("light-1", "dev-1", 0) is None
        assert sim.log.find(kind="NoSuitablePeer", node="light-1")

    def test_fetch_reads_peer_state(self, make_sim):
        sim = make_sim()
        sim.schedule_reading(DEVICE, READING)
        sim.run(until=120_000)
        assert sim.light_fetch_record("light-1", "dev-1", 0) == READING
