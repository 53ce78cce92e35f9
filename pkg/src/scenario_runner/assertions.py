"""
Scenario assertions.

Each assertion is a named check with its own parameter model, evaluated
against a finished run. Scenario files list them under ``assertions`` as
``{type: <name>, ...params}``; the registry validates the parameters and
dispatches by name.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Type, Union

from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from src.core.encoding import tx_hash
from src.models.exceptions import ConfigError
from src.models.input_models import AssertionSpec
from src.services.iot import query_record
from src.services.state import read_tamper_logs
from src.simulation import EventKind, PeerStatus

from .outcome import AssertionResult, ScenarioOutcome

NodeSelector = Union[str, List[str]]

MESSAGE_LOG_KINDS = {
    EventKind.NEW_BLOCK.value,
    EventKind.NEW_TX.value,
    EventKind.GET_HEADERS.value,
    EventKind.HEADERS.value,
    EventKind.GET_BODIES.value,
    EventKind.BODIES.value,
    EventKind.STATUS.value,
}


class AssertionParams(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ScenarioAssertion(ABC):
    """Base class for verdict checks"""

    params_model: Type[AssertionParams] = AssertionParams

    def __init__(self, name: str, description: str):
        self.name = name
        self.description = description

    def validate_params(self, params: Dict[str, Any]) -> AssertionParams:
        return self.params_model.model_validate(params)

    @abstractmethod
    def check(self, outcome: ScenarioOutcome, params: Any) -> AssertionResult:
        """Evaluate against a finished run"""

    def _result(self, passed: bool, detail: str = "") -> AssertionResult:
        return AssertionResult(type=self.name, passed=passed, detail=detail)


# Network assertions


class RecordValueParams(AssertionParams):
    device: str
    seq: int = Field(..., ge=0)
    value: int
    nodes: NodeSelector = "all"


class RecordValueAssertion(ScenarioAssertion):
    params_model = RecordValueParams

    def __init__(self) -> None:
        super().__init__("record_value", "A reading holds the expected value on the selected full nodes")

    def check(self, outcome: ScenarioOutcome, params: RecordValueParams) -> AssertionResult:
        stores = outcome.full_stores
        selected = {n: stores[n] for n in outcome.select_full_nodes(params.nodes)}
        values = {
            node_id: (record.temperature if record is not None else None)
            for node_id, record in query_record(selected, params.device, params.seq).items()
        }
        wrong = {n: v for n, v in values.items() if v != params.value}
        if wrong:
            return self._result(False, f"{params.device}:{params.seq} expected {params.value}, got {wrong}")
        return self._result(True, f"{params.device}:{params.seq} = {params.value} on {sorted(values)}")


class CanonicalAgreementParams(AssertionParams):
    nodes: NodeSelector = "honest"
    include_light: bool = False


class CanonicalAgreementAssertion(ScenarioAssertion):
    params_model = CanonicalAgreementParams

    def __init__(self) -> None:
        super().__init__("canonical_agreement", "The selected nodes share one canonical head")

    def check(self, outcome: ScenarioOutcome, params: CanonicalAgreementParams) -> AssertionResult:
        sim = outcome.require_simulator()
        heads = {n: sim.nodes[n].store.head.hex()[:16] for n in outcome.select_full_nodes(params.nodes)}
        if params.include_light:
            heads.update({n.id: n.store.head.hex()[:16] for n in sim.nodes.values() if n.is_light})
        if len(set(heads.values())) > 1:
            return self._result(False, f"heads differ: {heads}")
        return self._result(True, f"{len(heads)} nodes at {next(iter(heads.values()), '-')}")


class EventPresentParams(AssertionParams):
    kind: str
    node: Optional[str] = None
    error: Optional[str] = Field(None, description="Prefix of the error label")
    min_count: int = Field(1, ge=0)
    max_count: Optional[int] = Field(None, ge=0)


class EventPresentAssertion(ScenarioAssertion):
    params_model = EventPresentParams

    def __init__(self) -> None:
        super().__init__("event_present", "The event log holds a number of matching entries")

    def check(self, outcome: ScenarioOutcome, params: EventPresentParams) -> AssertionResult:
        count = len(outcome.log.find(kind=params.kind, node=params.node, error=params.error))
        passed = count >= params.min_count and (params.max_count is None or count <= params.max_count)
        bounds = f">= {params.min_count}" + (f", <= {params.max_count}" if params.max_count is not None else "")
        return self._result(passed, f"{count} {params.kind} entries (want {bounds})")


class PeerDemotedParams(AssertionParams):
    node: str
    by: NodeSelector = "honest"


class PeerDemotedAssertion(ScenarioAssertion):
    params_model = PeerDemotedParams

    def __init__(self) -> None:
        super().__init__("peer_demoted", "Every selected full node marked a peer bad")

    def check(self, outcome: ScenarioOutcome, params: PeerDemotedParams) -> AssertionResult:
        sim = outcome.require_simulator()
        judges = [n for n in outcome.select_full_nodes(params.by) if n != params.node]
        statuses = {n: sim.nodes[n].peers[params.node].status.value for n in judges}
        missing = {n: s for n, s in statuses.items() if s != PeerStatus.BAD.value}
        if not judges or missing:
            return self._result(False, f"{params.node} not demoted by {missing or 'anyone'}")
        return self._result(True, f"{params.node} demoted by {sorted(judges)}")


class NoDeliveriesParams(AssertionParams):
    node: str


class NoDeliveriesAfterDemotionAssertion(ScenarioAssertion):
    params_model = NoDeliveriesParams

    def __init__(self) -> None:
        super().__init__(
            "no_deliveries_after_demotion", "Once demoted, a peer exchanges no further messages with its judges"
        )

    def check(self, outcome: ScenarioOutcome, params: NoDeliveriesParams) -> AssertionResult:
        demoted_at: Dict[str, int] = {}
        for entry in outcome.log.find(kind="PeerDemoted"):
            if entry["detail"].get("peer") == params.node:
                demoted_at.setdefault(entry["node"], entry["time"])
        if not demoted_at:
            return self._result(False, f"{params.node} was never demoted")

        leaks = []
        for entry in outcome.log:
            if entry["kind"] not in MESSAGE_LOG_KINDS:
                continue
            sender = entry["detail"].get("from")
            receiver = entry["node"]
            if receiver in demoted_at and sender == params.node and entry["time"] > demoted_at[receiver]:
                leaks.append(entry)
            elif receiver == params.node and sender in demoted_at and entry["time"] > demoted_at[sender]:
                leaks.append(entry)
        if leaks:
            first = leaks[0]
            return self._result(False, f"{len(leaks)} deliveries after demotion, first {first['kind']} at {first['time']}")
        return self._result(True, f"isolated from {sorted(demoted_at)}")


class TamperLogOnChainParams(AssertionParams):
    field: str
    old: Optional[str] = None
    new: Optional[str] = None
    nodes: NodeSelector = "all"


class TamperLogOnChainAssertion(ScenarioAssertion):
    params_model = TamperLogOnChainParams

    def __init__(self) -> None:
        super().__init__("tamper_log_on_chain", "A tamper log for the field is in the canonical state")

    def check(self, outcome: ScenarioOutcome, params: TamperLogOnChainParams) -> AssertionResult:
        stores = outcome.full_stores
        absent = []
        for node_id in outcome.select_full_nodes(params.nodes):
            logs = [
                log
                for log in read_tamper_logs(stores[node_id].canonical_state())
                if log.field == params.field
                and (params.old is None or log.old_value == params.old.encode())
                and (params.new is None or log.new_value == params.new.encode())
            ]
            if not logs:
                absent.append(node_id)
        if absent:
            return self._result(False, f"no tamper log for {params.field} on {absent}")
        return self._result(True, f"tamper log for {params.field} on chain")


class BlockNotCanonicalParams(AssertionParams):
    nodes: NodeSelector = "honest"


class BlockNotCanonicalAssertion(ScenarioAssertion):
    params_model = BlockNotCanonicalParams

    def __init__(self) -> None:
        super().__init__("block_not_canonical", "No forged block is canonical on the selected nodes")

    def check(self, outcome: ScenarioOutcome, params: BlockNotCanonicalParams) -> AssertionResult:
        sim = outcome.require_simulator()
        forged = [r.forged_hash for r in sim.tamper_receipts if r.forged_hash != r.original_hash]
        forged += [h for r in sim.light_receipts for h in r.forged_hashes]
        if not forged:
            return self._result(False, "no forged blocks were written")
        stores = outcome.full_stores
        hits = {
            node_id: [h.hex()[:16] for h in forged if stores[node_id].is_canonical(h)]
            for node_id in outcome.select_full_nodes(params.nodes)
        }
        hits = {n: hs for n, hs in hits.items() if hs}
        if hits:
            return self._result(False, f"forged blocks canonical on {hits}")
        return self._result(True, f"{len(forged)} forged blocks off every canonical chain")


class StrandedTxMinedParams(AssertionParams):
    node: str
    within_blocks: Optional[int] = Field(None, ge=1, description="Blocks between rebroadcast and inclusion")
    on: NodeSelector = "honest"


class StrandedTxMinedAssertion(ScenarioAssertion):
    params_model = StrandedTxMinedParams

    def __init__(self) -> None:
        super().__init__("stranded_tx_mined", "Transactions a node stranded were mined after all")

    def check(self, outcome: ScenarioOutcome, params: StrandedTxMinedParams) -> AssertionResult:
        stranded = [e["detail"]["tx"] for e in outcome.log.find(kind="TxStranded", node=params.node)]
        if not stranded:
            return self._result(False, f"{params.node} stranded no transactions")
        rebroadcast_at = {
            e["detail"]["tx"]: e["time"] for e in outcome.log.find(kind="TxRebroadcast", node=params.node)
        }
        found = outcome.log.find(kind=EventKind.BLOCK_FOUND.value)

        stores = outcome.full_stores
        problems = []
        for node_id in outcome.select_full_nodes(params.on):
            store = stores[node_id]
            included = {tx_hash(tx).hex(): b.header.height for b in store.canonical_blocks() for tx in b.transactions}
            for digest in stranded:
                if digest not in included:
                    problems.append(f"{digest[:16]} not mined on {node_id}")
                    continue
                if params.within_blocks is None:
                    continue
                if digest not in rebroadcast_at:
                    problems.append(f"{digest[:16]} was never rebroadcast")
                    continue
                before = [
                    e["detail"]["height"]
                    for e in found
                    if e["time"] <= rebroadcast_at[digest] and store.is_canonical(bytes.fromhex(e["detail"]["hash"]))
                ]
                waited = included[digest] - max(before, default=0)
                if waited > params.within_blocks:
                    problems.append(f"{digest[:16]} mined {waited} blocks after rebroadcast on {node_id}")
        if problems:
            return self._result(False, "; ".join(problems))
        return self._result(True, f"{len(stranded)} stranded transactions mined")


class RecoveredWithinBlocksParams(AssertionParams):
    max_blocks: int = Field(10, ge=0, description="Honest blocks allowed between injection and recovery")
    nodes: NodeSelector = "all"


class RecoveredWithinBlocksAssertion(ScenarioAssertion):
    params_model = RecoveredWithinBlocksParams

    def __init__(self) -> None:
        super().__init__(
            "recovered_within_blocks", "Every forged block leaves the selected canonical chains soon after injection"
        )

    def check(self, outcome: ScenarioOutcome, params: RecoveredWithinBlocksParams) -> AssertionResult:
        injected = {
            e["detail"]["forged"]: e
            for e in outcome.log.find(kind=EventKind.TAMPER_ACTION.value)
            if "error" not in e and e["detail"]["forged"] != e["detail"]["original"]
        }
        if not injected:
            return self._result(False, "no forged block was written beside its original")
        targets = {e["node"] for e in injected.values()}
        honest_blocks = [e for e in outcome.log.find(kind=EventKind.BLOCK_FOUND.value) if e["node"] not in targets]

        problems = []
        worst = 0
        for node_id in outcome.select_full_nodes(params.nodes):
            adopted: Dict[str, int] = {}
            for entry in outcome.log.find(node=node_id):
                block = entry["detail"].get("block")
                if entry["kind"] == "ForgedBlockCanonical" and block in injected:
                    adopted.setdefault(block, entry["time"])
                elif entry["kind"] == "ForgedBlockDropped" and block in adopted:
                    start = injected[block]["time"]
                    waited = sum(1 for e in honest_blocks if start < e["time"] <= entry["time"])
                    worst = max(worst, waited)
                    if waited > params.max_blocks:
                        problems.append(f"{node_id} dropped {block[:16]} after {waited} honest blocks")
                    del adopted[block]
            problems.extend(f"{node_id} still follows {block[:16]}" for block in adopted)
        if problems:
            return self._result(False, "; ".join(problems))
        return self._result(True, f"recovered within {worst} honest blocks (limit {params.max_blocks})")


# Majority-attack assertions


class MajorityWinRateParams(AssertionParams):
    power: float = Field(..., ge=0.0, lt=1.0)
    min_rate: float = Field(0.0, ge=0.0, le=1.0)
    max_rate: float = Field(1.0, ge=0.0, le=1.0)


class MajorityWinRateAssertion(ScenarioAssertion):
    params_model = MajorityWinRateParams

    def __init__(self) -> None:
        super().__init__("majority_win_rate", "The attacker's win rate at one power lies within bounds")

    def check(self, outcome: ScenarioOutcome, params: MajorityWinRateParams) -> AssertionResult:
        sweep = outcome.require_sweep()
        rows = sweep[(sweep["power"] - params.power).abs() < 1e-9]
        if rows.empty:
            return self._result(False, f"power {params.power} not in sweep")
        rate = float(rows["win_rate"].iloc[0])
        passed = params.min_rate <= rate <= params.max_rate
        return self._result(passed, f"win rate {rate:.3f} at power {params.power} (want {params.min_rate}..{params.max_rate})")


class WinRateMonotoneParams(AssertionParams):
    tolerance: float = Field(0.0, ge=0.0)


class WinRateMonotoneAssertion(ScenarioAssertion):
    params_model = WinRateMonotoneParams

    def __init__(self) -> None:
        super().__init__("win_rate_monotone", "Win rate does not drop as attacker power grows")

    def check(self, outcome: ScenarioOutcome, params: WinRateMonotoneParams) -> AssertionResult:
        rates = outcome.require_sweep().sort_values("power")["win_rate"]
        drops = rates.diff().dropna()
        worst = float(drops.min()) if not drops.empty else 0.0
        passed = worst >= -params.tolerance
        return self._result(passed, f"largest drop {max(-worst, 0.0):.3f} (tolerance {params.tolerance})")


class AssertionRegistry:
    """Central registry of scenario assertions"""

    def __init__(self) -> None:
        self.assertions: Dict[str, ScenarioAssertion] = {}
        self._register_default_assertions()

    def _register_default_assertions(self) -> None:
        for assertion in (
            RecordValueAssertion(),
            CanonicalAgreementAssertion(),
            EventPresentAssertion(),
            PeerDemotedAssertion(),
            NoDeliveriesAfterDemotionAssertion(),
            TamperLogOnChainAssertion(),
            BlockNotCanonicalAssertion(),
            StrandedTxMinedAssertion(),
            RecoveredWithinBlocksAssertion(),
            MajorityWinRateAssertion(),
            WinRateMonotoneAssertion(),
        ):
            self.register_assertion(assertion)

    def register_assertion(self, assertion: ScenarioAssertion) -> None:
        self.assertions[assertion.name] = assertion

    def get_assertion(self, name: str) -> Optional[ScenarioAssertion]:
        return self.assertions.get(name)

    def get_assertion_names(self) -> List[str]:
        return list(self.assertions.keys())

    def validate_spec(self, spec: AssertionSpec, source: str = "<scenario>") -> AssertionParams:
        """
        Check that an assertion exists and its parameters are valid.

        Raises:
            ConfigError: For an unknown type or bad parameters
        """
        assertion = self.get_assertion(spec.type)
        if assertion is None:
            raise ConfigError(source, f"unknown assertion type '{spec.type}'")
        try:
            return assertion.validate_params(spec.params)
        except PydanticValidationError as e:
            raise ConfigError(source, f"assertion '{spec.type}': {e.errors()[0]['msg']}") from e

    def evaluate(self, spec: AssertionSpec, outcome: ScenarioOutcome) -> AssertionResult:
        """Run one assertion; a check that cannot be evaluated counts as failed."""
        params = self.validate_spec(spec, outcome.config.name)
        assertion = self.assertions[spec.type]
        try:
            return assertion.check(outcome, params)
        except (KeyError, ValueError) as e:
            return AssertionResult(type=spec.type, passed=False, detail=f"cannot evaluate: {e}")


# Global assertion registry instance
assertion_registry = AssertionRegistry()
