"""
What a finished run hands to assertions and artifact writers.
"""

from typing import Dict, List, Optional, Set

import pandas as pd
from pydantic import BaseModel, Field

from src.models.input_models import ScenarioConfig
from src.services.chain import ChainStore
from src.simulation import EventLog, NetworkSimulator


class AssertionResult(BaseModel):
    """Outcome of one scenario assertion"""

    type: str
    passed: bool
    detail: str = ""


class Verdict(BaseModel):
    """Pass/fail verdict of a scenario run"""

    scenario: str
    seed: int
    passed: bool
    results: List[AssertionResult] = Field(default_factory=list)

    @property
    def failed(self) -> List[str]:
        return [r.type for r in self.results if not r.passed]

    @classmethod
    def from_results(cls, scenario: str, seed: int, results: List[AssertionResult]) -> "Verdict":
        return cls(scenario=scenario, seed=seed, passed=all(r.passed for r in results), results=results)


class ScenarioOutcome:
    """
    State of a completed scenario run.

    Network scenarios carry the simulator; majority-attack scenarios carry
    the sweep table instead.
    """

    def __init__(
        self,
        config: ScenarioConfig,
        seed: int,
        until: int,
        log: EventLog,
        simulator: Optional[NetworkSimulator] = None,
        sweep: Optional[pd.DataFrame] = None,
    ):
        self.config = config
        self.seed = seed
        self.until = until
        self.log = log
        self.simulator = simulator
        self.sweep = sweep

    def require_simulator(self) -> NetworkSimulator:
        if self.simulator is None:
            raise ValueError(f"scenario '{self.config.name}' has no network run")
        return self.simulator

    def require_sweep(self) -> pd.DataFrame:
        if self.sweep is None:
            raise ValueError(f"scenario '{self.config.name}' has no majority-attack sweep")
        return self.sweep

    @property
    def full_stores(self) -> Dict[str, ChainStore]:
        sim = self.require_simulator()
        return {n.id: n.chain for n in sim.full_nodes()}

    @property
    def tampered_nodes(self) -> Set[str]:
        """Nodes whose storage was edited during the run"""
        sim = self.require_simulator()
        return {r.node_id for r in sim.tamper_receipts} | {r.node_id for r in sim.light_receipts}

    @property
    def honest_full_nodes(self) -> List[str]:
        tampered = self.tampered_nodes
        return [node_id for node_id in self.full_stores if node_id not in tampered]

    def select_full_nodes(self, selector: object) -> List[str]:
        """
        Resolve a node selector: "all" (every full node), "honest" (full
        nodes nobody tampered with) or an explicit list of ids.
        """
        if selector in (None, "all"):
            return list(self.full_stores)
        if selector == "honest":
            return self.honest_full_nodes
        if isinstance(selector, list):
            unknown = [n for n in selector if n not in self.full_stores]
            if unknown:
                raise ValueError(f"unknown or light nodes in selector: {unknown}")
            return [str(n) for n in selector]
        raise ValueError(f"invalid node selector {selector!r}")
