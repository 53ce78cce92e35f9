"""Scenario loading, execution, assertions and artifacts."""

from .assertions import AssertionRegistry, ScenarioAssertion, assertion_registry
from .outcome import AssertionResult, ScenarioOutcome, Verdict
from .runner import RunOverrides, RunReport, ScenarioRunner, run_and_judge, run_scenario
from .scenarios import BUNDLED_SCENARIOS, list_scenarios, load_scenario, parse_scenario

__all__ = [
    "AssertionRegistry",
    "ScenarioAssertion",
    "assertion_registry",
    "AssertionResult",
    "ScenarioOutcome",
    "Verdict",
    "RunOverrides",
    "RunReport",
    "ScenarioRunner",
    "run_and_judge",
    "run_scenario",
    "BUNDLED_SCENARIOS",
    "list_scenarios",
    "load_scenario",
    "parse_scenario",
]
