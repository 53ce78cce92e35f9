"""
Scenario execution: build the world, inject the schedule, run, judge.
"""

from pathlib import Path
from typing import List, Optional, Tuple, Union

import structlog
from pydantic import BaseModel

from src.core.config import get_settings
from src.models.exceptions import ConfigError
from src.models.input_models import ScenarioConfig
from src.services.iot import scheduled_readings
from src.services.tamper import majority_attack_sweep
from src.simulation import EventLog, NetworkSimulator

from .artifacts import compare_golden, write_artifacts, write_golden
from .assertions import AssertionRegistry, assertion_registry
from .outcome import AssertionResult, ScenarioOutcome, Verdict
from .scenarios import load_scenario

logger = structlog.get_logger(__name__)


class RunOverrides(BaseModel):
    """Command-line overrides of a scenario file"""

    seed: Optional[int] = None
    until: Optional[int] = None


class ScenarioRunner:
    """
    Runs one scenario with one seed.

    Args:
        config: Validated scenario
        base_dir: Directory relative fixture paths resolve against
        overrides: Seed / horizon replacements
        registry: Assertion registry (the global one by default)
    """

    def __init__(
        self,
        config: ScenarioConfig,
        base_dir: Optional[Path] = None,
        overrides: Optional[RunOverrides] = None,
        registry: AssertionRegistry = assertion_registry,
    ):
        overrides = overrides or RunOverrides()
        self.config = config
        self.base_dir = base_dir
        self.seed = config.seed if overrides.seed is None else overrides.seed
        self.until = config.horizon_ms if overrides.until is None else overrides.until
        self.registry = registry
        self.logger = structlog.get_logger(__name__).bind(scenario=config.name, seed=self.seed)

        for spec in config.assertions:
            registry.validate_spec(spec, config.name)

    def build(self) -> NetworkSimulator:
        """
        Create the simulator and schedule every reading and attack.

        Raises:
            ConfigError: If a reading fixture cannot be read
        """
        config = self.config
        sim = NetworkSimulator(config.consensus, config.network, config.nodes, self.seed)
        readings = 0
        for device in config.devices:
            for reading in scheduled_readings(device, self.base_dir):
                if reading.reading_time * 1000 <= self.until:
                    sim.schedule_reading(device, reading)
                    readings += 1
        for action in config.tampers:
            sim.schedule_tamper(action)
        for light_action in config.light_tampers:
            sim.schedule_light_tamper(light_action)
        for fetch in config.light_fetches:
            sim.schedule_light_fetch(fetch)
        self.logger.debug(
            "Simulation scheduled",
            readings=readings,
            tampers=len(config.tampers),
            light_tampers=len(config.light_tampers),
        )
        return sim

    def run(self) -> ScenarioOutcome:
        if self.config.kind == "majority_attack":
            return self._run_majority_attack()
        sim = self.build()
        log = sim.run(self.until)
        return ScenarioOutcome(self.config, self.seed, self.until, log, simulator=sim)

    def _run_majority_attack(self) -> ScenarioOutcome:
        spec = self.config.majority_attack
        assert spec is not None
        sweep = majority_attack_sweep(self.config.consensus, spec, self.seed)
        log = EventLog()
        for row in sweep.itertuples(index=False):
            log.append(
                0,
                "attacker",
                "MajorityRaceSummary",
                {
                    "power": float(row.power),
                    "runs": int(row.runs),
                    "wins": int(row.wins),
                    "win_rate": float(row.win_rate),
                    "mean_td_gap": float(row.mean_td_gap),
                },
            )
        return ScenarioOutcome(self.config, self.seed, self.until, log, sweep=sweep)

    def evaluate(self, outcome: ScenarioOutcome) -> Verdict:
        results: List[AssertionResult] = [self.registry.evaluate(spec, outcome) for spec in self.config.assertions]
        verdict = Verdict.from_results(self.config.name, self.seed, results)
        for result in results:
            log = self.logger.info if result.passed else self.logger.warning
            log("Assertion evaluated", assertion=result.type, passed=result.passed, detail=result.detail)
        return verdict


def run_and_judge(
    config: ScenarioConfig, base_dir: Optional[Path] = None, overrides: Optional[RunOverrides] = None
) -> Tuple[ScenarioOutcome, Verdict]:
    """
    Run a scenario and evaluate its assertions.

    Raises:
        ConfigError: If the scenario cannot be built
    """
    runner = ScenarioRunner(config, base_dir, overrides)
    try:
        outcome = runner.run()
    except (KeyError, ValueError) as e:
        raise ConfigError(config.name, f"cannot build simulation: {e}") from e
    return outcome, runner.evaluate(outcome)


class RunReport(BaseModel):
    """Exit status and artifacts of one scenario invocation"""

    exit_code: int
    verdict: Verdict
    artifacts: List[Path] = []
    golden_diff: Optional[str] = None


def run_scenario(
    config_ref: Union[str, Path],
    overrides: Optional[RunOverrides] = None,
    out_dir: Optional[Path] = None,
    check: bool = True,
    write_golden_log: bool = False,
    dump_chain_db: bool = False,
    golden_dir: Optional[Path] = None,
) -> RunReport:
    """
    Load, run and judge one scenario and write its artifacts.

    Args:
        config_ref: Scenario file path or bundled scenario name
        overrides: Seed / horizon replacements
        out_dir: Artifact directory (settings output_dir/<scenario>-<seed> by default)
        check: When False the verdict is still written but never fails the run
        write_golden_log: Store the event log as the scenario's golden log
        dump_chain_db: Also write each full node's chain database
        golden_dir: Golden log directory (tests/fixtures/golden by default)

    Returns:
        Report with exit code 0 (pass) or 1 (assertion failure or a
        differing golden log)

    Raises:
        ConfigError: If the scenario cannot be loaded or built
    """
    config, base_dir = load_scenario(config_ref)
    outcome, verdict = run_and_judge(config, base_dir, overrides)

    if out_dir is None:
        out_dir = get_settings().simulation.output_dir / f"{config.name}-{verdict.seed}"
    artifacts = write_artifacts(outcome, verdict, out_dir, dump_chain_db=dump_chain_db)

    golden_diff = None
    if write_golden_log:
        artifacts.append(write_golden(outcome.log, config.name, golden_dir))
    elif verdict.seed == config.seed and outcome.until == config.horizon_ms:
        golden_diff = compare_golden(outcome.log, config.name, golden_dir)
        if golden_diff is not None:
            logger.warning("Event log differs from golden log", scenario=config.name, diff=golden_diff)

    passed = verdict.passed and golden_diff is None
    exit_code = 0 if passed or not check else 1
    logger.info(
        "Scenario finished",
        scenario=config.name,
        seed=verdict.seed,
        passed=verdict.passed,
        failed=verdict.failed,
        golden_matches=golden_diff is None,
        exit_code=exit_code,
    )
    return RunReport(exit_code=exit_code, verdict=verdict, artifacts=artifacts, golden_diff=golden_diff)
