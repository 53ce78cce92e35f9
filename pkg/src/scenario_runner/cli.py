"""
Command-line entry point.

    tamperproof-iot --config demo-recovery
    tamperproof-iot --config config/scenarios/s1-high.yaml --seed 7 --out runs/s1
    tamperproof-iot --config s3-light --seeds 1..20

Exit codes: 0 all assertions hold, 1 an assertion failed, 2 the scenario
could not be loaded.
"""

import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import click
import pandas as pd
import structlog

from src.core.config import get_settings
from src.core.logging_config import configure_logging
from src.models.exceptions import ConfigError

from .runner import RunOverrides, run_scenario
from .scenarios import list_scenarios

logger = structlog.get_logger(__name__)

EXIT_PASS = 0
EXIT_ASSERTION_FAILED = 1
EXIT_CONFIG_ERROR = 2


def parse_seed_range(value: str) -> Tuple[int, int]:
    """Parse "A..B" (inclusive) into (A, B)."""
    try:
        low, high = (int(part) for part in value.split("..", 1))
    except ValueError:
        raise click.BadParameter(f"expected A..B, got '{value}'") from None
    if low < 0 or high < low:
        raise click.BadParameter(f"empty or negative seed range '{value}'")
    return low, high


def _run_one_seed(job: Dict[str, Any]) -> Dict[str, Any]:
    """Process-pool worker: one isolated simulation"""
    try:
        report = run_scenario(
            job["config"],
            RunOverrides(seed=job["seed"], until=job["until"]),
            Path(job["out"]),
            check=job["check"],
        )
    except ConfigError as e:
        return {"seed": job["seed"], "passed": False, "exit_code": EXIT_CONFIG_ERROR, "failed": str(e)}
    return {
        "seed": job["seed"],
        "passed": report.verdict.passed,
        "exit_code": report.exit_code,
        "failed": ",".join(report.verdict.failed),
    }


def run_seed_sweep(
    config_ref: str, seeds: Tuple[int, int], until: Optional[int], out_dir: Path, check: bool
) -> pd.DataFrame:
    """Run one scenario for every seed in the range, in a process pool."""
    jobs = [
        {"config": config_ref, "seed": seed, "until": until, "out": str(out_dir / f"seed-{seed}"), "check": check}
        for seed in range(seeds[0], seeds[1] + 1)
    ]
    workers = get_settings().simulation.sweep_workers
    with ProcessPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(_run_one_seed, jobs))
    summary = pd.DataFrame(rows, columns=["seed", "passed", "exit_code", "failed"]).sort_values("seed")
    out_dir.mkdir(parents=True, exist_ok=True)
    summary.to_csv(out_dir / "seed_summary.csv", index=False)
    return summary


@click.command()
@click.option("--config", "config_ref", help="Scenario file or bundled scenario name.")
@click.option("--seed", type=int, default=None, help="Override the scenario seed.")
@click.option("--until", type=int, default=None, help="Override the horizon (ms of simulation time).")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="Artifact directory.")
@click.option("--assert/--no-assert", "check", default=True, help="Fail the run when an assertion fails.")
@click.option("--seeds", "seed_range", default=None, help="Sweep seeds A..B, each run isolated.")
@click.option("--write-golden", is_flag=True, help="Store the event log as the scenario's golden log.")
@click.option("--chain-db", is_flag=True, help="Also dump every full node's chain database.")
@click.option("--list", "list_only", is_flag=True, help="List bundled scenarios and exit.")
@click.option("--log-level", default=None, help="Override the diagnostic log level.")
def main(
    config_ref: Optional[str],
    seed: Optional[int],
    until: Optional[int],
    out_dir: Optional[Path],
    check: bool,
    seed_range: Optional[str],
    write_golden: bool,
    chain_db: bool,
    list_only: bool,
    log_level: Optional[str],
) -> None:
    """Run a tamper-resistance scenario and write its event log and verdict."""
    settings = get_settings()
    logging_config = settings.logging
    if log_level:
        logging_config = logging_config.model_copy(update={"level": log_level.upper()})
    configure_logging(logging_config)

    if list_only:
        for name in list_scenarios():
            click.echo(name)
        sys.exit(EXIT_PASS)
    if not config_ref:
        click.echo("error: --config is required", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    if seed_range is not None:
        seeds = parse_seed_range(seed_range)
        summary = run_seed_sweep(config_ref, seeds, until, out_dir or settings.simulation.output_dir / "sweep", check)
        click.echo(summary.to_string(index=False))
        if (summary["exit_code"] == EXIT_CONFIG_ERROR).any():
            sys.exit(EXIT_CONFIG_ERROR)
        sys.exit(int(summary["exit_code"].max()))

    try:
        report = run_scenario(
            config_ref,
            RunOverrides(seed=seed, until=until),
            out_dir,
            check=check,
            write_golden_log=write_golden,
            dump_chain_db=chain_db,
        )
    except ConfigError as e:
        logger.error("Scenario configuration error", source=e.source, detail=e.detail)
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_CONFIG_ERROR)

    for result in report.verdict.results:
        click.echo(f"{'PASS' if result.passed else 'FAIL'}  {result.type}: {result.detail}")
    if report.golden_diff is not None:
        click.echo(f"FAIL  golden log: {report.golden_diff}")
    click.echo(f"{report.verdict.scenario} seed={report.verdict.seed}: {'PASS' if report.verdict.passed else 'FAIL'}")
    sys.exit(report.exit_code)


if __name__ == "__main__":
    main()
