"""
Run artifacts: event log, chain summaries, tamper-log dump, verdict and
golden-log comparison.

Every file is a deterministic function of (scenario, seed): JSON is written
with sorted keys and carries no wall-clock data.
"""

import difflib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

import structlog

from src.models.data_models import TamperLog
from src.services.state import read_tamper_logs
from src.simulation import EVENT_LOG_VERSION, EventLog, NetworkSimulator

from .outcome import ScenarioOutcome, Verdict

logger = structlog.get_logger(__name__)

GOLDEN_DIR = Path(__file__).parent.parent.parent / "tests" / "fixtures" / "golden"


def _write_json(path: Path, data: Any) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _log_dict(log: TamperLog) -> Dict[str, Any]:
    return {
        "detecting_node": log.detecting_node,
        "block": log.block_hash.hex(),
        "field": log.field,
        "old": log.old_value.decode("utf-8", "replace"),
        "new": log.new_value.decode("utf-8", "replace"),
        "detected_at": log.detected_at,
    }


def chain_summaries(sim: NetworkSimulator) -> Dict[str, Dict[str, Any]]:
    """Final head, canonical chain and peer view of every node"""
    summaries: Dict[str, Dict[str, Any]] = {}
    for node in sim.nodes.values():
        head, td, height = node.store.status()
        summary: Dict[str, Any] = {
            "role": node.role.value,
            "head": head.hex(),
            "height": height,
            "td": td,
            "canonical": [node.store.canonical[h].hex() for h in sorted(node.store.canonical)],
            "peers": {p.peer_id: p.status.value for p in node.peers.values()},
            "stranded": [h.hex() for h in node.stranded],
        }
        if not node.is_light:
            summary["compromised"] = node.chain.compromised
            summary["orphans"] = [h.hex() for h in node.chain.orphans]
            summary["tx_pool"] = len(node.tx_pool)
        summaries[node.id] = summary
    return summaries


def tamper_log_dump(sim: NetworkSimulator) -> Dict[str, Any]:
    """Tamper receipts plus, per full node, on-chain and still-pending tamper logs"""
    nodes = {
        node.id: {
            "on_chain": [_log_dict(log) for log in read_tamper_logs(node.chain.canonical_state())],
            "pending": [_log_dict(log) for log in node.uploader.pending.values()],
            "uploaded": [digest.hex() for digest in node.uploader.uploaded],
        }
        for node in sim.full_nodes()
    }
    return {
        "receipts": [r.summary() for r in sim.tamper_receipts],
        "light_receipts": [r.summary() for r in sim.light_receipts],
        "nodes": nodes,
    }


def verdict_dict(outcome: ScenarioOutcome, verdict: Verdict) -> Dict[str, Any]:
    return {
        "event_log_version": EVENT_LOG_VERSION,
        "scenario": verdict.scenario,
        "seed": verdict.seed,
        "until": outcome.until,
        "passed": verdict.passed,
        "assertions": [r.model_dump() for r in verdict.results],
    }


def write_artifacts(
    outcome: ScenarioOutcome, verdict: Verdict, out_dir: Path, dump_chain_db: bool = False
) -> List[Path]:
    """
    Write the run's artifacts into out_dir.

    Args:
        outcome: Finished run
        verdict: Its evaluated assertions
        out_dir: Created when missing
        dump_chain_db: Also write every full node's chain database

    Returns:
        Paths written
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []

    events_path = out_dir / "events.jsonl"
    outcome.log.write(events_path)
    written.append(events_path)

    if outcome.simulator is not None:
        sim = outcome.simulator
        chains_path = out_dir / "chains.json"
        _write_json(chains_path, chain_summaries(sim))
        logs_path = out_dir / "tamper_logs.json"
        _write_json(logs_path, tamper_log_dump(sim))
        written += [chains_path, logs_path]

        if dump_chain_db:
            db_dir = out_dir / "chaindb"
            db_dir.mkdir(exist_ok=True)
            for node in sim.full_nodes():
                path = db_dir / f"{node.id}.json"
                node.chain.dump(path)
                written.append(path)

    if outcome.sweep is not None:
        sweep_path = out_dir / "sweep.csv"
        outcome.sweep.to_csv(sweep_path, index=False, float_format="%.6f")
        written.append(sweep_path)

    verdict_path = out_dir / "verdict.json"
    _write_json(verdict_path, verdict_dict(outcome, verdict))
    written.append(verdict_path)

    logger.info("Artifacts written", out_dir=str(out_dir), files=len(written))
    return written


def golden_path(scenario: str, golden_dir: Optional[Path] = None) -> Path:
    return (golden_dir or GOLDEN_DIR) / f"{scenario}.jsonl"


def write_golden(log: EventLog, scenario: str, golden_dir: Optional[Path] = None) -> Path:
    path = golden_path(scenario, golden_dir)
    path.parent.mkdir(parents=True, exist_ok=True)
    log.write(path)
    logger.info("Golden log written", scenario=scenario, path=str(path), events=len(log))
    return path


def compare_golden(log: EventLog, scenario: str, golden_dir: Optional[Path] = None) -> Optional[str]:
    """
    Compare an event log with the stored golden log.

    Returns:
        None when identical (or no golden log exists), else a short diff
    """
    path = golden_path(scenario, golden_dir)
    if not path.exists():
        return None
    expected = path.read_text(encoding="utf-8").splitlines()
    actual = log.to_jsonl().splitlines()
    if expected == actual:
        return None
    diff = difflib.unified_diff(expected, actual, fromfile=str(path), tofile="run", lineterm="", n=0)
    return "\n".join(list(diff)[:20])
