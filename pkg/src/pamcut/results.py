"""Append-only run persistence and trace extraction.

Results live in a JSON-lines file: one self-describing record per
completed run, including everything needed to re-verify the claimed cut
(instance, hex of the best configuration) and to re-plot the schedule
(per-step trajectories).
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Iterator

from .engine import EngineConfig, RunResult


class ResultsError(Exception):
    pass


def build_result_record(instance: str, cfg: EngineConfig, result: RunResult) -> dict:
    sig = result.signature()
    return {
        "instance": instance,
        "seed": cfg.seed,
        "config": {
            "population_size": cfg.population_size,
            "sweeps_per_step": cfg.sweeps_per_step,
            "target_ess_ratio": cfg.target_ess_ratio,
            "beta_start": cfg.beta_start,
            "beta_end": cfg.beta_end,
            "max_steps": cfg.max_steps,
            "kick_period": cfg.kick_period,
            "kick_fraction": cfg.kick_fraction,
            "acceptance_floor": cfg.acceptance_floor,
            "seed": cfg.seed,
            "patience": cfg.patience,
            "min_delta_beta": cfg.min_delta_beta,
        },
        "best_cut": sig["best_cut"],
        "best_hex": sig["best_hex"],
        "wall_time": result.wall_time,
        "total_sweeps": sig["total_sweeps"],
        "steps": sig["steps"],
        "ess_ratio": [e / cfg.population_size for e in sig["ess"]],
        "beta": sig["beta"],
        "acceptance": sig["acceptance"],
        "best_cut_steps": sig["best_cut_steps"],
        "log_mean_weight_sum": sig["log_mean_weight_sum"],
    }


def append_result(path: str | os.PathLike, record: dict) -> None:
    with open(path, "a", encoding="ascii") as fh:
        fh.write(json.dumps(record) + "\n")


def iter_results(path: str | os.PathLike) -> Iterator[dict]:
    p = Path(path)
    if not p.exists():
        raise ResultsError(f"results file not found: {p}")
    with open(p, encoding="ascii") as fh:
        count = 0
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise ResultsError(f"{p}:{lineno}: malformed record: {exc}") from exc
            count += 1
        if count == 0:
            raise ResultsError(f"results file is empty: {p}")


_TRACE_COLUMNS = ("step", "beta", "ess_ratio", "best_cut", "acceptance")


def emit_trace(results_path: str | os.PathLike) -> str:
    """Columnar (tab-separated) per-step traces, one block per run record,
    blocks separated by a blank line."""
    blocks = []
    for record in iter_results(results_path):
        try:
            beta = record["beta"]
            ess_ratio = record["ess_ratio"]
            best_cut = record["best_cut_steps"]
            acceptance = record["acceptance"]
        except KeyError as exc:
            raise ResultsError(f"record missing field {exc}") from exc
        lines = ["\t".join(_TRACE_COLUMNS)]
        for i in range(len(beta)):
            lines.append(
                f"{i + 1}\t{beta[i]:.9g}\t{ess_ratio[i]:.9g}"
                f"\t{best_cut[i]}\t{acceptance[i]:.9g}"
            )
        blocks.append("\n".join(lines) + "\n")
    return "\n".join(blocks)


def write_trace(results_path: str | os.PathLike, out_path: str | os.PathLike) -> None:
    text = emit_trace(results_path)
    with open(out_path, "w", encoding="ascii") as fh:
        fh.write(text)
