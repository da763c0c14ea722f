#!/usr/bin/env python3
"""Multi-seed solve of one instance; appends every run to a results file.

Example:
    python scripts/solve_instance.py G14 --seeds 4 --population_size 1024 \
        --results runs.jsonl --workers 4
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from pamcut.catalog import load_instance
from pamcut.engine import _CONFIG_FIELD_TYPES, EngineConfig, anneal, config_from_text
from pamcut.results import append_result, build_result_record


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("instance", help="catalog name or G-set file path")
    parser.add_argument("--config", default=None, help="key = value config file")
    parser.add_argument("--seeds", type=int, default=1, help="run seeds 0..N-1 offset by --seed")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--results", default="results.jsonl")
    parser.add_argument("--cache-dir", default=None)
    for name, typ in _CONFIG_FIELD_TYPES.items():
        parser.add_argument(f"--{name}", type=typ, default=None)
    return parser.parse_args()


def main():
    args = parse_args()
    base = EngineConfig()
    if args.config:
        base = config_from_text(Path(args.config).read_text(), base=base)
    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FIELD_TYPES
        if getattr(args, name) is not None
    }
    base = replace(base, **overrides).validate()

    name, g = load_instance(args.instance, cache_dir=args.cache_dir)
    print(f"{name}: n={g.n} m={g.m} W={g.total_weight}")

    best = None
    for offset in range(args.seeds):
        cfg = replace(base, seed=base.seed + offset)
        result = anneal(g, cfg, workers=args.workers)
        append_result(args.results, build_result_record(name, cfg, result))
        print(
            f"seed {cfg.seed}: cut {result.best_cut}  "
            f"steps {result.steps}  sweeps {result.total_sweeps}  "
            f"{result.wall_time:.1f}s"
        )
        if best is None or result.best_cut > best:
            best = result.best_cut
    print(f"best over {args.seeds} seed(s): {best}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
