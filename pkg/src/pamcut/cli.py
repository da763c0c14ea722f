"""Command-line front end.

Verbs: fetch, solve, verify, encode, decode, trace. Engine flags carry
exactly the EngineConfig field names; a config file ('key = value' lines)
can set the same keys, with flags taking precedence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path


def _engine_flags(parser: argparse.ArgumentParser) -> None:
    from .engine import _CONFIG_FIELD_TYPES

    group = parser.add_argument_group("engine", "EngineConfig overrides")
    for name, typ in _CONFIG_FIELD_TYPES.items():
        group.add_argument(f"--{name}", type=typ, default=None, metavar=typ.__name__.upper())


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pamcut",
        description="Max-Cut via population annealing, plus G-set record verification.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("fetch", help="download (or reuse) a catalog instance")
    p.add_argument("name")
    p.add_argument("--cache-dir", default=None)

    p = sub.add_parser("solve", help="anneal an instance and persist the result")
    p.add_argument("instance", help="catalog name (e.g. G63) or path to a G-set file")
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--results", default="results.jsonl", help="append-only results file")
    p.add_argument("--diag", default=None, help="per-step JSON-lines diagnostics file")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--cache-dir", default=None)
    _engine_flags(p)

    p = sub.add_parser("verify", help="check a solution record against its instance")
    p.add_argument("--instance", default=None, help="catalog name (default: G63)")
    p.add_argument("--graph", default=None, help="local G-set file instead of a catalog fetch")
    p.add_argument("--hex", dest="hex_arg", default=None, help="hex string or file (default: embedded G63 record)")
    p.add_argument("--claimed-cut", type=int, default=None)
    p.add_argument("--cache-dir", default=None)

    p = sub.add_parser("encode", help="spin text (one +-1 per line) -> hex")
    p.add_argument("spins", help="path to spin file, or - for stdin")

    p = sub.add_parser("decode", help="hex -> spin text (one +-1 per line)")
    p.add_argument("hex", help="hex string or path to a file holding it")
    p.add_argument("--n", type=int, required=True, help="number of spins")
    p.add_argument("--out", default=None)

    p = sub.add_parser("trace", help="results file -> per-step columns for plotting")
    p.add_argument("results")
    p.add_argument("--out", default=None, help="output file (default: stdout)")

    return parser


def _read_maybe_file(arg: str) -> str:
    p = Path(arg)
    if p.exists():
        return p.read_text()
    return arg


def _cmd_fetch(args) -> int:
    from .catalog import fetch_instance

    path = fetch_instance(args.name, cache_dir=args.cache_dir)
    print(path)
    return 0


def _cmd_solve(args) -> int:
    from .catalog import load_instance
    from .engine import EngineConfig, anneal, config_from_text
    from .results import append_result, build_result_record

    cfg = EngineConfig()
    if args.config:
        cfg = config_from_text(Path(args.config).read_text(), base=cfg)
    from .engine import _CONFIG_FIELD_TYPES

    overrides = {
        name: getattr(args, name)
        for name in _CONFIG_FIELD_TYPES
        if getattr(args, name) is not None
    }
    cfg = replace(cfg, **overrides).validate()

    name, g = load_instance(args.instance, cache_dir=args.cache_dir)
    diag_fh = open(args.diag, "w", encoding="ascii") if args.diag else None
    try:
        result = anneal(g, cfg, workers=args.workers, diag=diag_fh)
    finally:
        if diag_fh:
            diag_fh.close()
    record = build_result_record(name, cfg, result)
    append_result(args.results, record)
    print(f"instance {name}: best cut {result.best_cut} "
          f"({result.steps} steps, {result.wall_time:.2f} s)")
    print(record["best_hex"])
    return 0


def _cmd_verify(args) -> int:
    from .codec import read_hex_token
    from .graph import parse_gset
    from .records import G63_RECORD, SolutionRecord, verify_record

    if args.graph:
        graph_text = Path(args.graph).read_text()
        g = parse_gset(graph_text)
        instance = Path(args.graph).stem
    else:
        from .catalog import fetch_instance

        instance = args.instance or "G63"
        path = fetch_instance(instance, cache_dir=args.cache_dir)
        g = parse_gset(path.read_text())

    if args.hex_arg is None and (args.instance in (None, "G63")) and not args.graph:
        rec = G63_RECORD
        if args.claimed_cut is not None:
            rec = SolutionRecord(rec.instance, rec.hex, args.claimed_cut, rec.source)
    else:
        if args.hex_arg is None:
            print("error: --hex is required unless verifying the embedded G63 record",
                  file=sys.stderr)
            return 2
        hex_text = read_hex_token(_read_maybe_file(args.hex_arg))
        if args.claimed_cut is None:
            print("error: --claimed-cut is required with --hex", file=sys.stderr)
            return 2
        rec = SolutionRecord(instance, hex_text, args.claimed_cut, source="cli")

    report = verify_record(rec, g, instance_name=instance)
    print(report.summary())
    return 0 if report.match else 1


def _cmd_encode(args) -> int:
    from .codec import encode_hex, spins_from_text

    text = sys.stdin.read() if args.spins == "-" else Path(args.spins).read_text()
    print(encode_hex(spins_from_text(text)))
    return 0


def _cmd_decode(args) -> int:
    from .codec import decode_hex, read_hex_token, spins_to_text

    spins = decode_hex(read_hex_token(_read_maybe_file(args.hex)), args.n)
    out = spins_to_text(spins)
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)
    return 0


def _cmd_trace(args) -> int:
    from .results import emit_trace, write_trace

    if args.out:
        write_trace(args.results, args.out)
    else:
        sys.stdout.write(emit_trace(args.results))
    return 0


_COMMANDS = {
    "fetch": _cmd_fetch,
    "solve": _cmd_solve,
    "verify": _cmd_verify,
    "encode": _cmd_encode,
    "decode": _cmd_decode,
    "trace": _cmd_trace,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except BrokenPipeError:
        return 0
    except Exception as exc:  # surfaced as a one-line error, not a traceback
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
