"""Command-line entry point: ``phasegraph {simulate,solve,verify,report}``.

Run flags mirror the config keys (``--increment-window`` for
``increment_window`` and so on). ``--config FILE`` loads a key-value
document first, and flags given on the command line override its values.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import sys
import time

from ..recurrence import model_family, predicted_exponent, stationary_columns
from .config import KEYS, OUT_DIR_ENV, ConfigError, build_config, read_pairs
from .output import read_csv, write_json, write_simulation, write_solve_csv


def _add_run_flags(p: argparse.ArgumentParser, need_steps: bool = True) -> None:
    p.add_argument("--config", metavar="FILE", help="key = value configuration file")
    for key in KEYS:
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    p.add_argument("--edge-dump", action="store_true", help="write one edge list per replica (vertex backend)")
    p.add_argument("--method", choices=("bucketed", "bernoulli"), default="bucketed",
                   help="per-vertex attachment sampler (vertex backend)")


def _config(args, require_steps: bool = True):
    pairs = {}
    if args.config:
        with open(args.config) as fh:
            pairs = read_pairs(fh.read())
    for key in KEYS:
        v = getattr(args, key, None)
        if v is not None:
            pairs[key] = (str(v), None)
    if not require_steps and "steps" not in pairs:
        pairs["steps"] = ("1", None)
    return build_config(pairs, edge_dump=bool(getattr(args, "edge_dump", False)),
                        method=getattr(args, "method", "bucketed"))


def cmd_simulate(args) -> int:
    from .ensemble import run_ensemble

    cfg = _config(args)
    t0 = time.perf_counter()
    summary = run_ensemble(cfg, use_cache=False, workers=args.workers)
    paths = write_simulation(cfg.out_dir, summary, cfg.echo())
    write_json(os.path.join(cfg.out_dir, "timing.json"), {"wall_seconds": time.perf_counter() - t0})
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def cmd_solve(args) -> int:
    cfg = _config(args, require_steps=False)
    inc = None
    if args.increments:
        inc = read_csv(args.increments)["frequency"]
    cols = stationary_columns(cfg.model, cfg.params, args.k_max, inc)
    path = os.path.join(cfg.out_dir, "solve.csv")
    write_solve_csv(path, cols)
    fam = model_family(cfg.model, cfg.params)
    print(f"family: {fam}")
    print(f"predicted tail: {predicted_exponent(cfg.params, fam)}")
    print(f"solve: {path}")
    return 0


def cmd_verify(args) -> int:
    from .criteria import CRITERIA, verify

    numbers = None
    if args.criteria is not None:
        numbers = [int(x) for x in args.criteria.replace(",", " ").split()]
        bad = [n for n in numbers if n not in CRITERIA]
        if bad:
            raise ConfigError(f"unknown criteria {bad}")
    t0 = time.perf_counter()
    report, ok = verify(numbers, fresh=args.fresh)
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV, "out")
    write_json(os.path.join(out_dir, "report.json"), report)
    write_json(os.path.join(out_dir, "timing.json"), {"wall_seconds": time.perf_counter() - t0})
    for c in report["criteria"]:
        print(f"criterion {c['criterion']:2d} {'PASS' if c['pass'] else 'FAIL'}  {c['title']}")
    print(f"report: {os.path.join(out_dir, 'report.json')}")
    return 0 if ok else 1


def _markdown(entries) -> str:
    lines = ["# phasegraph report", ""]
    for name, data in entries:
        lines.append(f"## {name}")
        lines.append("")
        if "criteria" in data:
            lines += ["| criterion | result | title |", "|---|---|---|"]
            for c in data["criteria"]:
                lines.append(f"| {c['criterion']} | {'pass' if c['pass'] else 'FAIL'} | {c['title']} |")
        else:
            for k, v in data.items():
                if k != "config":
                    lines.append(f"- {k}: {v}")
            if "config" in data:
                lines.append(f"- config: `{json.dumps(data['config'], sort_keys=True)}`")
        lines.append("")
    return "\n".join(lines)


def cmd_report(args) -> int:
    files = []
    for item in args.inputs:
        if not os.path.exists(item):
            print(f"report: no such file or directory: {item}", file=sys.stderr)
            return 2
        if os.path.isdir(item):
            files += sorted(glob.glob(os.path.join(item, "*.json")))
        else:
            files.append(item)
    files = [f for f in files if os.path.basename(f) not in ("timing.json", "merged.json")]
    if not files:
        print("report: no JSON inputs found", file=sys.stderr)
        return 2
    entries = []
    for f in files:
        with open(f) as fh:
            entries.append((f, json.load(fh)))
    os.makedirs(args.out_dir, exist_ok=True)
    write_json(os.path.join(args.out_dir, "merged.json"), {name: data for name, data in entries})
    with open(os.path.join(args.out_dir, "merged.md"), "w") as fh:
        fh.write(_markdown(entries))
    print(f"report: {os.path.join(args.out_dir, 'merged.json')}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phasegraph", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one ensemble and write CSVs")
    _add_run_flags(p)
    p.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("solve", help="solve the stationary recurrences and write solve.csv")
    _add_run_flags(p)
    p.add_argument("--k-max", type=int, default=10_000)
    p.add_argument("--increments", metavar="CSV", help="increment CSV from simulate, for the plug-in column")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run the acceptance suite; nonzero exit if any criterion fails")
    p.add_argument("--criteria", default=None, help="comma-separated criterion numbers (default: all)")
    p.add_argument("--out-dir", dest="out_dir", default=None)
    p.add_argument("--fresh", action="store_true", help="ignore cached ensembles")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="merge earlier JSON outputs into one JSON and markdown summary")
    p.add_argument("inputs", nargs="+", help="output directories or JSON files")
    p.add_argument("--out-dir", dest="out_dir", default="report")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
