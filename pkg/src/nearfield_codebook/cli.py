"""Command-line entry point: ``nfcb <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .hierarchy import HierarchyConfig, build_hierarchy
from .patterns import PATTERNS
from .sim import SimConfig, emit_report, proposed_codebook, run_gain_experiment, run_search_experiment

log = logging.getLogger("nearfield_codebook")


def _load_config(args) -> SimConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise ValueError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"config {args.config} must hold a JSON object")
        data.pop("r_min", None)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.nu is not None:
        data["n_u"] = args.nu
    if args.rmax is not None:
        data["r_max"] = args.rmax
    return SimConfig.from_dict(data)


def _summary(obj: dict) -> None:
    print(json.dumps(obj, sort_keys=True))


def cmd_build_lower(args) -> None:
    sim = _load_config(args)
    lower = proposed_codebook(sim)
    out = Path(args.out or "lower.npz")
    if args.format == "csv":
        io.export_lower_csv(lower, out)
    else:
        io.save_lower(lower, out)
    _summary({"n_theta": lower.params.n_theta, "n_r": lower.params.n_r, "size": lower.size,
              "min_gain": lower.min_gain(), "out": str(out)})


def cmd_build_hierarchy(args) -> None:
    sim = _load_config(args)
    lower = io.load_lower(args.lower) if args.lower else proposed_codebook(sim)
    hier = build_hierarchy(sim.array, HierarchyConfig(n_lv=sim.n_lv, pattern=args.pattern), lower)
    out = Path(args.out or f"hierarchy_{args.pattern}.npz")
    if args.format == "csv":
        io.export_hierarchy_csv(hier, out)
    else:
        io.save_hierarchy(hier, out)
    _summary({"pattern": args.pattern, "level_sizes": hier.level_sizes(), "out": str(out)})


def _run_experiment(args, runner, default_name) -> None:
    sim = _load_config(args)
    report = runner(sim, workers=args.workers)
    fmt = args.format if args.format in ("csv", "json") else "json"
    out = Path(args.out or f"{default_name}.{fmt}")
    emit_report(report, fmt, out)
    log.info("%s finished in %.1f s", default_name, report.elapsed)
    print(str(out))


def cmd_gain_exp(args) -> None:
    _run_experiment(args, run_gain_experiment, "gain_report")


def cmd_search_exp(args) -> None:
    _run_experiment(args, run_search_experiment, "search_report")


def cmd_export_codebook(args) -> None:
    if not args.input:
        raise ValueError("export-codebook needs --input <container.npz>")
    try:
        hier = io.load_hierarchy(args.input)
    except OSError:
        hier = None
    out = Path(args.out or Path(args.input).with_suffix(".csv").name)
    if hier is not None:
        paths = io.export_hierarchy_csv(hier, out)
        print("\n".join(str(p) for p in paths))
    else:
        io.export_lower_csv(io.load_lower(args.input), out)
        print(str(out))


COMMANDS = {
    "build-lower": cmd_build_lower,
    "build-hierarchy": cmd_build_hierarchy,
    "gain-exp": cmd_gain_exp,
    "search-exp": cmd_search_exp,
    "export-codebook": cmd_export_codebook,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nfcb", description="Near-field hierarchical codebook simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with SimConfig fields")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json", "npz"),
                       help="reports: csv|json (default json); codebooks: npz|csv (default npz)")
        p.add_argument("--pattern", choices=sorted(PATTERNS), default="deact")
        p.add_argument("--nu", type=int, help="number of users")
        p.add_argument("--rmax", type=float, help="largest user distance in metres")
        p.add_argument("--workers", type=int, default=1)
        if name == "build-hierarchy":
            p.add_argument("--lower", help="lower codebook container to build on")
        if name == "export-codebook":
            p.add_argument("--input", help="codebook container (.npz)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ValueError, OSError, KeyError, RuntimeError) as exc:
        print(f"nfcb {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
