"""Command line driver for the benchmark runner.

Subcommands widen the scope of one experiment config:

* ``fom``      full-order run only
* ``rom``      full-order run plus the energy-preserving reduced runs
* ``compare``  everything the config's ``methods`` list asks for
* ``all``      ``compare`` plus generated plot scripts

Exit codes: 0 on success, 2 on a config problem, 3 when any solver run
failed (a singular step matrix, either in the full model or recorded as a
failed reduced run).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiments import emit_plot_scripts, load_config, run_experiment
from .linalg import SingularSystemError

_EXIT_CONFIG = 2
_EXIT_SOLVER = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ligep",
        description="Energy-preserving model reduction benchmarks for "
                    "wave, KdV and Camassa-Holm equations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, doc in (("fom", "run the full-order model only"),
                      ("rom", "run the full model and the energy-preserving "
                              "reduced models"),
                      ("compare", "run the full model and every configured "
                                  "reduced method"),
                      ("all", "compare, then write plot scripts")):
        cmd = sub.add_parser(name, help=doc)
        cmd.add_argument("--config", required=True, metavar="PATH",
                         help="experiment config file (flat key = value text)")
        cmd.add_argument("--out", metavar="DIR", default=None,
                         help="artifact directory (overrides output_dir)")
        cmd.add_argument("--ranks", metavar="CSV-LIST", default=None,
                         help="comma-separated rank list (overrides the config)")
        cmd.add_argument("--quiet", action="store_true",
                         help="suppress per-run progress lines")
    return parser


def _parse_ranks(text: str) -> tuple[int, ...]:
    try:
        ranks = tuple(int(tok) for tok in text.replace(",", " ").split())
    except ValueError as exc:
        raise ValueError(f"bad --ranks value {text!r}: {exc}") from exc
    if not ranks:
        raise ValueError("--ranks must list at least one rank")
    return ranks


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        overrides = {}
        if args.ranks is not None:
            overrides["ranks"] = _parse_ranks(args.ranks)
        if args.command == "fom":
            overrides["methods"] = ()
        elif args.command == "rom":
            overrides["methods"] = ("ligep-rom",)
        if overrides:
            config = replace(config, **overrides)
    except (OSError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG

    try:
        out_dir, manifest = run_experiment(config, out_dir=args.out,
                                           quiet=args.quiet)
    except SingularSystemError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return _EXIT_SOLVER

    failed = [run["name"] for run in manifest["runs"] if run["status"] != "ok"]
    if args.command == "all":
        scripts = emit_plot_scripts(out_dir)
        if not args.quiet:
            for path in scripts:
                print(f"wrote {path}", flush=True)
    if failed:
        print(f"solver failure in runs: {', '.join(failed)} "
              f"(see manifest.json)", file=sys.stderr)
        return _EXIT_SOLVER
    if not args.quiet:
        print(f"artifact complete in {out_dir}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
