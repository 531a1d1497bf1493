"""Command-line entry point ``kkwave``.

Exit codes: 0 success, 2 configuration error, 3 convergence failure,
4 domain-guard abort.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import float_list, load, parse_overrides
from .errors import KKWaveError

EXIT_OK = 0
EXIT_CONFIG = 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kkwave", description=(
        "Wave-packet scattering from static potentials under time-dependent forces."))
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("scenario", help="run a named reproduction scenario")
    s.add_argument("name", choices=["fig1", "fig3", "fig4", "averaging", "appendixB"])
    s.add_argument("--out", default=None, help="output directory")
    s.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config key (repeatable)")

    r = sub.add_parser("run", help="run a configuration file")
    r.add_argument("config")
    r.add_argument("--out", default=None)

    w = sub.add_parser("sweep", help="dt / n convergence sweep of a configuration")
    w.add_argument("config")
    w.add_argument("--dt-factors", nargs="+", default=["1", "0.5", "0.25"])
    w.add_argument("--n-factors", nargs="+", default=["1"])
    w.add_argument("--out", default=None)
    return ap


def _factors(items) -> list:
    out = []
    for it in items:
        out.extend(float_list(it))
    return out


def _print_summary(summary: dict) -> None:
    for k, v in summary.items():
        print(f"{k} = {v}")


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.command == "scenario":
            from .scenarios import run_scenario
            _print_summary(run_scenario(args.name, parse_overrides(args.overrides), args.out))
        elif args.command == "run":
            from .runner import run_config
            cfg = load(args.config)
            _print_summary(run_config(cfg, args.out))
        else:
            from .runner import convergence_sweep
            cfg = load(args.config)
            rows = convergence_sweep(cfg, _factors(args.dt_factors), _factors(args.n_factors),
                                     args.out or cfg["output.dir"])
            print("dt,n,dx,error,resolved,order")
            for r in rows:
                print(",".join("" if v is None else f"{v:.6g}" if isinstance(v, float)
                               else str(v) for v in r))
    except KKWaveError as exc:
        print(f"kkwave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
