"""Command line front end.

    metaimpedance sweep <config> [--out-dir D] [--threads N] [--no-svg] [--dump-operators] [--no-timestamp]
    metaimpedance optimize <config> [--out-dir D] [--threads N] [--no-svg] [--no-timestamp]
    metaimpedance verify [--fast] [--nodes N]

Exit codes: 0 success, 1 validation error, 2 numerical failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import logging
import sys

import numpy as np

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

log = logging.getLogger("metaimpedance")


def _parser():
    p = argparse.ArgumentParser(prog="metaimpedance",
                                description="Effective impedance of plasmonic particle layers on a plate.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="YAML config file")
        sp.add_argument("--out-dir", default="out", help="output directory (default: out)")
        sp.add_argument("--threads", type=int, default=None, help="worker threads (overrides config)")
        sp.add_argument("--no-svg", action="store_true", help="skip SVG plots")
        sp.add_argument("--no-timestamp", action="store_true",
                        help="omit the 'generated' comment line so outputs are byte-reproducible")

    sw = sub.add_parser("sweep", help="wavelength sweep of |alpha_inf|")
    common(sw)
    sw.add_argument("--dump-operators", action="store_true",
                    help="also write S, K*, nodes and eigenvalues as CSV")
    op = sub.add_parser("optimize", help="gradient ascent of J = |alpha_inf|^2 / 2")
    common(op)
    ve = sub.add_parser("verify", help="run the invariant self-check suite")
    ve.add_argument("--fast", action="store_true", help="coarser sweeps, one FD direction")
    ve.add_argument("--nodes", type=int, default=128, help="boundary nodes of the reference disk")
    return p


def _timestamp(args):
    if args.no_timestamp:
        return None
    return _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    from .config import ConfigError, load_config
    from .geometry import GeometryError
    from .impedance import NearSingularError
    from .operators import UnderResolvedError

    if args.command == "verify":
        from .verify import run_verify

        if args.nodes < 4 or args.nodes % 2:
            print("error: --nodes must be an even integer >= 4", file=sys.stderr)
            return EXIT_VALIDATION
        results = run_verify(fast=args.fast, n_nodes=args.nodes)
        return EXIT_VERIFY if any(r.status == "FAIL" for r in results) else EXIT_OK

    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        cfg = load_config(args.config)
        # the subcommand fixes the expected kind
        if args.command == "sweep" and not hasattr(cfg, "geometries"):
            raise ConfigError("kind", "expected 'sweep' for the sweep command")
        if args.command == "optimize" and not hasattr(cfg, "starts"):
            raise ConfigError("kind", "expected 'optimize' for the optimize command")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    from .runner import run_optimize, run_sweep

    ts = _timestamp(args)
    try:
        with np.errstate(all="ignore"):
            if args.command == "sweep":
                rep = run_sweep(cfg, args.out_dir, args.threads, False if args.no_svg else None,
                                args.dump_operators, ts)
            else:
                rep = run_optimize(cfg, args.out_dir, args.threads, False if args.no_svg else None, ts)
    except (UnderResolvedError, NearSingularError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, GeometryError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for line in rep.summary:
        print(line)
    for p in rep.outputs:
        print(f"wrote {p}")
    if rep.failures:
        for f in rep.failures:
            print(f"numerical failure: {f}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
