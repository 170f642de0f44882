"""Command-line surface: run experiments, dump code constructions, selftest.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, experiments
from .experiments import ConfigError, ExperimentConfig


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polarauth",
        description="Link-level simulator for polar-coded tag authentication",
    )
    parser.add_argument("--version", action="version", version=f"polarauth {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from the catalog")
    run.add_argument("config", nargs="?", help="flat key=value config file")
    run.add_argument("--experiment", help="experiment id (instead of a config file)")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VAL", help="override any config key")
    run.add_argument("--out", help="output directory (default: results/ or $POLARAUTH_OUT)")

    con = sub.add_parser("construct", help="print a polar code construction")
    con.add_argument("--Ne", type=int, required=True, help="code length (power of two)")
    con.add_argument("--Ke", type=int, required=True, help="information length")
    con.add_argument("--sigma2", type=float, default=None,
                     help="design noise variance (Gaussian approximation)")
    con.add_argument("--z0", type=float, default=None,
                     help="initial Bhattacharyya parameter instead of GA")

    sub.add_parser("selftest", help="run the built-in invariant checks")
    sub.add_parser("list", help="list the experiment catalog")
    return parser


def _cmd_run(args) -> int:
    if args.config:
        text = Path(args.config).read_text()
        cfg = experiments.parse_config_text(text)
    elif args.experiment:
        cfg = ExperimentConfig(experiment=args.experiment)
    else:
        raise ConfigError("run needs a config file or --experiment")
    cfg = experiments.apply_overrides(cfg, args.overrides)
    if args.out:
        cfg.out_dir = args.out
    elif cfg.out_dir == "results" and os.environ.get("POLARAUTH_OUT"):
        cfg.out_dir = os.environ["POLARAUTH_OUT"]
    cfg.validate()
    result = experiments.run_experiment(cfg)
    csv_path, manifest_path = experiments.write_result(result, cfg.out_dir)
    print(f"wrote {csv_path} ({len(result.rows)} rows) and {manifest_path}")
    return 0


def _cmd_construct(args) -> int:
    from . import polar

    if (args.sigma2 is None) == (args.z0 is None):
        raise ConfigError("construct needs exactly one of --sigma2 or --z0")
    if args.sigma2 is not None:
        spec = polar.construct_ga(args.Ne, args.Ke, args.sigma2)
        design = f"ga sigma2={args.sigma2}"
    else:
        spec = polar.construct_bhattacharyya(args.Ne, args.Ke, args.z0)
        design = f"bhattacharyya z0={args.z0}"
    print(f"# {design}  (indices 0-based)")
    print(f"{spec.n} {spec.k} {spec.method} {spec.design_param} : "
          + " ".join(str(i) for i in spec.info_set))
    return 0


def _cmd_list() -> int:
    for name, exp in sorted(experiments.EXPERIMENTS.items()):
        print(f"{name:20s} {exp.description}")
        defaults = ", ".join(f"{k}={v}" for k, v in sorted(exp.defaults.items()))
        print(f"{'':20s}   defaults: {defaults}")
    return 0


def _cmd_selftest() -> int:
    from . import selftest

    failures = selftest.run_all(verbose=True)
    return 0 if failures == 0 else 2


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "construct":
            return _cmd_construct(args)
        if args.command == "list":
            return _cmd_list()
        if args.command == "selftest":
            return _cmd_selftest()
        return 1
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except (ValueError, OSError, np.linalg.LinAlgError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
