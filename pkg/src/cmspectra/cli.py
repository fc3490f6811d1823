"""Command-line interface.

Subcommands: ``gap``, ``sweep``, ``esd``, ``moments`` run the Monte Carlo
experiments; ``oracle`` prints exact enumeration laws for a tiny sequence;
``validate`` executes the acceptance criteria. Exit codes: 0 success,
2 configuration error, 3 sampler infeasibility, 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import acceptance
from .degrees import new_degree_sequence
from .errors import ConfigError, SamplingError, SolverError
from .experiments import ExperimentConfig, _json_default, run_experiment
from .oracle import exact_cm_law


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="config file (JSON or key=value lines)")
    p.add_argument("--seed", type=int, help="master seed (64-bit)")
    p.add_argument("--replicates", type=int, help="replicates per ensemble/grid point")
    p.add_argument("--workers", type=int, help="worker processes")
    p.add_argument("--out", help="output directory for CSV/JSON reports")
    p.add_argument("--format", choices=["csv", "json"], help="replicate output format")


def _add_experiment_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="vertex count")
    p.add_argument("--family", help='degree family as JSON, e.g. '
                                    '\'{"kind": "band", "lo": 25, "hi": 50}\'')
    p.add_argument("--sampler", choices=["auto", "rejection", "mcmc"])
    p.add_argument("--swaps", type=int, help="MCMC proposal budget override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmspectra",
        description="Largest-eigenvalue experiments for degree-constrained random graphs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    for name, desc in [
        ("gap", "lambda1 under hard vs soft degree constraints (the -1 shift)"),
        ("sweep", "concentration of ||H|| and lambda1 across a grid of n"),
        ("esd", "spectral histogram against its limiting density"),
        ("moments", "centered quadratic forms against closed forms"),
    ]:
        p = sub.add_parser(name, help=desc)
        _add_common(p)
        _add_experiment_flags(p)
        if name == "esd":
            p.add_argument("--bins", type=int)
            p.add_argument("--reference", choices=["km", "semicircle"])
        if name == "sweep":
            p.add_argument("--n-grid", help="comma-separated n values")
            p.add_argument("--exponent", type=float)

    p = sub.add_parser("oracle", help="exact enumeration law for a tiny degree sequence")
    p.add_argument("--degrees", required=True, help="comma-separated degrees, e.g. 2,2,2")
    p.add_argument("--out", help="write the JSON law here instead of stdout")

    p = sub.add_parser("validate", help="run acceptance criteria")
    p.add_argument("--criterion", default="fast",
                   help="'all', 'fast' (1-3), or a comma-separated list like 1,2,5")
    p.add_argument("--workers", type=int)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_file(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {"experiment": args.command}
    for key in ("seed", "replicates", "workers", "out", "format", "n",
                "sampler", "swaps"):
        val = getattr(args, key, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "family", None):
        try:
            overrides["family"] = json.loads(args.family)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"--family must be JSON: {exc}") from exc
    if getattr(args, "bins", None) is not None:
        overrides["bins"] = args.bins
    if getattr(args, "reference", None):
        overrides["reference"] = args.reference
    if getattr(args, "n_grid", None):
        overrides["n_grid"] = tuple(int(x) for x in args.n_grid.split(","))
    if getattr(args, "exponent", None) is not None:
        overrides["exponent"] = args.exponent
    data = cfg.to_dict()
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def _run_oracle(args: argparse.Namespace) -> int:
    try:
        degrees = [int(x) for x in args.degrees.split(",")]
    except ValueError as exc:
        raise ConfigError(f"--degrees must be comma-separated integers: {exc}") from exc
    law = exact_cm_law(new_degree_sequence(degrees))
    blob = json.dumps(law.to_json_dict(), indent=2, default=_json_default)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(blob + "\n")
    else:
        print(blob)
    return 0


def _run_validate(args: argparse.Namespace) -> int:
    token = args.criterion
    if token == "all":
        indices = sorted(acceptance.CRITERIA)
    elif token == "fast":
        indices = [1, 2, 3]
    else:
        try:
            indices = [int(x) for x in token.split(",")]
        except ValueError as exc:
            raise ConfigError(f"--criterion must be 'all', 'fast', or integers: {exc}") from exc
        unknown = [k for k in indices if k not in acceptance.CRITERIA]
        if unknown:
            raise ConfigError(f"unknown criteria: {unknown}")
    results = acceptance.run_all(indices, workers=args.workers)
    return 0 if all(r.passed for r in results) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "oracle":
            return _run_oracle(args)
        if args.command == "validate":
            return _run_validate(args)
        cfg = _config_from_args(args)
        report = run_experiment(cfg)
        summary = {k: v for k, v in report.items() if k != "rows"}
        print(json.dumps(summary, indent=2, default=_json_default))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SamplingError as exc:
        print(f"sampling error: {exc}", file=sys.stderr)
        return 3
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
