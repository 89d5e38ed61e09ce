"""Command-line front end.

Exit codes: 0 success, 1 computation or verification failure, 2 usage error.
Data goes to stdout (or ``--out``), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence

from . import bounds
from .change_of_measure import DEFAULT_ORDERS, verify_lemmas
from .config import ConfigError, config_from_mapping, load_config, load_prior
from .experiment import (
    FIGURE1_METHODS,
    ExperimentConfig,
    coverage_estimate,
    figure1_csv,
    figure1_sweep,
    fmt,
)

log = logging.getLogger("dpipac")

SWEEP_HEADER = ("method", "n", "order", "delta", "q_min", "kl_budget")
SEED_ENV = "DPIPAC_SEED"


class UsageError(Exception):
    """Bad flag values or combinations (exit 2)."""


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def sweep_csv(rows: Sequence[bounds.SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([r.method, r.n, fmt(r.order), fmt(r.delta), fmt(r.q_min), fmt(r.kl_budget)])
    return buf.getvalue()


# --- certify --------------------------------------------------------------


def cmd_certify(args: argparse.Namespace) -> int:
    if args.method in bounds.ORDERED_METHODS and args.order is None:
        raise UsageError(f"--order is required for method {args.method}")
    if (args.q_mass is None) == (args.prior is None):
        raise UsageError("give exactly one of --q-mass or --prior")
    if args.hypothesis is not None and args.prior is None:
        raise UsageError("--hypothesis needs --prior")
    if not 0 <= args.empirical_loss <= 1:
        raise UsageError("--empirical-loss must be in [0, 1]")
    if args.prior is not None:
        prior = load_prior(args.prior)
        if args.hypothesis is None:
            q_mass = min(prior.values())
        elif args.hypothesis in prior:
            q_mass = prior[args.hypothesis]
        else:
            raise UsageError(f"hypothesis {args.hypothesis!r} not in prior file")
    else:
        q_mass = args.q_mass
    request = bounds.BoundRequest(args.method, args.n, args.delta, q_mass, args.order)
    cert = bounds.certify(request, args.empirical_loss)
    for w in cert.warnings:
        log.warning(w)
    sys.stdout.write(json.dumps(cert.to_dict(), indent=2) + "\n")
    return 0


# --- compare --------------------------------------------------------------


def cmd_compare(args: argparse.Namespace) -> int:
    base = load_config(args.config) if args.config else ExperimentConfig()
    n_values = args.n_values or list(base.n_values)
    orders = args.orders or list(base.orders)
    delta = base.delta if args.delta is None else args.delta
    methods = args.methods or list(FIGURE1_METHODS)
    if args.prior is not None:
        q_min = min(load_prior(args.prior).values())
    elif args.q_min is not None:
        q_min = args.q_min
    else:
        q_min = 1.0 / base.hypothesis_count
    unknown = [m for m in methods if m not in bounds.METHODS]
    if unknown:
        raise UsageError(f"unknown method(s): {', '.join(unknown)}")
    if any(n < 1 for n in n_values):
        raise UsageError("all --n-values must be >= 1")
    if not 0 < delta <= 1:
        raise UsageError("--delta must be in (0, 1]")
    if not 0 < q_min <= 1:
        raise UsageError("--q-min must be in (0, 1]")
    if any(o <= 1 for o in orders):
        raise UsageError("all --orders must be > 1")
    rows = bounds.sweep(methods, n_values, delta, q_min, orders)
    _emit(sweep_csv(rows), args.out)
    return 0


# --- coverage / experiment ------------------------------------------------


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        data = dataclasses.asdict(load_config(args.config))
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            data["seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env_seed!r}")
    for key in ("seed", "trials"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if getattr(args, "n_values", None):
        data["n_values"] = list(args.n_values)
    return config_from_mapping(
        {k: list(v) if isinstance(v, tuple) else v for k, v in data.items()}, "flags"
    )


def cmd_coverage(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    log.info("coverage: %d trials x %d sample sizes, seed %d",
             config.trials, len(config.n_values), config.seed)
    report = coverage_estimate(config, workers=args.workers)
    if report.clamped:
        log.warning("population losses clamped for hypotheses %s", list(report.clamped))
    _emit(report.to_csv(), args.out)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    config = _experiment_config(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    fig_path = out_dir / "figure1.csv"
    cov_path = out_dir / "coverage.csv"
    fig_path.write_text(figure1_csv(figure1_sweep(config)))
    log.info("wrote %s", fig_path)
    report = coverage_estimate(config, workers=args.workers)
    cov_path.write_text(report.to_csv())
    log.info("wrote %s", cov_path)
    summary = {
        "config": dataclasses.asdict(config),
        "figure1_csv": str(fig_path),
        "coverage_csv": str(cov_path),
        "max_violation_frequency": report.max_frequency(),
        "clamped_hypotheses": list(report.clamped),
    }
    sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


# --- verify ---------------------------------------------------------------


def cmd_verify(args: argparse.Namespace) -> int:
    if args.trials < 0:
        raise UsageError("--trials must be >= 0")
    if args.max_support < 2:
        raise UsageError("--max-support must be >= 2")
    report = verify_lemmas(
        args.trials, args.max_support, args.seed, DEFAULT_ORDERS,
        inject_slack=args.inject_slack, workers=args.workers,
    )
    sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    if not report.ok:
        log.error("%d violation(s) found", report.violations)
        return 1
    return 0


# --- wiring ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dpipac", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="print a risk certificate as JSON")
    p.add_argument("--method", required=True, choices=bounds.METHODS)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--empirical-loss", type=float, required=True)
    p.add_argument("--q-mass", type=float)
    p.add_argument("--prior", help="JSON file mapping hypothesis id to prior mass")
    p.add_argument("--hypothesis", help="read this hypothesis's mass from --prior "
                                        "(default: the minimum mass)")
    p.add_argument("--order", type=float)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("compare", help="budget table across n, methods and orders (CSV)")
    p.add_argument("--config")
    p.add_argument("--methods", type=_str_list)
    p.add_argument("--n-values", type=_int_list)
    p.add_argument("--orders", type=_float_list)
    p.add_argument("--delta", type=float)
    p.add_argument("--q-min", type=float)
    p.add_argument("--prior")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    for name, func, help_text in (
        ("coverage", cmd_coverage, "Monte Carlo violation frequencies (CSV)"),
        ("experiment", cmd_experiment, "budget table and coverage report into a directory"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--n-values", type=_int_list)
        p.add_argument("--workers", type=int, default=1)
        if name == "coverage":
            p.add_argument("--out")
        else:
            p.add_argument("--out-dir", default="results")
        p.set_defaults(func=func)

    p = sub.add_parser("verify", help="check the change-of-measure bounds on random instances")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--max-support", type=int, default=6)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--inject-slack", type=float, default=0.0, help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"dpipac {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"dpipac {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
