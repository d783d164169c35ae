"""Command-line driver.

Subcommands: verify-lemmas, counterexample, potential-trace, run-bandit,
acceptance. Exit codes: 0 success, 1 check failure, 2 configuration or
usage error.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import List, Optional

from . import acceptance as acceptance_mod
from . import reporting
from .config import (
    ConfigError,
    build_experiment,
    build_lemma_run,
    build_potential_run,
    load_yaml,
)
from .harness import ExcessiveFailures, run_experiment
from .posterior import DegenerateWeights, counterexample_report
from .potential import verify_expected_potential
from .verify import DEFAULT_SIZES, run_all_checks

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2

WORKERS_ENV = "ELLIPSIM_WORKERS"


def _env_workers() -> Optional[int]:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(WORKERS_ENV, f"expected an integer, got {raw!r}")
    if value < 1:
        raise ConfigError(WORKERS_ENV, f"worker count must be >= 1, got {value}")
    return value


def _resolve_workers(flag: Optional[int], config_value: int) -> int:
    # precedence: flag, then environment, then config
    if flag is not None:
        return flag
    env = _env_workers()
    if env is not None:
        return env
    return config_value


def cmd_verify_lemmas(args: argparse.Namespace) -> int:
    if args.config:
        run_cfg = build_lemma_run(load_yaml(args.config))
        sizes = dict(run_cfg.sizes)
        seed = run_cfg.seed
    else:
        sizes = {}
        seed = 0
    if args.seed is not None:
        seed = args.seed
    if args.instances is not None:
        if args.instances < 1:
            raise ConfigError("--instances", f"must be >= 1, got {args.instances}")
        sizes = {name: args.instances for name in DEFAULT_SIZES}
    reports = run_all_checks(sizes=sizes, seed=seed)
    print(reporting.lemma_table(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_CHECK_FAILED


def cmd_counterexample(args: argparse.Namespace) -> int:
    try:
        report = counterexample_report(args.p, outcome=float(args.y1))
    except ValueError as exc:
        raise ConfigError("--p", str(exc))
    f = reporting.format_float
    print(f"p = {f(report.p)}, observed outcome = {f(report.outcome)}")
    print(f"prior variance        : {f(report.prior_variance)}")
    print(
        "posterior weights     : "
        + ", ".join(f(w) for w in report.posterior_weights)
    )
    print(f"posterior ratio       : {f(report.posterior_ratio)}")
    print(f"posterior variance    : {f(report.posterior_variance)}")
    print(f"non-monotone          : {str(report.variance_inflated).lower()}")
    if args.y1 != 1:
        return EXIT_OK
    failures: List[str] = []
    import numpy as np

    if not np.allclose(report.posterior_weights, [0.0, 0.5, 0.5], atol=1e-12):
        failures.append("posterior is not uniform on {1/4, 3/4}")
    if report.posterior_variance != 0.25:
        failures.append(
            f"posterior variance {f(report.posterior_variance)} != pinned "
            "reference 0.25 (exact Bayes gives 1/16; 0.25 is its square root)"
        )
    if failures:
        for msg in failures:
            print(f"reference check FAILED: {msg}")
        return EXIT_CHECK_FAILED
    print("reference checks passed")
    return EXIT_OK


def cmd_potential_trace(args: argparse.Namespace) -> int:
    cfg = build_potential_run(load_yaml(args.config))
    seed = cfg.master_seed if args.seed is None else args.seed
    report = verify_expected_potential(
        cfg.prior,
        cfg.noise,
        horizon=cfg.horizon,
        replications=cfg.replications,
        master_seed=seed,
        engine=cfg.engine,
        action_rule=cfg.action_rule,
        action_generator=cfg.actions,
    )
    out = args.out
    reporting.write_potential_csv_from_report(
        os.path.join(out, "potential.csv"), report
    )
    reporting.write_verification_json(
        os.path.join(out, "verification.json"), report
    )
    mode = "exact" if report.exact else f"{report.replications} replications"
    print(f"expected potential sum ({mode}): {report.mean_total:.6g}")
    print(f"bound 2*max(sigma^2,1)*logdet  : {report.bound:.6g}")
    print(f"holds: {str(report.holds).lower()}")
    return EXIT_OK if report.holds else EXIT_CHECK_FAILED


def cmd_run_bandit(args: argparse.Namespace) -> int:
    cfg = build_experiment(load_yaml(args.config))
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    overrides["workers"] = _resolve_workers(args.workers, cfg.workers)
    cfg = dataclasses.replace(cfg, **overrides)
    summary = run_experiment(cfg)
    out = args.out
    reporting.write_summary_json(os.path.join(out, "summary.json"), summary)
    reporting.write_regret_curve_csv(
        os.path.join(out, "regret_curve.csv"), summary
    )
    reporting.write_potential_csv_from_summary(
        os.path.join(out, "potential.csv"), summary
    )
    print(
        f"completed {summary.completed}/{summary.replications} replications "
        f"in {summary.wall_time_seconds:.1f} s ({summary.failed} failed)"
    )
    print(
        f"final mean regret {summary.final_mean_regret:.6g} "
        f"+- {summary.final_stderr_regret:.3g} stderr"
    )
    for name, value in summary.checks.items():
        shown = "skipped" if value is None else str(value).lower()
        print(f"{name}: {shown}")
    return EXIT_OK if summary.all_checks_pass else EXIT_CHECK_FAILED


def cmd_acceptance(args: argparse.Namespace) -> int:
    suite = acceptance_mod.run_acceptance_suite(seed=args.seed or 0)
    print(suite.summary_text())
    return EXIT_OK if suite.all_passed else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellipsim",
        description=(
            "Bayesian linear bandit simulator: inequality verification, "
            "posterior-potential traces and regret experiments."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser(
        "verify-lemmas", help="run the randomized inequality checks"
    )
    p_verify.add_argument("--config", help="YAML config with a lemmas section")
    p_verify.add_argument("--seed", type=int, help="seed override")
    p_verify.add_argument(
        "--instances", type=int, help="same instance count for every check"
    )
    p_verify.set_defaults(func=cmd_verify_lemmas)

    p_counter = sub.add_parser(
        "counterexample", help="exact one-step variance inflation example"
    )
    p_counter.add_argument("--p", type=float, default=0.05, help="prior weight knob")
    p_counter.add_argument(
        "--y1", type=int, choices=(0, 1), default=1, help="observed first outcome"
    )
    p_counter.set_defaults(func=cmd_counterexample)

    p_pot = sub.add_parser(
        "potential-trace", help="verify the expected potential sum bound"
    )
    p_pot.add_argument("--config", required=True, help="YAML config file")
    p_pot.add_argument("--out", default=".", help="output directory")
    p_pot.add_argument("--seed", type=int, help="seed override")
    p_pot.set_defaults(func=cmd_potential_trace)

    p_run = sub.add_parser("run-bandit", help="run a replicated regret experiment")
    p_run.add_argument("--config", required=True, help="YAML config file")
    p_run.add_argument("--out", default=".", help="output directory")
    p_run.add_argument("--seed", type=int, help="master seed override")
    p_run.add_argument("--workers", type=int, help="worker process count")
    p_run.set_defaults(func=cmd_run_bandit)

    p_acc = sub.add_parser("acceptance", help="run the full acceptance suite")
    p_acc.add_argument("--seed", type=int, default=0, help="suite seed")
    p_acc.set_defaults(func=cmd_acceptance)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExcessiveFailures, DegenerateWeights) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
