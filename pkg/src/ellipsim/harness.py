"""Replicated experiments and their summarized results.

Runs many independent episodes, each seeded from (master_seed,
replication index), and reduces them in canonical index order so results
are byte-for-byte reproducible regardless of worker count. Summaries
carry the regret and potential curves, the analytic bound values and
one-sided pass flags with Monte Carlo slack of three standard errors.
"""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .bandit import ActionSetGenerator, EpisodeFailure, run_episode
from .distributions import Noise, Prior
from .linalg import PsdMatrix, psd_order_holds
from .posterior import EngineConfig
from .tolerances import DEFAULT_TOLERANCES

CURVE_POINT_LIMIT = 10_000
CURVE_POINTS_WHEN_SUBSAMPLED = 1000

KNOWN_CHECKS = ("eq1", "thm23", "eq4", "remark33")


class ExcessiveFailures(RuntimeError):
    """More than one percent of replications failed."""


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """Everything needed to reproduce one experiment."""

    prior: Prior
    noise: Noise
    engine: EngineConfig
    actions: ActionSetGenerator
    horizon: int
    replications: int
    master_seed: int = 0
    workers: int = 1
    policy: str = "lints"
    lam: float = 1.0
    bound_checks: Tuple[str, ...] = KNOWN_CHECKS

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.replications < 1:
            raise ValueError(
                f"replications must be >= 1, got {self.replications}"
            )
        if self.master_seed < 0:
            raise ValueError(f"master_seed must be >= 0, got {self.master_seed}")
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        unknown = set(self.bound_checks) - set(KNOWN_CHECKS)
        if unknown:
            raise ValueError(f"unknown bound checks: {sorted(unknown)}")


@dataclass
class RunSummary:
    """Reduced results of one experiment.

    ``wall_time_seconds`` is informational only and deliberately left out
    of :meth:`to_dict`, so serialized summaries from identical configs are
    byte-identical across reruns.
    """

    config: Dict
    dim: int
    horizon: int
    replications: int
    completed: int
    failed: int
    failures: List[Dict]
    master_seed: int
    sigma_factor: float
    gamma1_eigs: List[float]
    gamma1_within_identity: bool
    ts: List[int]
    mean_regret: List[float]
    stderr_regret: List[float]
    mean_gamma_quad: List[float]
    running_gamma_sum: List[float]
    final_mean_regret: float
    final_stderr_regret: float
    potential_sum_mean: float
    potential_sum_stderr: float
    eq1_max_violation: float
    bounds: Dict[str, Optional[float]]
    checks: Dict[str, Optional[bool]]
    wall_time_seconds: float = field(default=0.0, compare=False)

    FORMAT = "ellipsim-summary-v1"

    def to_dict(self) -> Dict:
        return {
            "format": self.FORMAT,
            "config": self.config,
            "dim": self.dim,
            "horizon": self.horizon,
            "replications": self.replications,
            "completed": self.completed,
            "failed": self.failed,
            "failures": self.failures,
            "master_seed": self.master_seed,
            "sigma_factor": self.sigma_factor,
            "gamma1_eigs": self.gamma1_eigs,
            "gamma1_within_identity": self.gamma1_within_identity,
            "ts": self.ts,
            "mean_regret": self.mean_regret,
            "stderr_regret": self.stderr_regret,
            "mean_gamma_quad": self.mean_gamma_quad,
            "running_gamma_sum": self.running_gamma_sum,
            "final_mean_regret": self.final_mean_regret,
            "final_stderr_regret": self.final_stderr_regret,
            "potential_sum_mean": self.potential_sum_mean,
            "potential_sum_stderr": self.potential_sum_stderr,
            "eq1_max_violation": self.eq1_max_violation,
            "bounds": self.bounds,
            "checks": self.checks,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RunSummary":
        if data.get("format") != cls.FORMAT:
            raise ValueError(f"unrecognized summary format {data.get('format')!r}")
        kwargs = {k: v for k, v in data.items() if k != "format"}
        return cls(**kwargs, wall_time_seconds=0.0)

    @property
    def all_checks_pass(self) -> bool:
        return all(v is not False for v in self.checks.values())


def _replicate(cfg: ExperimentConfig, rep: int) -> Dict:
    """Run one replication; returns reduced arrays or an error record."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.master_seed, rep]))
    try:
        episode = run_episode(
            cfg.prior,
            cfg.noise,
            cfg.actions,
            cfg.engine,
            cfg.horizon,
            rng,
            policy=cfg.policy,
            lam=cfg.lam,
        )
    except EpisodeFailure as exc:
        return {
            "replication": rep,
            "round": exc.round_index,
            "error_type": type(exc.cause).__name__,
            "message": str(exc.cause),
        }
    trace = episode.trace
    return {
        "replication": rep,
        "cumulative_regret": episode.cumulative_regret,
        "gamma_quads": np.asarray(trace.gamma_quads),
        "sigma_sum": trace.sigma_sum,
        "sigma_logdet_rhs": trace.classical.logdet_bound(),
        "sigma_dim_rhs": trace.classical.dimension_bound(),
    }


def _replicate_star(args: Tuple[ExperimentConfig, int]) -> Dict:
    return _replicate(*args)


def _curve_ts(horizon: int) -> np.ndarray:
    if horizon <= CURVE_POINT_LIMIT:
        return np.arange(1, horizon + 1)
    pts = np.linspace(1, horizon, CURVE_POINTS_WHEN_SUBSAMPLED)
    return np.unique(np.round(pts).astype(int))


def run_experiment(
    cfg: ExperimentConfig, config_echo: Optional[Dict] = None
) -> RunSummary:
    """Run all replications of an experiment and reduce them.

    Replications failing with engine or noise errors are recorded and
    tolerated up to one percent of the total; beyond that the experiment
    raises :class:`ExcessiveFailures`. The reduction always walks
    replications in index order, so worker count never changes results.
    """
    start = time.perf_counter()
    if config_echo is None:
        from .config import experiment_to_dict

        config_echo = experiment_to_dict(cfg)

    jobs = [(cfg, rep) for rep in range(cfg.replications)]
    if cfg.workers > 1:
        chunk = max(1, cfg.replications // (cfg.workers * 4))
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            raw = list(pool.map(_replicate_star, jobs, chunksize=chunk))
    else:
        raw = [_replicate(cfg, rep) for cfg, rep in jobs]
    raw.sort(key=lambda r: r["replication"])

    failures = [r for r in raw if "error_type" in r]
    successes = [r for r in raw if "error_type" not in r]
    if len(failures) > 0.01 * cfg.replications:
        raise ExcessiveFailures(
            f"{len(failures)} of {cfg.replications} replications failed; "
            f"first: {failures[0]['error_type']}: {failures[0]['message']}"
        )
    if not successes:
        raise ExcessiveFailures("no replications completed")

    regret = np.stack([r["cumulative_regret"] for r in successes])
    gammas = np.stack([r["gamma_quads"] for r in successes])
    n = regret.shape[0]

    ts = _curve_ts(cfg.horizon)
    idx = ts - 1
    mean_regret = regret.mean(axis=0)
    # a singleton run has no spread estimate; report zero rather than nan
    if n > 1:
        stderr_regret = regret.std(axis=0, ddof=1) / np.sqrt(n)
    else:
        stderr_regret = np.zeros_like(mean_regret)
    mean_gamma = gammas.mean(axis=0)
    running_gamma = np.cumsum(mean_gamma)

    totals = gammas.sum(axis=1)
    potential_mean = float(totals.mean())
    potential_stderr = float(totals.std(ddof=1) / np.sqrt(n)) if n > 1 else 0.0

    eq1_violation = max(
        max(r["sigma_sum"] - r["sigma_logdet_rhs"] for r in successes),
        max(r["sigma_logdet_rhs"] - r["sigma_dim_rhs"] for r in successes),
    )

    _, gamma1 = cfg.prior.moments()
    eigs = np.clip(np.linalg.eigvalsh(gamma1.mat), 0.0, None)
    sigma_factor = max(cfg.noise.sigma_sq_bound, 1.0)
    dim = gamma1.dim
    horizon = cfg.horizon
    logdet_growth = float(np.sum(np.log1p(horizon * eigs)))
    within_identity = psd_order_holds(gamma1, PsdMatrix.identity(dim))

    bounds: Dict[str, Optional[float]] = {
        "eq1_rhs": 2.0 * dim * float(np.log1p(horizon / (cfg.lam * dim))),
        "thm23_rhs": 2.0 * sigma_factor * logdet_growth,
        "eq4_rhs": float(
            np.sqrt(2.0 * sigma_factor * dim * horizon * logdet_growth)
        ),
        "remark33_rhs": (
            dim * float(np.sqrt(2.0 * sigma_factor * horizon * np.log1p(horizon)))
            if within_identity
            else None
        ),
    }

    final_mean = float(mean_regret[-1])
    final_stderr = float(stderr_regret[-1])
    checks: Dict[str, Optional[bool]] = {}
    for name in KNOWN_CHECKS:
        key = f"pass_{name}"
        if name not in cfg.bound_checks:
            checks[key] = None
        elif name == "eq1":
            checks[key] = bool(eq1_violation <= 1e-8)
        elif name == "thm23":
            checks[key] = bool(
                potential_mean <= bounds["thm23_rhs"] + 3.0 * potential_stderr
            )
        elif name == "eq4":
            checks[key] = bool(final_mean + 3.0 * final_stderr <= bounds["eq4_rhs"])
        else:
            checks[key] = (
                bool(
                    logdet_growth
                    <= dim * np.log1p(horizon) + DEFAULT_TOLERANCES.inequality_slack
                )
                if within_identity
                else None
            )

    return RunSummary(
        config=config_echo,
        dim=dim,
        horizon=horizon,
        replications=cfg.replications,
        completed=len(successes),
        failed=len(failures),
        failures=failures,
        master_seed=cfg.master_seed,
        sigma_factor=sigma_factor,
        gamma1_eigs=[float(v) for v in eigs],
        gamma1_within_identity=bool(within_identity),
        ts=[int(t) for t in ts],
        mean_regret=[float(v) for v in mean_regret[idx]],
        stderr_regret=[float(v) for v in stderr_regret[idx]],
        mean_gamma_quad=[float(v) for v in mean_gamma[idx]],
        running_gamma_sum=[float(v) for v in running_gamma[idx]],
        final_mean_regret=final_mean,
        final_stderr_regret=final_stderr,
        potential_sum_mean=potential_mean,
        potential_sum_stderr=potential_stderr,
        eq1_max_violation=float(eq1_violation),
        bounds=bounds,
        checks=checks,
        wall_time_seconds=time.perf_counter() - start,
    )
