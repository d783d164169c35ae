"""Randomized numerical verification of the core inequalities.

Each check draws many random instances and records the worst violation of
one analytic inequality. All checks are exact in the sense that no Monte
Carlo slack enters the inequality itself: expectations over outcomes are
enumerated, and the sample-based checks hold for the empirical law of the
drawn samples. A violation beyond rounding tolerance therefore indicates
a real defect, not an unlucky draw.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .bandit import trace_cauchy_schwarz_check
from .distributions import BernoulliMeanNoise, FiniteSupportPrior
from .linalg import (
    PsdMatrix,
    logdet_potential,
    min_eigenvalue,
    psd_sqrt,
    random_psd,
    rank_one_shrink,
    symmetrize,
)
from .posterior import FiniteSupportState, enumerate_posterior_outcomes
from .potential import ClassicalPotential


@dataclass(frozen=True)
class FuzzReport:
    """Worst-case result of one randomized inequality check."""

    name: str
    instances: int
    max_violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tolerance

    def summary_line(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return (
            f"{self.name:<28} {self.instances:>8} {self.max_violation:>14.3e} "
            f"{self.tolerance:>10.1e}  {status}"
        )


def _check_rng(seed: int, check_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, check_id]))


CLASSICAL_DIMS = (1, 2, 4, 8)
CLASSICAL_HORIZONS = (50, 500)
CLASSICAL_LAMBDAS = (1.0, 2.0, 10.0)


def check_classical_potential(
    instances: int = 1000, seed: int = 0, tol: float = 1e-8
) -> FuzzReport:
    """Ridge potential telescope on random action sequences.

    Draws dimension, horizon and ridge weight from small fixed grids and
    checks both halves of the chain on every sequence: the summed
    quadratic forms are at most twice the log-det drop, which is at most
    2 * d * log(1 + T / (lam * d)).
    """
    rng = _check_rng(seed, 1)
    worst = -np.inf
    for _ in range(instances):
        dim = int(rng.choice(CLASSICAL_DIMS))
        lam = float(rng.choice(CLASSICAL_LAMBDAS))
        horizon = int(rng.choice(CLASSICAL_HORIZONS))
        tracker = ClassicalPotential(dim, lam=lam)
        dirs = rng.standard_normal((horizon, dim))
        norms = np.linalg.norm(dirs, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        scales = np.where(rng.random(horizon) < 0.5, 1.0, rng.random(horizon))
        actions = dirs / norms * scales[:, None]
        for a in actions:
            tracker.step(a)
        worst = max(
            worst,
            tracker.quad_sum - tracker.logdet_bound(),
            tracker.logdet_bound() - tracker.dimension_bound(),
        )
    return FuzzReport("classical-potential", instances, worst, tol)


def check_logdet_concavity(
    instances: int = 2000, seed: int = 0, dim_max: int = 6, tol: float = 1e-9
) -> FuzzReport:
    """Concavity of Sigma -> log det(I + x Sigma) along random chords."""
    rng = _check_rng(seed, 2)
    worst = -np.inf
    for _ in range(instances):
        dim = int(rng.integers(1, dim_max + 1))
        scale = float(np.exp(rng.uniform(np.log(1e-2), np.log(10.0))))
        rank_a = int(rng.integers(1, dim + 1))
        rank_b = int(rng.integers(1, dim + 1))
        sig_a = random_psd(dim, scale, rng, rank=rank_a)
        sig_b = random_psd(dim, scale, rng, rank=rank_b)
        alpha = float(rng.random())
        x = float(np.exp(rng.uniform(np.log(1e-3), np.log(100.0))))
        blend = alpha * sig_a.mat + (1.0 - alpha) * sig_b.mat
        lhs = alpha * logdet_potential(sig_a, x) + (1.0 - alpha) * logdet_potential(
            sig_b, x
        )
        rhs = logdet_potential(blend, x)
        worst = max(worst, lhs - rhs)
    return FuzzReport("logdet-concavity", instances, worst, tol)


def check_logdet_variational(
    instances: int = 2000,
    seed: int = 0,
    dim_max: int = 6,
    lambdas_per_instance: int = 50,
    tol: float = 1e-9,
) -> FuzzReport:
    """Variational form: log det(I + x Sigma) dominates every Lambda <= x I.

    For invertible Sigma and any PSD Lambda with Lambda <= x I,
    log det(Sigma^(1/2) (Sigma^{-1} + Lambda) Sigma^(1/2)) is at most the
    potential at x, with equality at Lambda = x I. Each instance draws
    many dominated Lambda and also checks the equality case.
    """
    rng = _check_rng(seed, 3)
    worst = -np.inf
    for _ in range(instances):
        dim = int(rng.integers(1, dim_max + 1))
        scale = float(np.exp(rng.uniform(np.log(1e-2), np.log(10.0))))
        base = random_psd(dim, scale, rng)
        # floor the spectrum so Sigma is safely invertible
        sigma = PsdMatrix.unchecked(base.mat + 1e-6 * scale * np.eye(dim))
        x = float(np.exp(rng.uniform(np.log(1e-3), np.log(100.0))))
        root = psd_sqrt(sigma)
        potential = logdet_potential(sigma, x)
        for _ in range(lambdas_per_instance):
            lam_mat = random_psd(dim, x, rng)
            inner = np.eye(dim) + root @ lam_mat.mat @ root
            _, inner_logdet = np.linalg.slogdet(symmetrize(inner))
            worst = max(worst, inner_logdet - potential)
        # equality at the top of the feasible set
        top = np.eye(dim) + x * root @ root
        _, top_logdet = np.linalg.slogdet(symmetrize(top))
        worst = max(worst, abs(top_logdet - potential))
    return FuzzReport("logdet-variational", instances, worst, tol)


def check_logdet_shift(
    instances: int = 2000, seed: int = 0, dim_max: int = 6, tol: float = 1e-9
) -> FuzzReport:
    """One-observation budget shift for the log-det potential.

    log(1 + v.T Sigma v) + logdet_potential(shrunk Sigma, x) is at most
    logdet_potential(Sigma, x + v.T v), where the shrink conditions Sigma
    on one unit-noise observation along v.
    """
    rng = _check_rng(seed, 4)
    worst = -np.inf
    for _ in range(instances):
        dim = int(rng.integers(1, dim_max + 1))
        scale = float(np.exp(rng.uniform(np.log(1e-2), np.log(10.0))))
        rank = int(rng.integers(1, dim + 1))
        sigma = random_psd(dim, scale, rng, rank=rank)
        v = rng.standard_normal(dim)
        norm = float(np.linalg.norm(v))
        if norm > 0:
            v = v / norm * float(rng.random())
        x = float(np.exp(rng.uniform(np.log(1e-3), np.log(100.0))))
        quad = sigma.quad_form(v)
        shrunk = rank_one_shrink(sigma, v)
        lhs = np.log1p(quad) + logdet_potential(shrunk, x)
        rhs = logdet_potential(sigma, x + float(v @ v))
        worst = max(worst, lhs - rhs)
    return FuzzReport("logdet-shift", instances, worst, tol)


def _random_mean_bounded_prior(
    rng: np.random.Generator, dim_max: int = 3, atoms_max: int = 8
) -> FiniteSupportPrior:
    """Finite prior in the nonnegative orthant of the unit ball."""
    dim = int(rng.integers(1, dim_max + 1))
    n = int(rng.integers(2, atoms_max + 1))
    atoms = np.abs(rng.standard_normal((n, dim)))
    norms = np.linalg.norm(atoms, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    atoms = atoms / norms * rng.random((n, 1))
    weights = rng.dirichlet(np.ones(n))
    return FiniteSupportPrior(atoms=atoms, weights=weights)


def check_variance_reduction(
    instances: int = 500, seed: int = 0, tol: float = 1e-9
) -> FuzzReport:
    """Expected one-step posterior-covariance contraction, enumerated.

    For random finite priors under outcome-enumerable noise, the
    outcome-weighted average of the next-round covariance must sit below
    Gamma - Gamma a a.T Gamma / (sigma^2 + a.T Gamma a) in the
    positive-semidefinite order. Checked with the tight almost-sure
    variance bound over the surviving support and with the loose uniform
    bound; the worst margin over both is reported.

    The predictive branch probabilities must form a probability
    distribution; any normalization defect is itself recorded as a
    violation, so a corrupted likelihood cannot hide by emptying or
    inflating the outcome tree.
    """
    rng = _check_rng(seed, 5)
    noise = BernoulliMeanNoise()
    worst = -np.inf
    for _ in range(instances):
        prior = _random_mean_bounded_prior(rng)
        state = FiniteSupportState(prior, noise)
        dim = prior.dim
        broken = False
        # a couple of warmup updates so non-prior filtrations are covered
        for _ in range(int(rng.integers(0, 3))):
            direction = np.abs(rng.standard_normal(dim))
            direction /= max(float(np.linalg.norm(direction)), 1e-12)
            branches = enumerate_posterior_outcomes(state, direction)
            probs = np.array([b[1] for b in branches])
            if abs(float(probs.sum()) - 1.0) > tol:
                worst = max(worst, abs(float(probs.sum()) - 1.0))
                broken = True
                break
            pick = int(rng.choice(len(branches), p=probs / probs.sum()))
            state = branches[pick][2]
        if broken:
            continue
        action = np.abs(rng.standard_normal(dim))
        action /= max(float(np.linalg.norm(action)), 1e-12)
        gamma = state.covariance().mat
        quad = state.quad_form(action)
        branches = enumerate_posterior_outcomes(state, action)
        prob_total = float(sum(prob for _, prob, _ in branches))
        if abs(prob_total - 1.0) > tol:
            worst = max(worst, abs(prob_total - 1.0))
            continue
        expected_next = np.zeros((dim, dim))
        for _, prob, child in branches:
            expected_next += prob * child.covariance().mat
        means = state.atoms @ action
        live = state.weights > 0
        tight_var = float(np.max(means[live] * (1.0 - means[live])))
        ga = gamma @ action
        for sigma_sq in (max(tight_var, 1e-12), noise.sigma_sq_bound):
            contraction = gamma - np.outer(ga, ga) / (sigma_sq + quad)
            margin = min_eigenvalue(symmetrize(contraction - expected_next))
            worst = max(worst, -margin)
    return FuzzReport("variance-reduction", instances, worst, tol)


def check_trace_cauchy_schwarz(
    instances: int = 1000, seed: int = 0, dim_max: int = 6, tol: float = 1e-9
) -> FuzzReport:
    """Paired-moment trace inequality on random correlated samples."""
    rng = _check_rng(seed, 6)
    worst = -np.inf
    for _ in range(instances):
        dim = int(rng.integers(1, dim_max + 1))
        n = int(rng.integers(10, 400))
        x = rng.standard_normal((n, dim)) @ rng.standard_normal((dim, dim))
        draw = rng.random()
        if draw < 0.15:
            z = x.copy()
        elif draw < 0.3:
            z = -x
        else:
            mix = rng.standard_normal((dim, dim))
            z = x @ mix + rng.standard_normal((n, dim)) * rng.uniform(0.0, 2.0)
        report = trace_cauchy_schwarz_check(x, z, tol=tol)
        worst = max(worst, report.lhs - report.rhs)
    return FuzzReport("trace-cauchy-schwarz", instances, worst, tol)


DEFAULT_SIZES: Dict[str, int] = {
    "classical-potential": 1000,
    "logdet-concavity": 2000,
    "logdet-variational": 2000,
    "logdet-shift": 2000,
    "variance-reduction": 500,
    "trace-cauchy-schwarz": 1000,
}

_CHECKS = {
    "classical-potential": check_classical_potential,
    "logdet-concavity": check_logdet_concavity,
    "logdet-variational": check_logdet_variational,
    "logdet-shift": check_logdet_shift,
    "variance-reduction": check_variance_reduction,
    "trace-cauchy-schwarz": check_trace_cauchy_schwarz,
}


def run_all_checks(
    sizes: Optional[Dict[str, int]] = None, seed: int = 0
) -> List[FuzzReport]:
    """Run every inequality check and return one report per check.

    ``sizes`` overrides instance counts per check name; a count of zero or
    less is invalid and raises ValueError.
    """
    merged = dict(DEFAULT_SIZES)
    if sizes:
        unknown = set(sizes) - set(merged)
        if unknown:
            raise ValueError(f"unknown check names: {sorted(unknown)}")
        merged.update(sizes)
    for name, count in merged.items():
        if count < 1:
            raise ValueError(f"instance count for {name} must be >= 1, got {count}")
    return [_CHECKS[name](instances=merged[name], seed=seed) for name in _CHECKS]
