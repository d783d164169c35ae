"""Potential trackers and the expected-potential verifier.

Two related quantities are tracked along an action sequence:

* the classical ridge potential, where the design covariance
  (lam * I + sum of a a.T)^{-1} shrinks deterministically and the summed
  quadratic forms are controlled by a log-det telescope;
* the general posterior potential, where the quadratic form is taken in
  the posterior covariance of the parameter, which is random and need not
  shrink on any single round.

The verifier estimates the expected general potential sum and compares it
against 2 * max(sigma^2, 1) * log det(I + T * Gamma_1), exactly by outcome
enumeration when the model is small and discrete, by Monte Carlo
otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from .distributions import FiniteSupportPrior, Noise, Prior, sample_reward
from .linalg import Array, PsdMatrix, as_array, symmetrize
from .posterior import (
    DegenerateWeights,
    EngineConfig,
    FiniteSupportState,
    enumerate_posterior_outcomes,
    make_posterior,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances


class ClassicalPotential:
    """Deterministic ridge-covariance potential tracker.

    Holds Sigma_t = (lam * I + sum_{s<t} a_s a_s.T)^{-1}, updated by the
    rank-one shrink identity, together with a running log det kept
    incrementally: each step subtracts log(1 + quad) because the shrink
    divides the determinant by exactly that factor.
    """

    def __init__(
        self, dim: int, lam: float = 1.0, tols: Tolerances = DEFAULT_TOLERANCES
    ):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        if lam < 1.0:
            raise ValueError(f"lam must be >= 1 for the dimension bound, got {lam}")
        self.dim = dim
        self.lam = lam
        self.tols = tols
        self.cov = np.eye(dim) / lam
        self.logdet_cov0 = -dim * np.log(lam)
        self.logdet_cov = self.logdet_cov0
        self.quad_sum = 0.0
        self.steps = 0

    def step(self, action: ArrayLike) -> float:
        """Absorb one action; returns the quadratic form a.T Sigma_t a."""
        a = np.asarray(action, dtype=np.float64)
        norm = float(np.linalg.norm(a))
        if norm > 1.0 + self.tols.norm_slack:
            raise ValueError(f"action norm must be <= 1, got {norm}")
        sv = self.cov @ a
        quad = float(a @ sv)
        self.cov = symmetrize(self.cov - np.outer(sv, sv) / (1.0 + quad))
        self.logdet_cov -= np.log1p(quad)
        self.quad_sum += quad
        self.steps += 1
        return quad

    def logdet_bound(self) -> float:
        """2 * log(det Sigma_1 / det Sigma_{t+1}), the telescoped bound."""
        return 2.0 * (self.logdet_cov0 - self.logdet_cov)

    def dimension_bound(self, horizon: Optional[int] = None) -> float:
        """2 * d * log(1 + T / (lam * d)) for T steps (default: steps so far)."""
        t = self.steps if horizon is None else horizon
        return 2.0 * self.dim * np.log1p(t / (self.lam * self.dim))


def classical_step(state: ClassicalPotential, action: ArrayLike) -> float:
    """One ridge-potential step; see :meth:`ClassicalPotential.step`."""
    return state.step(action)


@dataclass
class PotentialTrace:
    """Aligned record of general and classical potentials along one run.

    Each recorded round stores the action, the posterior quadratic form
    a.T Gamma_t a and the classical quadratic form a.T Sigma_t a, with the
    classical state advanced in lockstep so the two sequences stay
    comparable round by round.
    """

    gamma1: PsdMatrix
    sigma_sq: float
    lam: float = 1.0
    actions: List[Array] = field(default_factory=list)
    gamma_quads: List[float] = field(default_factory=list)
    sigma_quads: List[float] = field(default_factory=list)

    def __post_init__(self):
        if self.sigma_sq <= 0:
            raise ValueError(f"sigma_sq must be positive, got {self.sigma_sq}")
        self.classical = ClassicalPotential(self.gamma1.dim, lam=self.lam)
        self._gamma1_eigs = np.clip(np.linalg.eigvalsh(self.gamma1.mat), 0.0, None)

    @property
    def dim(self) -> int:
        return self.gamma1.dim

    @property
    def sigma_factor(self) -> float:
        return max(self.sigma_sq, 1.0)

    def append_quads(self, action: ArrayLike, gamma_quad: float) -> float:
        """Record a round from a precomputed posterior quadratic form."""
        a = np.asarray(action, dtype=np.float64).copy()
        if gamma_quad < -DEFAULT_TOLERANCES.psd_slack:
            raise ValueError(f"posterior quadratic form is negative: {gamma_quad}")
        sigma_quad = self.classical.step(a)
        self.actions.append(a)
        self.gamma_quads.append(max(float(gamma_quad), 0.0))
        self.sigma_quads.append(sigma_quad)
        return sigma_quad

    def general_step(self, gamma: PsdMatrix, action: ArrayLike) -> float:
        """Record a round; returns the posterior quadratic form a.T Gamma a."""
        quad = gamma.quad_form(action)
        self.append_quads(action, quad)
        return quad

    @property
    def gamma_sum(self) -> float:
        return float(np.sum(self.gamma_quads))

    @property
    def sigma_sum(self) -> float:
        return float(np.sum(self.sigma_quads))

    def logdet_growth(self, horizon: Optional[int] = None) -> float:
        """log det(I + t * Gamma_1) for t rounds (default: rounds so far)."""
        t = len(self.actions) if horizon is None else horizon
        return float(np.sum(np.log1p(t * self._gamma1_eigs)))

    def potential_bound(self, horizon: Optional[int] = None) -> float:
        """2 * max(sigma^2, 1) * log det(I + t * Gamma_1)."""
        return 2.0 * self.sigma_factor * self.logdet_growth(horizon)


def adversarial_action(
    gamma: PsdMatrix, tols: Tolerances = DEFAULT_TOLERANCES
) -> Array:
    """Unit action along the top eigendirection of a posterior covariance.

    Deterministic by construction: when the leading eigenvalue is
    degenerate the lowest-index standard basis vector with a nonzero
    projection onto the leading eigenspace is projected and normalized,
    and the sign is fixed so the first nonzero entry is positive. For a
    multiple of the identity this yields the first basis vector.
    """
    arr = gamma.mat
    dim = arr.shape[0]
    eigvals, eigvecs = np.linalg.eigh(arr)
    lead = eigvals[-1]
    tol = 1e-10 * max(1.0, abs(lead))
    mask = eigvals >= lead - tol
    basis = eigvecs[:, mask]
    if basis.shape[1] == 1:
        v = basis[:, 0]
    else:
        # rows of `basis` are the basis-vector projections onto the eigenspace
        row_norms = np.linalg.norm(basis, axis=1)
        idx = int(np.argmax(row_norms > tol))
        v = basis @ basis[idx]
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        v = np.zeros(dim)
        v[0] = 1.0
        return v
    v = v / norm
    nz = np.nonzero(np.abs(v) > 1e-12)[0]
    if nz.size and v[nz[0]] < 0:
        v = -v
    return v


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one expected-potential verification."""

    dim: int
    horizon: int
    replications: int
    exact: bool
    sigma_sq: float
    sigma_factor: float
    mean_total: float
    stderr_total: float
    bound: float
    holds: bool
    per_round_mean: Tuple[float, ...]
    gamma1_eigs: Tuple[float, ...]
    failed_replications: int = 0

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "horizon": self.horizon,
            "replications": self.replications,
            "exact": self.exact,
            "sigma_sq": self.sigma_sq,
            "sigma_factor": self.sigma_factor,
            "mean_total": self.mean_total,
            "stderr_total": self.stderr_total,
            "bound": self.bound,
            "holds": self.holds,
            "per_round_mean": list(self.per_round_mean),
            "gamma1_eigs": list(self.gamma1_eigs),
            "failed_replications": self.failed_replications,
        }


ActionRule = Callable[[PsdMatrix], Array]

EXACT_ENUMERATION_LIMIT = 12


def _exact_potential(
    prior: Prior, noise: Noise, horizon: int, rule: ActionRule
) -> Tuple[np.ndarray, float]:
    """Expected per-round potentials by exhaustive outcome enumeration."""
    root = make_posterior(prior, noise, EngineConfig(kind="finite_support"))
    per_round = np.zeros(horizon)
    frontier: List[Tuple[float, FiniteSupportState]] = [(1.0, root)]
    for t in range(horizon):
        nxt: List[Tuple[float, FiniteSupportState]] = []
        for prob, state in frontier:
            action = rule(state.covariance())
            per_round[t] += prob * state.quad_form(action)
            for _, branch_prob, child in enumerate_posterior_outcomes(state, action):
                nxt.append((prob * branch_prob, child))
        frontier = nxt
    return per_round, float(per_round.sum())


def verify_expected_potential(
    prior: Prior,
    noise: Noise,
    horizon: int,
    replications: int,
    master_seed: int = 0,
    engine: Optional[EngineConfig] = None,
    action_rule: str = "adversarial",
    action_generator=None,
    tols: Tolerances = DEFAULT_TOLERANCES,
) -> VerificationReport:
    """Estimate E[sum of a.T Gamma_t a] and compare it to the log-det bound.

    Uses exact outcome enumeration when the prior has finite support, the
    noise has finitely many outcomes, the action rule is deterministic in
    the state and the horizon is at most ``EXACT_ENUMERATION_LIMIT``;
    otherwise falls back to Monte Carlo over independent replications
    seeded from (master_seed, replication index).

    ``action_rule`` is "adversarial" (top eigendirection of the posterior
    covariance) or "lints" (posterior sampling over sets drawn from
    ``action_generator``).

    The pass criterion is mean <= bound + 3 * stderr, with stderr zero on
    the exact path.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if action_rule not in ("adversarial", "lints"):
        raise ValueError(f"unknown action rule {action_rule!r}")
    if action_rule == "lints" and action_generator is None:
        raise ValueError("the lints action rule needs an action generator")

    _, gamma1 = prior.moments()
    trace_proto = PotentialTrace(gamma1=gamma1, sigma_sq=noise.sigma_sq_bound)
    bound = trace_proto.potential_bound(horizon)
    sigma_factor = trace_proto.sigma_factor
    gamma1_eigs = tuple(float(v) for v in trace_proto._gamma1_eigs)

    can_enumerate = (
        action_rule == "adversarial"
        and noise.finite_outcomes is not None
        and isinstance(prior, FiniteSupportPrior)
        and horizon <= EXACT_ENUMERATION_LIMIT
    )
    if can_enumerate:
        per_round, total = _exact_potential(
            prior, noise, horizon, lambda g: adversarial_action(g, tols)
        )
        return VerificationReport(
            dim=gamma1.dim,
            horizon=horizon,
            replications=0,
            exact=True,
            sigma_sq=noise.sigma_sq_bound,
            sigma_factor=sigma_factor,
            mean_total=total,
            stderr_total=0.0,
            bound=bound,
            holds=bool(total <= bound + tols.inequality_slack),
            per_round_mean=tuple(per_round),
            gamma1_eigs=gamma1_eigs,
            failed_replications=0,
        )

    if replications < 2:
        raise ValueError(f"Monte Carlo needs >= 2 replications, got {replications}")
    engine = engine or EngineConfig(kind="particle")
    per_round_sum = np.zeros(horizon)
    totals: List[float] = []
    failures = 0
    for rep in range(replications):
        rng = np.random.default_rng(np.random.SeedSequence([master_seed, rep]))
        try:
            theta = prior.sample(rng)
            state = make_posterior(prior, noise, engine, rng=rng)
            quads = np.zeros(horizon)
            for t in range(horizon):
                if action_rule == "adversarial":
                    action = adversarial_action(state.covariance(), tols)
                else:
                    aset = action_generator.sample_round(rng)
                    action = aset.argmax(state.sample(rng))
                quads[t] = state.quad_form(action)
                y = sample_reward(noise, float(action @ theta), rng)
                state.update(action, y)
        except DegenerateWeights:
            failures += 1
            continue
        per_round_sum += quads
        totals.append(float(quads.sum()))
    if failures > max(1, replications) * 0.01:
        raise DegenerateWeights(
            f"{failures} of {replications} replications failed, over the 1% budget"
        )
    n = len(totals)
    arr = np.asarray(totals)
    mean_total = float(arr.mean())
    stderr_total = float(arr.std(ddof=1) / np.sqrt(n))
    return VerificationReport(
        dim=gamma1.dim,
        horizon=horizon,
        replications=n,
        exact=False,
        sigma_sq=noise.sigma_sq_bound,
        sigma_factor=sigma_factor,
        mean_total=mean_total,
        stderr_total=stderr_total,
        bound=bound,
        holds=bool(mean_total <= bound + 3.0 * stderr_total),
        per_round_mean=tuple(per_round_sum / n),
        gamma1_eigs=gamma1_eigs,
        failed_replications=failures,
    )
