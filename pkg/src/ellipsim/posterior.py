"""Posterior-state engines.

Three interchangeable representations of the conditional law of the
parameter given the observed (action, reward) pairs:

* ``gaussian_conjugate``: closed form for Gaussian prior + Gaussian noise,
  kept in precision form so each update is a rank-one add.
* ``finite_support``: exact Bayes reweighting over fixed support points.
* ``particle``: sequential importance resampling for everything else.

All engines share the same surface: ``mean``, ``covariance``, ``sample``,
``update``, ``clone``. Updates mutate in place; ``clone`` exists so
enumeration can branch a state per outcome.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .distributions import (
    BernoulliMeanNoise,
    FiniteSupportPrior,
    GaussianNoise,
    GaussianPrior,
    Noise,
    Prior,
)
from .linalg import Array, PsdMatrix, chol_solve, jittered_cholesky, symmetrize
from .tolerances import DEFAULT_TOLERANCES, Tolerances


class DegenerateWeights(RuntimeError):
    """Every posterior weight underflowed to zero during an update."""


class IncompatibleEngine(ValueError):
    """The requested engine cannot represent the given prior/noise pair."""


@dataclass(frozen=True)
class EngineConfig:
    """Which posterior engine to run and its size parameters."""

    kind: str = "particle"
    particles: int = 20_000

    def __post_init__(self):
        if self.kind not in ("gaussian_conjugate", "finite_support", "particle"):
            raise ValueError(f"unknown engine kind {self.kind!r}")
        if self.particles < 2:
            raise ValueError(f"particles must be >= 2, got {self.particles}")


class GaussianConjugateState:
    """Gaussian posterior tracked through its precision matrix.

    Maintains P = cov^{-1} and the shift vector P @ mean. An update along
    action a with observed reward y adds a a.T / sd^2 to P and a y / sd^2
    to the shift, so the per-step cost is one outer product; mean and
    covariance are recovered through a cached Cholesky factor of P.
    """

    def __init__(self, prior: GaussianPrior, noise: GaussianNoise):
        self.noise = noise
        mean0, cov0 = prior.moments()
        try:
            chol0 = np.linalg.cholesky(cov0.mat)
        except np.linalg.LinAlgError as exc:
            raise IncompatibleEngine(
                "gaussian_conjugate needs an invertible prior covariance"
            ) from exc
        self.precision = symmetrize(chol_solve(chol0, np.eye(cov0.dim)))
        self.shift = self.precision @ mean0
        self._chol: Optional[Array] = None

    @property
    def dim(self) -> int:
        return self.shift.shape[0]

    def _factor(self) -> Array:
        if self._chol is None:
            self._chol = jittered_cholesky(self.precision)
        return self._chol

    def mean(self) -> Array:
        return chol_solve(self._factor(), self.shift)

    def covariance(self) -> PsdMatrix:
        cov = chol_solve(self._factor(), np.eye(self.dim))
        return PsdMatrix.unchecked(cov)

    def quad_form(self, v: ArrayLike) -> float:
        """v.T @ covariance @ v without forming the covariance."""
        w = np.linalg.solve(self._factor(), np.asarray(v, dtype=np.float64))
        return float(w @ w)

    def sample(self, rng: np.random.Generator) -> Array:
        # if P = L L.T then solving L.T x = z gives cov(x) = P^{-1}
        chol = self._factor()
        z = rng.standard_normal(self.dim)
        return self.mean() + np.linalg.solve(chol.T, z)

    def update(self, action: ArrayLike, y: float) -> None:
        a = np.asarray(action, dtype=np.float64)
        inv_var = 1.0 / self.noise.sd**2
        self.precision += np.outer(a, a) * inv_var
        self.shift += a * (y * inv_var)
        self._chol = None

    def clone(self) -> "GaussianConjugateState":
        other = self.__class__.__new__(self.__class__)
        other.noise = self.noise
        other.precision = self.precision.copy()
        other.shift = self.shift.copy()
        other._chol = None
        return other


class FiniteSupportState:
    """Exact discrete posterior over the prior's support points.

    The support never changes; an update multiplies each weight by the
    likelihood of the observed reward at that point's predicted mean and
    renormalizes. If every weight underflows to zero the update raises
    :class:`DegenerateWeights` rather than fabricating a posterior.
    """

    def __init__(
        self,
        prior: FiniteSupportPrior,
        noise: Noise,
        tols: Tolerances = DEFAULT_TOLERANCES,
    ):
        self.noise = noise
        self.tols = tols
        self.atoms = prior.atoms
        self.weights = prior.weights.copy()

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    def mean(self) -> Array:
        return self.weights @ self.atoms

    def covariance(self) -> PsdMatrix:
        centered = self.atoms - self.mean()
        cov = (self.weights[:, None] * centered).T @ centered
        return PsdMatrix.unchecked(cov)

    def quad_form(self, v: ArrayLike) -> float:
        proj = self.atoms @ np.asarray(v, dtype=np.float64)
        m = float(self.weights @ proj)
        return float(self.weights @ (proj - m) ** 2)

    def sample(self, rng: np.random.Generator) -> Array:
        return self.atoms[rng.choice(self.atoms.shape[0], p=self.weights)]

    def update(self, action: ArrayLike, y: float) -> None:
        a = np.asarray(action, dtype=np.float64)
        lik = self.noise.likelihood(y, self.atoms @ a)
        raw = self.weights * lik
        total = float(raw.sum())
        if total <= 0.0 or not np.isfinite(total):
            raise DegenerateWeights(
                f"posterior weights vanished for outcome y={y!r}"
            )
        self.weights = raw / total

    def outcome_probability(self, action: ArrayLike, y: float) -> float:
        """Predictive mass of outcome y under the current state."""
        a = np.asarray(action, dtype=np.float64)
        lik = self.noise.likelihood(y, self.atoms @ a)
        return float(self.weights @ lik)

    def clone(self) -> "FiniteSupportState":
        other = self.__class__.__new__(self.__class__)
        other.noise = self.noise
        other.tols = self.tols
        other.atoms = self.atoms
        other.weights = self.weights.copy()
        return other


class ParticleState:
    """Sequential importance resampling approximation of the posterior.

    Particles are drawn from the prior once and only ever reweighted or
    resampled; the parameter is static, so there is no rejuvenation move
    and long runs can deplete distinct support. Systematic resampling
    triggers when the effective sample size drops below half the particle
    count. The generator passed at construction drives initialization and
    all resampling, keeping replays deterministic.
    """

    def __init__(
        self,
        prior: Prior,
        noise: Noise,
        rng: np.random.Generator,
        n_particles: int = 20_000,
    ):
        self.noise = noise
        self.rng = rng
        self.particles = prior.sample_many(rng, n_particles)
        self.weights = np.full(n_particles, 1.0 / n_particles)
        self.resample_count = 0

    @property
    def dim(self) -> int:
        return self.particles.shape[1]

    @property
    def n_particles(self) -> int:
        return self.particles.shape[0]

    def effective_sample_size(self) -> float:
        return 1.0 / float(self.weights @ self.weights)

    def mean(self) -> Array:
        return self.weights @ self.particles

    def covariance(self) -> PsdMatrix:
        centered = self.particles - self.mean()
        cov = (self.weights[:, None] * centered).T @ centered
        return PsdMatrix.unchecked(cov)

    def quad_form(self, v: ArrayLike) -> float:
        proj = self.particles @ np.asarray(v, dtype=np.float64)
        m = float(self.weights @ proj)
        return float(self.weights @ (proj - m) ** 2)

    def sample(self, rng: np.random.Generator) -> Array:
        idx = rng.choice(self.n_particles, p=self.weights)
        return self.particles[idx]

    def update(self, action: ArrayLike, y: float) -> None:
        a = np.asarray(action, dtype=np.float64)
        lik = self.noise.likelihood(y, self.particles @ a)
        raw = self.weights * lik
        total = float(raw.sum())
        if total <= 0.0 or not np.isfinite(total):
            raise DegenerateWeights(
                f"particle weights vanished for outcome y={y!r}"
            )
        self.weights = raw / total
        if self.effective_sample_size() < self.n_particles / 2.0:
            self._systematic_resample()

    def _systematic_resample(self) -> None:
        n = self.n_particles
        positions = (np.arange(n) + self.rng.random()) / n
        cumulative = np.cumsum(self.weights)
        cumulative[-1] = 1.0
        idx = np.searchsorted(cumulative, positions)
        self.particles = self.particles[idx].copy()
        self.weights = np.full(n, 1.0 / n)
        self.resample_count += 1

    def clone(self) -> "ParticleState":
        other = self.__class__.__new__(self.__class__)
        other.noise = self.noise
        other.rng = copy.deepcopy(self.rng)
        other.particles = self.particles.copy()
        other.weights = self.weights.copy()
        other.resample_count = self.resample_count
        return other


PosteriorState = GaussianConjugateState | FiniteSupportState | ParticleState


def make_posterior(
    prior: Prior,
    noise: Noise,
    engine: EngineConfig,
    rng: Optional[np.random.Generator] = None,
) -> PosteriorState:
    """Build the posterior state for a prior/noise pair.

    Raises :class:`IncompatibleEngine` when the engine cannot represent
    the pair (conjugate needs Gaussian prior and noise, finite_support
    needs a discrete prior, particle needs a generator for its draws).
    """
    if engine.kind == "gaussian_conjugate":
        if not isinstance(prior, GaussianPrior) or not isinstance(noise, GaussianNoise):
            raise IncompatibleEngine(
                "gaussian_conjugate requires a Gaussian prior and Gaussian noise"
            )
        return GaussianConjugateState(prior, noise)
    if engine.kind == "finite_support":
        if not isinstance(prior, FiniteSupportPrior):
            raise IncompatibleEngine(
                "finite_support requires a finite-support prior"
            )
        return FiniteSupportState(prior, noise)
    if rng is None:
        raise IncompatibleEngine("particle engine needs a random generator")
    return ParticleState(prior, noise, rng, n_particles=engine.particles)


def enumerate_posterior_outcomes(
    state: PosteriorState, action: ArrayLike
) -> List[Tuple[float, float, PosteriorState]]:
    """Branch a state over every possible next outcome.

    Only available when the noise has a finite outcome set and the state
    supports exact predictive probabilities (finite support). Returns
    (outcome, predictive probability, updated clone) triples for outcomes
    with positive mass.
    """
    outcomes = state.noise.finite_outcomes
    if outcomes is None:
        raise IncompatibleEngine(
            "outcome enumeration needs a noise family with finitely many outcomes"
        )
    if not isinstance(state, FiniteSupportState):
        raise IncompatibleEngine(
            "outcome enumeration needs a finite_support posterior state"
        )
    branches: List[Tuple[float, float, PosteriorState]] = []
    for y in outcomes:
        prob = state.outcome_probability(action, y)
        if prob <= 0.0:
            continue
        child = state.clone()
        child.update(action, y)
        branches.append((float(y), prob, child))
    return branches


# ---------------------------------------------------------------------------
# one-dimensional variance inflation example
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InflationReport:
    """Measured quantities for the variance inflation example."""

    p: float
    prior_variance: float
    outcome: float
    outcome_probability: float
    posterior_weights: Array
    posterior_ratio: float
    posterior_variance: float
    variance_inflated: bool


def counterexample_prior(p: float) -> FiniteSupportPrior:
    """Three-point scalar prior on {0, 1/4, 3/4} with weights (1-4p, 3p, p).

    For any p in (0, 1/4) the Bernoulli observation y = 1 along the unit
    action inflates the posterior variance above the prior variance.
    """
    if not 0.0 < p < 0.25:
        raise ValueError(f"p must lie in (0, 1/4), got {p}")
    atoms = np.array([[0.0], [0.25], [0.75]])
    weights = np.array([1.0 - 4.0 * p, 3.0 * p, p])
    return FiniteSupportPrior(atoms=atoms, weights=weights)


def counterexample_report(p: float, outcome: float = 1.0) -> InflationReport:
    """Run one exact Bayes update of the inflation example and report it.

    With outcome 1 the surviving support is {1/4, 3/4} with equal mass,
    because the prior odds 3:1 cancel against the likelihood odds 1:3. The
    posterior variance is then ((3/4 - 1/4)/2)^2 = 1/16. The prior
    variance 0.75p - 2.25p^2 stays below 1/16 for every p in (0, 1/4)
    except p = 1/6, where the two are equal; the ``variance_inflated``
    flag reports the measured comparison rather than assuming it.
    """
    prior = counterexample_prior(p)
    noise = BernoulliMeanNoise()
    state = FiniteSupportState(prior, noise)
    action = np.array([1.0])
    prior_var = state.quad_form(action)
    prob = state.outcome_probability(action, outcome)
    state.update(action, outcome)
    post_var = state.quad_form(action)
    w = state.weights
    ratio = float(w[1] / w[2]) if w[2] > 0 else float("inf")
    return InflationReport(
        p=p,
        prior_variance=prior_var,
        outcome=outcome,
        outcome_probability=prob,
        posterior_weights=w.copy(),
        posterior_ratio=ratio,
        posterior_variance=post_var,
        variance_inflated=bool(post_var > prior_var),
    )
