"""Prior and reward-noise families.

Priors describe the unknown parameter vector; noises describe the reward
given its conditional mean. Each prior exposes exact first and second
moments plus sampling; each noise exposes sampling, a pointwise likelihood
and a conditional-variance bound. The classes are deliberately small and
closed: downstream code switches on capability flags (finite support,
finite outcome set, mean-range restriction) rather than on types.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .linalg import PsdMatrix, psd_sqrt
from .tolerances import DEFAULT_TOLERANCES, Tolerances

Array = NDArray[np.float64]


class MeanOutOfRange(ValueError):
    """A conditional reward mean fell outside the noise family's domain."""


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianPrior:
    """Multivariate Gaussian prior N(mean, cov).

    The support is unbounded, so ``norm_bound_violated`` is True: regret
    bounds that assume a unit-ball parameter do not formally apply, and
    callers surface that as a warning rather than an error.
    """

    mean: Array
    cov: PsdMatrix
    norm_bound_violated: bool = field(default=True, init=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        if mean.ndim != 1:
            raise ValueError(f"mean must be a vector, got shape {mean.shape}")
        if mean.shape[0] != self.cov.dim:
            raise ValueError(
                f"mean dim {mean.shape[0]} does not match cov dim {self.cov.dim}"
            )
        mean = mean.copy()
        mean.flags.writeable = False
        object.__setattr__(self, "mean", mean)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def moments(self) -> Tuple[Array, PsdMatrix]:
        return self.mean, self.cov

    def sample(self, rng: np.random.Generator) -> Array:
        return self.sample_many(rng, 1)[0]

    def sample_many(self, rng: np.random.Generator, size: int) -> Array:
        # psd_sqrt instead of Cholesky so singular covariances sample fine
        root = psd_sqrt(self.cov)
        z = rng.standard_normal((size, self.dim))
        return self.mean + z @ root.T


@dataclass(frozen=True, eq=False)
class FiniteSupportPrior:
    """Discrete prior on a fixed set of support points.

    Support points live in the unit ball; weights are a probability
    vector. Moments are exact sums, which makes this the reference family
    for enumeration oracles.
    """

    atoms: Array
    weights: Array

    def __post_init__(self, tols: Tolerances = DEFAULT_TOLERANCES):
        atoms = np.asarray(self.atoms, dtype=np.float64)
        weights = np.asarray(self.weights, dtype=np.float64)
        if atoms.ndim != 2:
            raise ValueError(f"atoms must be (n, d), got shape {atoms.shape}")
        if weights.shape != (atoms.shape[0],):
            raise ValueError(
                f"weights shape {weights.shape} does not match {atoms.shape[0]} atoms"
            )
        if atoms.shape[0] == 0:
            raise ValueError("need at least one support point")
        if np.any(weights < 0):
            raise ValueError("weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > tols.prior_weight_sum_abs:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        norms = np.linalg.norm(atoms, axis=1)
        worst = float(norms.max())
        if worst > 1.0 + tols.norm_slack:
            raise ValueError(f"support points must lie in the unit ball, max norm {worst}")
        atoms = atoms.copy()
        weights = weights.copy()
        atoms.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self) -> int:
        return self.atoms.shape[1]

    @property
    def norm_bound_violated(self) -> bool:
        return False

    def moments(self) -> Tuple[Array, PsdMatrix]:
        mean = self.weights @ self.atoms
        centered = self.atoms - mean
        cov = (self.weights[:, None] * centered).T @ centered
        return mean, PsdMatrix.unchecked(cov)

    def sample(self, rng: np.random.Generator) -> Array:
        return self.atoms[rng.choice(self.atoms.shape[0], p=self.weights)]

    def sample_many(self, rng: np.random.Generator, size: int) -> Array:
        idx = rng.choice(self.atoms.shape[0], size=size, p=self.weights)
        return self.atoms[idx]


@dataclass(frozen=True, eq=False)
class UniformBallPrior:
    """Uniform prior on the Euclidean ball of the given radius.

    The covariance is radius^2 / (dim + 2) times the identity; for dim = 2
    and radius r that is r^2 / 4 * I.
    """

    dim: int
    radius: float = 1.0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not 0 < self.radius <= 1.0:
            raise ValueError(f"radius must be in (0, 1], got {self.radius}")

    @property
    def norm_bound_violated(self) -> bool:
        return False

    def moments(self) -> Tuple[Array, PsdMatrix]:
        mean = np.zeros(self.dim)
        cov = self.radius**2 / (self.dim + 2) * np.eye(self.dim)
        return mean, PsdMatrix.unchecked(cov)

    def sample(self, rng: np.random.Generator) -> Array:
        return self.sample_many(rng, 1)[0]

    def sample_many(self, rng: np.random.Generator, size: int) -> Array:
        # direction from a normalized Gaussian, radius from U^(1/d) scaling
        z = rng.standard_normal((size, self.dim))
        norms = np.linalg.norm(z, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        radii = self.radius * rng.random(size) ** (1.0 / self.dim)
        return z / norms * radii[:, None]


Prior = GaussianPrior | FiniteSupportPrior | UniformBallPrior


def prior_moments(prior: Prior) -> Tuple[Array, PsdMatrix]:
    """Exact mean vector and covariance matrix of a prior."""
    return prior.moments()


def sample_prior(prior: Prior, rng: np.random.Generator) -> Array:
    """One parameter draw from a prior."""
    return prior.sample(rng)


# ---------------------------------------------------------------------------
# noises
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianNoise:
    """Reward = mean + N(0, sd^2)."""

    sd: float

    def __post_init__(self):
        if self.sd <= 0:
            raise ValueError(f"sd must be positive, got {self.sd}")

    @property
    def sigma_sq_bound(self) -> float:
        return self.sd**2

    @property
    def requires_unit_interval_mean(self) -> bool:
        return False

    @property
    def finite_outcomes(self) -> Optional[Tuple[float, ...]]:
        return None

    def sample_reward(self, mean: float, rng: np.random.Generator) -> float:
        return float(mean + self.sd * rng.standard_normal())

    def likelihood(self, y: float, mean: ArrayLike) -> Array:
        mean = np.asarray(mean, dtype=np.float64)
        z = (y - mean) / self.sd
        return np.exp(-0.5 * z * z) / (self.sd * np.sqrt(2.0 * np.pi))


@dataclass(frozen=True)
class BernoulliMeanNoise:
    """Reward in {0, 1} with success probability equal to the mean.

    The conditional mean must lie in [0, 1]; anything else raises
    :class:`MeanOutOfRange`. The conditional variance mean*(1-mean) is
    bounded by 1/4 uniformly.
    """

    @property
    def sigma_sq_bound(self) -> float:
        return 0.25

    @property
    def requires_unit_interval_mean(self) -> bool:
        return True

    @property
    def finite_outcomes(self) -> Tuple[float, ...]:
        return (0.0, 1.0)

    def _check_mean(self, mean: ArrayLike) -> Array:
        arr = np.asarray(mean, dtype=np.float64)
        slack = DEFAULT_TOLERANCES.norm_slack
        if np.any(arr < -slack) or np.any(arr > 1.0 + slack):
            bad = arr if arr.ndim == 0 else arr[(arr < -slack) | (arr > 1.0 + slack)]
            raise MeanOutOfRange(
                f"Bernoulli mean must lie in [0, 1], got {np.atleast_1d(bad)[0]!r}"
            )
        return np.clip(arr, 0.0, 1.0)

    def sample_reward(self, mean: float, rng: np.random.Generator) -> float:
        p = float(self._check_mean(mean))
        return float(rng.random() < p)

    def likelihood(self, y: float, mean: ArrayLike) -> Array:
        p = self._check_mean(mean)
        if y == 1.0:
            return np.asarray(p)
        if y == 0.0:
            return np.asarray(1.0 - p)
        raise ValueError(f"Bernoulli outcome must be 0 or 1, got {y!r}")


@dataclass(frozen=True)
class UniformCenteredNoise:
    """Reward = mean + U(-half_width, half_width); variance half_width^2 / 3."""

    half_width: float

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")

    @property
    def sigma_sq_bound(self) -> float:
        return self.half_width**2 / 3.0

    @property
    def requires_unit_interval_mean(self) -> bool:
        return False

    @property
    def finite_outcomes(self) -> Optional[Tuple[float, ...]]:
        return None

    def sample_reward(self, mean: float, rng: np.random.Generator) -> float:
        return float(mean + rng.uniform(-self.half_width, self.half_width))

    def likelihood(self, y: float, mean: ArrayLike) -> Array:
        mean = np.asarray(mean, dtype=np.float64)
        inside = np.abs(y - mean) <= self.half_width
        return np.where(inside, 1.0 / (2.0 * self.half_width), 0.0)


@dataclass(frozen=True)
class StudentTNoise:
    """Reward = mean + scale * t(dof); heavy tailed but finite variance.

    Requires dof > 2 so the conditional variance scale^2 * dof / (dof - 2)
    exists. Useful for exercising bounds that only need a second moment.
    """

    dof: float = 3.0
    scale: float = 1.0

    def __post_init__(self):
        if self.dof <= 2:
            raise ValueError(f"dof must exceed 2 for finite variance, got {self.dof}")
        if self.scale <= 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "_log_const", self._log_norm_const())

    @property
    def sigma_sq_bound(self) -> float:
        return self.scale**2 * self.dof / (self.dof - 2.0)

    @property
    def requires_unit_interval_mean(self) -> bool:
        return False

    @property
    def finite_outcomes(self) -> Optional[Tuple[float, ...]]:
        return None

    def sample_reward(self, mean: float, rng: np.random.Generator) -> float:
        return float(mean + self.scale * rng.standard_t(self.dof))

    def _log_norm_const(self) -> float:
        from scipy.special import gammaln

        return float(
            gammaln((self.dof + 1.0) / 2.0)
            - gammaln(self.dof / 2.0)
            - 0.5 * np.log(self.dof * np.pi)
            - np.log(self.scale)
        )

    def likelihood(self, y: float, mean: ArrayLike) -> Array:
        mean = np.asarray(mean, dtype=np.float64)
        z = (y - mean) / self.scale
        log_pdf = self._log_const - (self.dof + 1.0) / 2.0 * np.log1p(z * z / self.dof)
        return np.exp(log_pdf)


Noise = GaussianNoise | BernoulliMeanNoise | UniformCenteredNoise | StudentTNoise


def sample_reward(noise: Noise, mean: float, rng: np.random.Generator) -> float:
    """One reward draw with the given conditional mean."""
    return noise.sample_reward(mean, rng)


def likelihood(noise: Noise, y: float, mean: ArrayLike) -> Array:
    """Density (or pmf) of outcome y at the given mean(s), vectorized."""
    return noise.likelihood(y, mean)
