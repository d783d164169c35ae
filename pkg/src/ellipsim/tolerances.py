"""Numerical tolerance table shared across the package.

Every slack constant used by validation code lives here so that a single
override (programmatic or from a config file) changes behaviour everywhere.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Centralized tolerance constants.

    Attributes
    ----------
    symmetry_rel:
        Relative entrywise tolerance when deciding a matrix is symmetric.
    psd_slack:
        Allowed negative slack on the smallest eigenvalue of a matrix that
        is accepted as positive semidefinite, and the default slack for
        Loewner-order comparisons.
    weight_sum_abs:
        Absolute tolerance on probability weights summing to one after a
        posterior update.
    prior_weight_sum_abs:
        Absolute tolerance on prior weights summing to one at construction.
    norm_slack:
        Allowed excess over 1 for action and support-point Euclidean norms.
    inequality_slack:
        Default slack when checking analytic inequalities numerically.
    regret_slack:
        Allowed negative slack on per-round instantaneous regret.
    """

    symmetry_rel: float = 1e-12
    psd_slack: float = 1e-9
    weight_sum_abs: float = 1e-10
    prior_weight_sum_abs: float = 1e-12
    norm_slack: float = 1e-12
    inequality_slack: float = 1e-9
    regret_slack: float = 1e-12

    def replace(self, **overrides: float) -> "Tolerances":
        """Return a copy with the given fields overridden."""
        return dataclasses.replace(self, **overrides)


DEFAULT_TOLERANCES = Tolerances()
