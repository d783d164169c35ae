"""Potential tracking and the expected-potential verifier.

The exact-tree verifier is checked against a from-scratch enumeration
written with plain dictionaries, so the two implementations share no code.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ellipsim.distributions import (
    BernoulliMeanNoise,
    FiniteSupportPrior,
    GaussianNoise,
    UniformBallPrior,
    UniformCenteredNoise,
)
from ellipsim.linalg import PsdMatrix, random_psd
from ellipsim.posterior import DegenerateWeights, EngineConfig
from ellipsim.potential import (
    ClassicalPotential,
    PotentialTrace,
    adversarial_action,
    verify_expected_potential,
)

SEED = 1789


# ---------------------------------------------------------------------------
# classical tracker
# ---------------------------------------------------------------------------


def test_classical_updates_match_dense_inverse():
    rng = np.random.default_rng(SEED)
    dim, lam, horizon = 4, 2.0, 30
    tracker = ClassicalPotential(dim=dim, lam=lam)
    gram = lam * np.eye(dim)
    for _ in range(horizon):
        a = rng.standard_normal(dim)
        a /= np.linalg.norm(a)
        sigma = np.linalg.inv(gram)
        expected_quad = a @ sigma @ a
        got = tracker.step(a)
        assert got == pytest.approx(expected_quad, abs=1e-10)
        gram += np.outer(a, a)

    sign, logdet_final = np.linalg.slogdet(np.linalg.inv(gram))
    assert sign == 1.0
    _, logdet_first = np.linalg.slogdet(np.eye(dim) / lam)
    assert tracker.logdet_bound() == pytest.approx(
        2.0 * (logdet_first - logdet_final), abs=1e-9
    )


def test_classical_rejects_long_actions_and_small_lambda():
    tracker = ClassicalPotential(dim=2, lam=1.0)
    with pytest.raises(ValueError):
        tracker.step(np.array([1.1, 0.0]))
    with pytest.raises(ValueError):
        ClassicalPotential(dim=2, lam=0.5)


@settings(max_examples=60, deadline=None)
@given(
    actions=arrays(
        np.float64, (25, 3), elements=st.floats(-1.0, 1.0, allow_nan=False)
    ),
    lam=st.floats(1.0, 10.0),
)
def test_classical_bound_chain_on_arbitrary_sequences(actions, lam):
    """Quad sum <= log-det bound <= dimension bound, for any action stream."""
    norms = np.linalg.norm(actions, axis=1, keepdims=True)
    actions = actions / np.maximum(norms, 1.0)
    tracker = ClassicalPotential(dim=3, lam=lam)
    total = sum(tracker.step(a) for a in actions)
    assert total <= tracker.logdet_bound() + 1e-9
    assert tracker.logdet_bound() <= tracker.dimension_bound(len(actions)) + 1e-9


# ---------------------------------------------------------------------------
# adversarial action rule
# ---------------------------------------------------------------------------


def test_adversarial_action_is_top_eigenvector():
    rng = np.random.default_rng(SEED)
    gamma = random_psd(4, 1.0, rng)
    a = adversarial_action(gamma)
    assert np.linalg.norm(a) == pytest.approx(1.0)
    eigvals, eigvecs = np.linalg.eigh(gamma.mat)
    assert abs(a @ eigvecs[:, -1]) == pytest.approx(1.0, abs=1e-8)
    assert gamma.quad_form(a) == pytest.approx(eigvals[-1], abs=1e-9)


def test_adversarial_action_tie_breaks_deterministically():
    assert np.allclose(adversarial_action(PsdMatrix.identity(3)), [1.0, 0.0, 0.0])
    gamma = PsdMatrix(np.diag([2.0, 2.0, 1.0]))
    assert np.allclose(adversarial_action(gamma), [1.0, 0.0, 0.0])
    zero = PsdMatrix.unchecked(np.zeros((2, 2)))
    assert np.allclose(adversarial_action(zero), [1.0, 0.0])


def test_adversarial_action_sign_convention():
    # top eigenvector of this matrix is along (1, -1); the first nonzero
    # entry must come out positive whatever eigh returns
    gamma = PsdMatrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    a = adversarial_action(gamma)
    assert a[0] > 0


# ---------------------------------------------------------------------------
# general potential trace
# ---------------------------------------------------------------------------


def test_trace_bound_matches_dense_logdet():
    rng = np.random.default_rng(SEED)
    gamma1 = random_psd(3, 0.8, rng)
    trace = PotentialTrace(gamma1=gamma1, sigma_sq=0.5)
    horizon = 40
    _, ref = np.linalg.slogdet(np.eye(3) + horizon * gamma1.mat)
    assert trace.logdet_growth(horizon) == pytest.approx(ref, abs=1e-10)
    # sigma factor saturates at 1 for sub-unit noise
    assert trace.sigma_factor == 1.0
    assert trace.potential_bound(horizon) == pytest.approx(2.0 * ref, abs=1e-9)


def test_trace_sigma_factor_above_one():
    trace = PotentialTrace(gamma1=PsdMatrix.identity(2), sigma_sq=4.0)
    assert trace.sigma_factor == 4.0


def test_trace_rejects_negative_quads():
    trace = PotentialTrace(gamma1=PsdMatrix.identity(2), sigma_sq=1.0)
    with pytest.raises(ValueError):
        trace.append_quads(np.array([1.0, 0.0]), -1e-3)


def test_trace_runs_classical_tracker_in_lockstep():
    rng = np.random.default_rng(SEED)
    trace = PotentialTrace(gamma1=PsdMatrix.identity(3), sigma_sq=1.0, lam=2.0)
    standalone = ClassicalPotential(dim=3, lam=2.0)
    quads = []
    for _ in range(10):
        a = rng.standard_normal(3)
        a /= np.linalg.norm(a)
        trace.general_step(PsdMatrix.identity(3), a)
        quads.append(standalone.step(a))
    assert trace.sigma_quads == pytest.approx(quads, abs=1e-12)
    assert trace.sigma_sum == pytest.approx(sum(quads), abs=1e-12)
    assert trace.classical.logdet_bound() == pytest.approx(
        standalone.logdet_bound(), abs=1e-12
    )


# ---------------------------------------------------------------------------
# exact enumeration path
# ---------------------------------------------------------------------------


def brute_force_expected_potential(atoms, weights, horizon):
    """Scalar Bernoulli tree with explicit frontier dictionaries."""
    atoms = np.asarray(atoms, dtype=float)

    def variance(w):
        m1 = float(np.dot(w, atoms))
        m2 = float(np.dot(w, atoms**2))
        return m2 - m1 * m1

    frontier = [(1.0, np.asarray(weights, dtype=float))]
    total = 0.0
    per_round = []
    for _ in range(horizon):
        round_sum = 0.0
        grown = []
        for prob, w in frontier:
            round_sum += prob * variance(w)
            p_one = float(np.dot(w, atoms))
            for y, p_y in ((1.0, p_one), (0.0, 1.0 - p_one)):
                if p_y <= 0:
                    continue
                lik = atoms if y == 1.0 else 1.0 - atoms
                child = w * lik
                child /= child.sum()
                grown.append((prob * p_y, child))
        per_round.append(round_sum)
        total += round_sum
        frontier = grown
    return per_round, total


def test_exact_tree_matches_brute_force():
    atoms = np.array([0.2, 0.6])
    weights = np.array([0.5, 0.5])
    prior = FiniteSupportPrior(atoms=atoms[:, None], weights=weights)
    report = verify_expected_potential(
        prior, BernoulliMeanNoise(), horizon=4, replications=0
    )
    ref_rounds, ref_total = brute_force_expected_potential(atoms, weights, 4)
    assert report.exact
    assert report.stderr_total == 0.0
    assert report.mean_total == pytest.approx(ref_total, abs=1e-12)
    assert np.allclose(report.per_round_mean, ref_rounds, atol=1e-12)

    gamma1 = weights @ atoms**2 - (weights @ atoms) ** 2
    expected_bound = 2.0 * np.log1p(4 * gamma1)
    assert report.bound == pytest.approx(expected_bound, abs=1e-12)
    assert report.holds


def test_exact_tree_three_atoms_longer_horizon():
    atoms = np.array([0.1, 0.45, 0.9])
    weights = np.array([0.3, 0.45, 0.25])
    prior = FiniteSupportPrior(atoms=atoms[:, None], weights=weights)
    report = verify_expected_potential(
        prior, BernoulliMeanNoise(), horizon=8, replications=0
    )
    _, ref_total = brute_force_expected_potential(atoms, weights, 8)
    assert report.mean_total == pytest.approx(ref_total, abs=1e-11)


# ---------------------------------------------------------------------------
# Monte Carlo path
# ---------------------------------------------------------------------------


def test_monte_carlo_is_seed_deterministic():
    prior = FiniteSupportPrior(
        atoms=np.array([[0.2], [0.6]]), weights=np.array([0.5, 0.5])
    )
    noise = GaussianNoise(sd=0.5)  # continuous outcomes force the MC path
    kwargs = dict(
        horizon=5,
        replications=16,
        master_seed=7,
        engine=EngineConfig(kind="finite_support"),
    )
    first = verify_expected_potential(prior, noise, **kwargs)
    second = verify_expected_potential(prior, noise, **kwargs)
    assert not first.exact
    assert first.mean_total == second.mean_total
    assert first.stderr_total == second.stderr_total

    shifted = verify_expected_potential(
        prior, noise, horizon=5, replications=16, master_seed=8,
        engine=EngineConfig(kind="finite_support"),
    )
    assert shifted.mean_total != first.mean_total


def test_monte_carlo_requires_two_replications():
    prior = UniformBallPrior(dim=2)
    with pytest.raises(ValueError, match="replications"):
        verify_expected_potential(
            prior, GaussianNoise(sd=1.0), horizon=3, replications=1
        )


def test_monte_carlo_failure_budget_trips():
    # boxcar noise starves a sparse particle cloud of any surviving weight
    prior = UniformBallPrior(dim=1)
    noise = UniformCenteredNoise(half_width=0.005)
    with pytest.raises(DegenerateWeights):
        verify_expected_potential(
            prior,
            noise,
            horizon=2,
            replications=10,
            engine=EngineConfig(kind="particle", particles=20),
        )


def test_verification_report_serialization():
    prior = FiniteSupportPrior(
        atoms=np.array([[0.3], [0.7]]), weights=np.array([0.4, 0.6])
    )
    report = verify_expected_potential(
        prior, BernoulliMeanNoise(), horizon=3, replications=0
    )
    payload = report.to_dict()
    assert payload["exact"] is True
    assert payload["mean_total"] == report.mean_total
    assert len(payload["per_round_mean"]) == 3
