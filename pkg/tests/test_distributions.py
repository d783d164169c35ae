"""Priors and noise families against independent scipy / Monte Carlo oracles."""
import numpy as np
import pytest
import scipy.integrate
import scipy.stats

from ellipsim.distributions import (
    BernoulliMeanNoise,
    FiniteSupportPrior,
    GaussianNoise,
    GaussianPrior,
    MeanOutOfRange,
    StudentTNoise,
    UniformBallPrior,
    UniformCenteredNoise,
    likelihood,
    prior_moments,
    sample_prior,
    sample_reward,
)
from ellipsim.linalg import PsdMatrix

SEED = 915


# ---------------------------------------------------------------------------
# priors
# ---------------------------------------------------------------------------


def test_finite_support_moments_match_hand_sums():
    atoms = np.array([[0.1, 0.2], [0.5, -0.3], [-0.4, 0.0]])
    weights = np.array([0.2, 0.5, 0.3])
    prior = FiniteSupportPrior(atoms=atoms, weights=weights)
    mean, cov = prior.moments()

    ref_mean = np.zeros(2)
    for w, a in zip(weights, atoms):
        ref_mean += w * a
    ref_cov = np.zeros((2, 2))
    for w, a in zip(weights, atoms):
        d = a - ref_mean
        ref_cov += w * np.outer(d, d)

    assert np.allclose(mean, ref_mean)
    assert np.allclose(cov.mat, ref_cov)


def test_finite_support_validation():
    good = np.array([[0.5], [-0.5]])
    with pytest.raises(ValueError, match="nonnegative"):
        FiniteSupportPrior(atoms=good, weights=np.array([1.5, -0.5]))
    with pytest.raises(ValueError, match="sum to 1"):
        FiniteSupportPrior(atoms=good, weights=np.array([0.6, 0.6]))
    with pytest.raises(ValueError, match="unit ball"):
        FiniteSupportPrior(atoms=np.array([[1.5]]), weights=np.array([1.0]))
    with pytest.raises(ValueError, match="at least one"):
        FiniteSupportPrior(atoms=np.zeros((0, 2)), weights=np.zeros(0))


def test_finite_support_sampling_frequencies():
    prior = FiniteSupportPrior(
        atoms=np.array([[0.0], [1.0]]), weights=np.array([0.3, 0.7])
    )
    rng = np.random.default_rng(SEED)
    draws = prior.sample_many(rng, 4000)
    frac = float(np.mean(draws[:, 0] == 1.0))
    # binomial sd at n=4000 is about 0.0072; allow 4 of those
    assert abs(frac - 0.7) < 0.03


def test_gaussian_prior_moments_and_sampling():
    mean = np.array([1.0, -2.0])
    cov = np.array([[2.0, 0.5], [0.5, 1.0]])
    prior = GaussianPrior(mean=mean, cov=PsdMatrix(cov))
    m, c = prior.moments()
    assert np.allclose(m, mean)
    assert np.allclose(c.mat, cov)

    rng = np.random.default_rng(SEED)
    draws = prior.sample_many(rng, 20_000)
    assert np.allclose(draws.mean(axis=0), mean, atol=0.05)
    assert np.allclose(np.cov(draws.T), cov, atol=0.08)


def test_gaussian_prior_singular_covariance_sampling():
    # degenerate direction must carry exactly zero variance in samples
    cov = np.array([[1.0, 1.0], [1.0, 1.0]])
    prior = GaussianPrior(mean=np.zeros(2), cov=PsdMatrix(cov))
    rng = np.random.default_rng(SEED)
    draws = prior.sample_many(rng, 500)
    null_dir = np.array([1.0, -1.0]) / np.sqrt(2)
    assert np.max(np.abs(draws @ null_dir)) < 1e-12


def test_uniform_ball_counts_as_unit_ball_prior():
    prior = UniformBallPrior(dim=3, radius=0.8)
    assert not prior.norm_bound_violated
    rng = np.random.default_rng(SEED)
    draws = prior.sample_many(rng, 5000)
    assert np.linalg.norm(draws, axis=1).max() <= 0.8 + 1e-12


def test_uniform_ball_covariance_against_monte_carlo():
    # closed form r^2/(d+2) I, oracle is the empirical covariance
    prior = UniformBallPrior(dim=4, radius=1.0)
    _, cov = prior.moments()
    assert np.allclose(cov.mat, np.eye(4) / 6.0)

    rng = np.random.default_rng(SEED)
    draws = prior.sample_many(rng, 200_000)
    emp = draws.T @ draws / draws.shape[0]
    assert np.allclose(emp, cov.mat, atol=0.004)


def test_uniform_ball_validation():
    with pytest.raises(ValueError):
        UniformBallPrior(dim=0)
    with pytest.raises(ValueError):
        UniformBallPrior(dim=2, radius=1.5)
    with pytest.raises(ValueError):
        UniformBallPrior(dim=2, radius=0.0)


def test_prior_dispatch_helpers():
    prior = UniformBallPrior(dim=2)
    mean, cov = prior_moments(prior)
    assert mean.shape == (2,)
    assert cov.dim == 2
    rng = np.random.default_rng(SEED)
    theta = sample_prior(prior, rng)
    assert theta.shape == (2,)


# ---------------------------------------------------------------------------
# noise families
# ---------------------------------------------------------------------------


def test_gaussian_noise_likelihood_matches_scipy():
    noise = GaussianNoise(sd=0.7)
    means = np.array([-1.0, 0.0, 2.5])
    got = noise.likelihood(0.3, means)
    ref = scipy.stats.norm.pdf(0.3, loc=means, scale=0.7)
    assert np.allclose(got, ref, rtol=1e-12)
    assert noise.sigma_sq_bound == pytest.approx(0.49)


def test_gaussian_noise_rejects_bad_sd():
    with pytest.raises(ValueError):
        GaussianNoise(sd=0.0)


def test_bernoulli_noise_basics():
    noise = BernoulliMeanNoise()
    assert noise.sigma_sq_bound == 0.25
    assert noise.requires_unit_interval_mean
    assert noise.finite_outcomes == (0.0, 1.0)
    means = np.array([0.2, 0.9])
    assert np.allclose(noise.likelihood(1.0, means), means)
    assert np.allclose(noise.likelihood(0.0, means), 1.0 - means)


def test_bernoulli_noise_mean_range():
    noise = BernoulliMeanNoise()
    with pytest.raises(MeanOutOfRange):
        noise.likelihood(1.0, np.array([0.5, 1.2]))
    # rounding-level overshoot is clipped, not fatal
    got = noise.likelihood(1.0, np.array([1.0 + 1e-14]))
    assert got[0] == 1.0


def test_bernoulli_sampling_is_binary_with_right_rate():
    noise = BernoulliMeanNoise()
    rng = np.random.default_rng(SEED)
    draws = np.array([noise.sample_reward(0.3, rng) for _ in range(2000)])
    assert set(np.unique(draws)) <= {0.0, 1.0}
    assert abs(draws.mean() - 0.3) < 0.04


def test_uniform_noise_boxcar_density():
    noise = UniformCenteredNoise(half_width=0.5)
    assert noise.sigma_sq_bound == pytest.approx(0.25 / 3.0)
    means = np.array([0.0, 1.0])
    got = noise.likelihood(0.25, means)
    assert got[0] == pytest.approx(1.0)  # 1/(2*0.5) inside the support
    assert got[1] == 0.0


def test_student_t_likelihood_matches_scipy():
    noise = StudentTNoise(dof=3.0, scale=0.6)
    means = np.linspace(-2.0, 2.0, 9)
    for y in (-1.3, 0.0, 0.8):
        got = noise.likelihood(y, means)
        ref = scipy.stats.t.pdf(y, df=3.0, loc=means, scale=0.6)
        assert np.allclose(got, ref, rtol=1e-12)


def test_student_t_variance_matches_scipy():
    noise = StudentTNoise(dof=5.0, scale=1.2)
    assert noise.sigma_sq_bound == pytest.approx(
        scipy.stats.t.var(df=5.0, scale=1.2)
    )


def test_student_t_requires_finite_variance():
    with pytest.raises(ValueError):
        StudentTNoise(dof=2.0, scale=1.0)


@pytest.mark.parametrize(
    "noise,lo,hi,points",
    [
        (GaussianNoise(sd=0.8), -np.inf, np.inf, None),
        # the boxcar integrand is discontinuous, so hand quad the breaks
        (UniformCenteredNoise(half_width=0.4), -1.0, 2.0, (-0.03, 0.77)),
        (StudentTNoise(dof=3.0, scale=0.5), -np.inf, np.inf, None),
    ],
)
def test_continuous_likelihoods_integrate_to_one(noise, lo, hi, points):
    mean = 0.37
    total, err = scipy.integrate.quad(
        lambda y: float(noise.likelihood(y, np.array([mean]))[0]),
        lo,
        hi,
        points=points,
    )
    assert total == pytest.approx(1.0, abs=max(1e-8, 10 * err))


def test_bernoulli_likelihood_sums_to_one():
    noise = BernoulliMeanNoise()
    means = np.array([0.1, 0.5, 0.95])
    total = noise.likelihood(0.0, means) + noise.likelihood(1.0, means)
    assert np.allclose(total, 1.0)


def test_reward_sampling_dispatch_and_moments():
    rng = np.random.default_rng(SEED)
    noise = GaussianNoise(sd=0.5)
    draws = np.array([sample_reward(noise, 1.0, rng) for _ in range(4000)])
    assert abs(draws.mean() - 1.0) < 0.03
    assert abs(draws.std() - 0.5) < 0.03
    vals = likelihood(noise, 1.0, np.array([1.0]))
    assert vals[0] == pytest.approx(scipy.stats.norm.pdf(0.0, scale=0.5))
