"""One observation can inflate the posterior variance.

With Gaussian everything, conditioning never increases uncertainty: the
posterior covariance is a deterministic contraction of the prior. This
script walks through the discrete setup where that intuition breaks.
The prior puts most mass at 0 with small side lobes at 1/4 and 3/4, the
reward is a Bernoulli coin whose bias is the scalar parameter itself,
and a single observed success wipes out the mass at 0.

Run it directly: python3 demos/counterexample_walkthrough.py
"""
import numpy as np

from ellipsim.posterior import counterexample_prior, counterexample_report

p = 0.05
prior = counterexample_prior(p)

print("prior support and weights")
for atom, weight in zip(prior.atoms.ravel(), prior.weights):
    print(f"  theta = {atom:4.2f}   weight = {weight:.3f}")
_, prior_cov = prior.moments()
print(f"prior variance: {prior_cov.mat[0, 0]:.6f}")
print()

# observe a single success at action a = 1
for outcome in (1.0, 0.0):
    report = counterexample_report(p, outcome=outcome)
    print(f"after observing y = {outcome:g} (probability {report.outcome_probability:.3f})")
    print(f"  posterior weights : {np.round(report.posterior_weights, 4)}")
    print(f"  posterior variance: {report.posterior_variance:.6f}")
    print(f"  inflated          : {report.variance_inflated}")
    print()

# a success leaves a uniform coin flip between 1/4 and 3/4, variance
# exactly 1/16 = 0.0625, above the prior variance for every small p
print("sweep over the prior weight knob")
print(f"{'p':>6} {'prior var':>11} {'posterior var':>14} inflated")
for p in (0.01, 0.05, 0.10, 1 / 6, 0.20, 0.24):
    report = counterexample_report(p)
    print(
        f"{p:6.3f} {report.prior_variance:11.6f} "
        f"{report.posterior_variance:14.6f} {report.variance_inflated}"
    )
print()
print("posterior variance after a success is always 1/16, whatever p;")
print("inflation happens exactly when the prior variance sits below it")
