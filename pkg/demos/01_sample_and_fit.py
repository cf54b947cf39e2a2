"""Draw a truncated Pareto sample, fit the truncated tail model and read off the main estimates.

Run:  python3 demos/01_sample_and_fit.py
"""

import warnings

from trunctail import ParentModel, TruncationSpec, sample_truncated, tpot
from trunctail.distributions import truncated_quantile

# A unit Pareto cut at its 99% quantile, so the true right endpoint is 100.
model = ParentModel.pareto()
trunc = TruncationSpec.at_level(0.99)
x = sample_truncated(model, trunc, 500, seed=7)
print(f"n = {x.size}, largest observation = {x.max():.2f}")

# Use the top k = 150 exceedances over X_{n-k,n}.
fit = tpot.fit_sample(x, 150)
print(f"xi = {fit.xi:.3f}  sigma = {fit.sigma:.3f}  threshold = {fit.threshold:.3f}  converged = {fit.converged}")

d = tpot.odds_estimator(fit)
print(f"odds of the truncated mass D = {d:.4f} (true value 0.01/0.99 = {0.01 / 0.99:.4f})")
print(f"endpoint estimate = {tpot.endpoint_estimator(fit):.1f} (true endpoint 100)")

for p in (0.01, 0.005, 0.001):
    est = tpot.quantile_truncated(fit, p)
    true = float(truncated_quantile(model, trunc, 1 - p))
    print(f"Q_T(1-{p}): estimate {est:8.2f}   true {true:8.2f}")

# The parent (untruncated) quantile can be reconstructed only above the truncated mass.
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    print(f"parent quantile Q_Y(1-0.02) = {tpot.quantile_parent_reconstructed(fit, 0.02):.2f} (true 50)")
