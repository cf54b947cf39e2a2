"""Compare the truncated tail estimator with Hill, the truncated Pareto fit, GPD MLE and the moment estimator.

Run:  python3 demos/03_baselines.py
"""

import numpy as np

from trunctail import ParentModel, TruncationSpec, baselines, sample_truncated, tpot
from trunctail.distributions import truncated_quantile

model, trunc = ParentModel.pareto(), TruncationSpec.at_level(0.99)
x = np.sort(sample_truncated(model, trunc, 500, seed=3))
k, p = 300, 0.01
target = float(truncated_quantile(model, trunc, 1 - p))

fit = tpot.fit_sample(x, k)
tp = baselines.trunc_pareto_fit(x, k)
mle = baselines.classical_gpd_mle(tpot.exceedances(x, k))
mom = baselines.moment_estimator(x, k)

print(f"true xi = 1, true Q_T(0.99) = {target:.2f}, k = {k}\n")
print(f"{'method':<22}{'xi':>8}{'Q(0.99)':>10}")
print(f"{'truncated GPD':<22}{fit.xi:>8.3f}{tpot.quantile_truncated(fit, p):>10.2f}")
print(f"{'truncated Pareto':<22}{tp.xi:>8.3f}{tp.quantile(p):>10.2f}")
print(f"{'classical GPD MLE':<22}{mle.xi:>8.3f}{mle.quantile(p):>10.2f}")
print(f"{'moment estimator':<22}{mom.xi:>8.3f}{mom.quantile(p):>10.2f}")
print(f"{'Hill':<22}{baselines.hill(x, k):>8.3f}{'':>10}")

# The untruncated methods read the flattening tail as a lighter tail and under-estimate xi.
# The moment quantile scales by M1 (1 - xi), which shrinks as xi approaches 1; hence its low value here.
