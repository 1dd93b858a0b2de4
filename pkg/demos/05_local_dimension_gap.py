"""
Local dimensions and the gap below them
=======================================

Along a typical path the local dimension of Bernoulli(0.3) equals the
entropy ratio H(0.3)/log 3, which sits strictly above the correlation
dimension.  For the uniform measure both coincide.
"""

import math

from morandim.dimension import consistency_check, local_dim_sequence, lower_hausdorff_estimate
from morandim.geometry import MoranGeometrySpec
from morandim.symbolic import ProductMeasureSpec

cantor = MoranGeometrySpec.cantor()
mu = ProductMeasureSpec.bernoulli((0.3, 0.7))

# hand-picked paths are not typical
print("000...", local_dim_sequence(mu, cantor, (0,) * 100).lower)
print("0101..", local_dim_sequence(mu, cantor, (0, 1) * 50).lower)

est = lower_hausdorff_estimate(mu, cantor, n_paths=100, depth=10_000, seed=0)
h = -(0.3 * math.log(0.3) + 0.7 * math.log(0.7)) / math.log(3)
print(f"essinf over 100 paths {est.value:.4f}, entropy ratio {h:.4f}")

for m in (mu, ProductMeasureSpec.bernoulli((0.5, 0.5))):
    rep = consistency_check(m, cantor)
    print(rep.values, "ldimH", round(rep.lower_hausdorff.value, 4), "gap", round(rep.gap, 4), "passed", rep.passed)
