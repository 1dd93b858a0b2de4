"""
Cylinder masses and correlation sums
====================================

A Bernoulli(0.3) measure on binary sequences.  Cylinder masses are products
of per-level probabilities, kept as logs so deep words never underflow.
"""

import math

import numpy as np

from morandim.symbolic import (
    ProductMeasureSpec,
    correlation_sum_bruteforce,
    correlation_sum_sequence,
    cylinder_measure,
    sample_paths,
)

mu = ProductMeasureSpec.bernoulli((0.3, 0.7))

for word in [(), (0,), (0, 1), (1, 1, 1)]:
    print(word, cylinder_measure(mu, word).value)

# 2^-5000 is below the smallest double, its log is not
print("log mu[0^5000] =", cylinder_measure(ProductMeasureSpec.uniform(mu.space), (0,) * 5000).log_value)

# sum of squared masses over a whole level: factorized vs enumerated
logs = correlation_sum_sequence(mu, 12)
for n in (1, 3, 12):
    print(n, math.exp(logs[n - 1]), correlation_sum_bruteforce(mu, n))

# the growth rate per level is p^2 + (1-p)^2 = 0.58
print("ratios:", np.exp(np.diff(logs))[:4])

# sampled paths reproduce the symbol frequencies
paths = sample_paths(mu, seed=0, n_paths=50_000, depth=4)
print("freq of 0 at each level:", (paths == 0).mean(axis=0))
