"""
Moran constructions on the line
===============================

Nested intervals from per-level ratios.  The checker reports which
structural conditions hold up to a depth, which fail exactly, and which
only show a trend.
"""

from fractions import Fraction as F

import numpy as np

from morandim.geometry import MoranGeometrySpec, clustering_diagnostic, project, realize, validate
from morandim.symbolic import ProductMeasureSpec

cantor = MoranGeometrySpec.cantor()
iv = realize(cantor, (0, 1, 1), exact=True)
print("E_011 =", [iv.left, iv.right], "diam", iv.diam)
print("pi(0101...) ~", project(cantor, (0, 1) * 20, 1e-12).x)

rep = validate(cantor, 8)
for name, c in rep.conditions.items():
    print(f"  {name}: {c.status}")

# children of ratio 3/5 at offsets 0 and 2/5 overlap on [2/5, 3/5]
overlap = MoranGeometrySpec.homogeneous((F(3, 5), F(3, 5)), (F(0), F(2, 5)))
m3 = validate(overlap, 2)["M3"]
print("overlap M3:", m3.status, m3.witness, m3.evidence["overlap"])

# ratios 2^-2, 2^-4, 2^-8, ...: each level shrinks as much as all previous ones together
dexp = MoranGeometrySpec(tuple((F(1, 2**2**j),) * 2 for j in range(1, 7)), ((F(1, 2**128),) * 2,))
t = validate(dexp, 6)["M5"].trend
print("M5 ratio sequence:", np.round(t.sequence, 4), "->", t.verdict)

# stopping-scale sets meeting a ball of the same radius
diag = clustering_diagnostic(cantor, ProductMeasureSpec.bernoulli((0.5, 0.5)), 100, 12, seed=0)
print("clustering sup over 100 points x 12 radii:", diag.sup_estimate)
