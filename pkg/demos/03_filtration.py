"""
Stopping-time filtrations
=========================

Q_n collects the words whose interval first drops to the level-n minimum
diameter.  With unequal ratios the words have mixed lengths.
"""

from fractions import Fraction as F

from morandim.filtration import build_moran_filtration, level_log_sum_squares, validate_filtration
from morandim.geometry import MoranGeometrySpec
from morandim.symbolic import ProductMeasureSpec, format_word

uneven = MoranGeometrySpec.homogeneous((F(1, 2), F(1, 4)))
filt = build_moran_filtration(uneven, 6)
for n in range(1, 5):
    words = filt.levels[n - 1]
    print(n, f"gamma={filt.gamma[n - 1]:.4g}", [format_word(w) for w in words][:8], "..." if len(words) > 8 else "")

mu = ProductMeasureSpec.bernoulli((0.2, 0.8))
print("log sum mu(Q)^2:", [round(level_log_sum_squares(filt, mu, n), 4) for n in range(1, 7)])

# large levels keep aggregated statistics without listing every word
big = build_moran_filtration(MoranGeometrySpec.cantor(), 30)
print("level 30 size", big.sizes[29], "words listed:", big.levels[29] is not None)

rep = validate_filtration(big)
print(rep.verdict, {k: c.status for k, c in rep.conditions.items()})
