"""
Energies and where they blow up
===============================

The s-energy of a measure is finite below its correlation dimension and
infinite above it.  With a finite sample we see this as growth of the
truncated energy as the cutoff epsilon shrinks.
"""

from morandim.dimension import cordim_energy, energy_estimate, potential_ladder
from morandim.geometry import MoranGeometrySpec
from morandim.symbolic import ProductMeasureSpec

cantor = MoranGeometrySpec.cantor()
mu = ProductMeasureSpec.bernoulli((0.5, 0.5))

for s in (0.0, 0.5, 0.7):
    e = energy_estimate(mu, cantor, s, n_samples=100_000, seed=0)
    print(f"s={s}: values {e.values.round(3)}  growth {e.growth_exponent:+.3f}  diverging {e.diverging}")

# the potential at one point shows the same threshold
for s in (0.5, 0.7):
    pl = potential_ladder(mu, cantor, s, 0.0)
    print(f"potential at 0, s={s}: {pl.values.round(3)} diverging {pl.diverging}")

br = cordim_energy(mu, cantor, 0.0, 1.0, tol=0.05, n_samples=100_000, seed=0)
print(f"bracket [{br.lo:.4f}, {br.hi:.4f}]")
for s, d, g in br.probes:
    print(f"  probe s={s:.4f} diverging={d} growth={g:+.4f}")
