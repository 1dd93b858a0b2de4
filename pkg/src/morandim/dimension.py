"""Correlation, local and lower Hausdorff dimensions of measures on Moran constructions.

Three routes to the correlation dimension are provided:

* ``cordim_moran``: ``log sum_{w in Sigma_n} mu([w])^2 / log beta_n`` with
  ``beta_n`` the geometric mean of the level-``n`` diameters;
* ``cordim_filtration``: ``log sum_{Q in Q_n} mu(Q)^2 / log delta_n`` over a
  stopping-time filtration;
* ``cordim_paircount``: the log-log slope of the empirical correlation
  integral ``int mu(B(x, r)) dmu(x)``.

Limits inferior and superior at finite depth are replaced by the minimum and
maximum over the last ``tail_window`` terms; the full sequence is always
returned alongside.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from . import _trend
from .filtration import GeneralFiltration, build_moran_filtration, level_log_sum_squares
from .geometry import (
    MoranGeometrySpec,
    depth_for_diameter,
    level_log_diameters,
    log_diam_prefixes,
    m5_trend,
    m7_summary,
    project_paths,
    spaces_agree,
    validate,
)
from .symbolic import (
    ProductMeasureSpec,
    Word,
    correlation_sum_sequence,
    derive_seed,
    log_cylinder_prefixes,
    sample_path,
    sample_paths,
)

__all__ = [
    "DegenerateEstimateError",
    "ConsistencyError",
    "DimensionEstimate",
    "CorrelationIntegralCurve",
    "LocalDimensionSample",
    "LowerHausdorffEstimate",
    "PotentialEstimate",
    "PotentialLadder",
    "EnergyEstimate",
    "EnergyBracket",
    "Budgets",
    "ConsistencyReport",
    "cordim_moran",
    "cordim_filtration",
    "cordim_paircount",
    "local_dim_sequence",
    "lower_hausdorff_estimate",
    "sample_points",
    "default_radius_grid",
    "default_epsilon_ladder",
    "potential_estimate",
    "potential_ladder",
    "energy_estimate",
    "cordim_energy",
    "consistency_check",
]

MORAN, FILTRATION, PAIRCOUNT = "moran", "filtration", "paircount"

# minimum number of pairs at a radius for it to enter the slope fit
MIN_PAIRS = 10
# relative spread allowed among local slopes inside the fitted range
SLOPE_STABILITY = 0.10
# a sampled point stands for pi(sigma) only if its cylinder is this much smaller than the finest scale
RESOLUTION_FACTOR = 100.0


class DegenerateEstimateError(RuntimeError):
    """Every sample was excluded by the truncation radius."""


class ConsistencyError(AssertionError):
    """Two routes disagree beyond tolerance."""

    def __init__(self, report: "ConsistencyReport"):
        self.report = report
        super().__init__("; ".join(f.describe() for f in report.failures))


def _check_pair(measure: ProductMeasureSpec, geom: MoranGeometrySpec) -> None:
    if not spaces_agree(measure.space, geom.space):
        raise ValueError("measure and geometry live on different symbol spaces")


def _tail(seq: np.ndarray, window: int) -> np.ndarray:
    if window < 1:
        raise ValueError("tail_window must be >= 1")
    if len(seq) < window:
        raise ValueError(f"sequence of length {len(seq)} is shorter than tail_window={window}")
    return seq[-window:]


@dataclass
class DimensionEstimate:
    """``value = min(sequence[-tail_window:])`` together with its provenance.

    ``sum_log`` and ``denom_log`` are the numerator and denominator logs of
    each ``a_n``; ``indices`` are the levels ``n`` (or grid indices for the
    pair-count route).
    """

    route: str
    value: float
    sequence: np.ndarray
    sum_log: np.ndarray
    denom_log: np.ndarray
    indices: np.ndarray
    tail_window: int
    diagnostics: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "route": self.route,
            "value": self.value,
            "tail_window": self.tail_window,
            "n": self.indices.tolist(),
            "sum_log": self.sum_log.tolist(),
            "denom_log": self.denom_log.tolist(),
            "a_n": self.sequence.tolist(),
            "diagnostics": self.diagnostics,
            "warnings": list(self.warnings),
        }


def _estimate(route, sum_log, denom_log, tail_window, indices=None, warn=()):
    sum_log = np.asarray(sum_log, dtype=float)
    denom_log = np.asarray(denom_log, dtype=float)
    a = sum_log / denom_log + 0.0
    tail = _tail(a, tail_window)
    return DimensionEstimate(
        route=route,
        value=float(tail.min()),
        sequence=a,
        sum_log=sum_log,
        denom_log=denom_log,
        indices=np.arange(1, len(a) + 1) if indices is None else np.asarray(indices),
        tail_window=tail_window,
        diagnostics={
            "tail_min": float(tail.min()),
            "tail_max": float(tail.max()),
            "tail_variance": float(tail.var()),
        },
        warnings=list(warn),
    )


def cordim_moran(
    measure: ProductMeasureSpec, geom: MoranGeometrySpec, n_max: int = 30, tail_window: int = 5
) -> DimensionEstimate:
    """Correlation dimension from full-level cylinder sums.

    ``a_n = log prod_{j<=n} sum_i p_{j,i}^2 / log beta_n``. A warning is
    attached when the level diameters do not look comparable to a single
    ``beta_n`` (the estimate is still returned).
    """
    _check_pair(measure, geom)
    sum_log = correlation_sum_sequence(measure, n_max)
    m7 = m7_summary(geom, n_max)
    warn = []
    if m7["verdict"] == _trend.VIOLATION:
        warn.append(
            f"level diameters are not uniformly comparable to beta_n (C up to {m7['C']:.4g}, "
            f"growing={m7['C_growing']}); the cylinder-sum formula may not apply"
        )
    est = _estimate(MORAN, sum_log, m7["log_beta"], tail_window, warn=warn)
    est.diagnostics["C"] = m7["C"]
    return est


def cordim_filtration(
    measure: ProductMeasureSpec, filt: GeneralFiltration, tail_window: int = 5
) -> DimensionEstimate:
    """Correlation dimension ``log sum_{Q in Q_n} mu(Q)^2 / log delta_n`` over a filtration."""
    if filt.n_levels == 0:
        raise ValueError("filtration has no levels")
    sums = np.array([level_log_sum_squares(filt, measure, n) for n in range(1, filt.n_levels + 1)])
    warn = ["filtration was truncated before n_max"] if filt.truncated else []
    return _estimate(FILTRATION, sums, filt.log_delta, tail_window, warn=warn)


# --------------------------------------------------------------------------
# sampling and pair counting


def sample_points(
    measure: ProductMeasureSpec, geom: MoranGeometrySpec, n: int, depth: int, seed: int
) -> np.ndarray:
    """``n`` approximate draws from the pushforward measure (midpoints of depth-``depth`` cylinders)."""
    _check_pair(measure, geom)
    return project_paths(geom, sample_paths(measure, seed, n, depth))


def _resolution_depth(geom: MoranGeometrySpec, finest: float) -> int:
    return depth_for_diameter(geom, math.log(finest / RESOLUTION_FACTOR))


def default_radius_grid(geom: MoranGeometrySpec, r_levels: int = 21, lo_level: int = 2, hi_level: int = 12) -> np.ndarray:
    """Geometric grid from ``gamma_lo_level`` down to ``gamma_hi_level``."""
    g = np.exp(level_log_diameters(geom, hi_level)["min"])
    return np.geomspace(g[lo_level - 1], g[hi_level - 1], r_levels)


def _ordered_pairs_within(xs: np.ndarray, radii: np.ndarray) -> np.ndarray:
    # xs sorted; #{(i, j): i != j, |x_i - x_j| <= r}
    n = len(xs)
    base = np.arange(1, n + 1)
    return np.array([2 * int(np.sum(np.searchsorted(xs, xs + r, side="right") - base)) for r in radii], dtype=np.int64)


@dataclass
class CorrelationIntegralCurve:
    """Empirical correlation integral on a geometric radius grid and its log-log slope."""

    r: np.ndarray
    estimate: np.ndarray
    pair_counts: np.ndarray
    n_samples: int
    path_depth: int
    seed: int
    fit_lo: int
    fit_hi: int
    slope: float
    stderr: float
    intercept: float
    local_slopes: np.ndarray
    stable_window: bool
    warnings: list[str] = field(default_factory=list)

    def as_estimate(self) -> DimensionEstimate:
        """Table view with ``sum_log = log C(r)``, ``denom_log = log r``; the value is the fitted slope."""
        used = self.pair_counts >= MIN_PAIRS
        sum_log = np.log(self.estimate[used])
        denom_log = np.log(self.r[used])
        a = sum_log / denom_log + 0.0
        return DimensionEstimate(
            route=PAIRCOUNT,
            value=self.slope,
            sequence=a,
            sum_log=sum_log,
            denom_log=denom_log,
            indices=np.flatnonzero(used) + 1,
            tail_window=self.fit_hi - self.fit_lo + 1,
            diagnostics={
                "slope_stderr": self.stderr,
                "fit_range": [int(self.fit_lo) + 1, int(self.fit_hi) + 1],
                "stable_window": self.stable_window,
                "n_samples": self.n_samples,
                "path_depth": self.path_depth,
            },
            warnings=list(self.warnings),
        )

    def as_dict(self) -> dict:
        return {
            "r": self.r.tolist(),
            "estimate": self.estimate.tolist(),
            "pair_counts": self.pair_counts.tolist(),
            "n_samples": self.n_samples,
            "path_depth": self.path_depth,
            "seed": self.seed,
            "fit_range": [int(self.fit_lo), int(self.fit_hi)],
            "slope": self.slope,
            "stderr": self.stderr,
            "intercept": self.intercept,
            "local_slopes": self.local_slopes.tolist(),
            "stable_window": self.stable_window,
            "warnings": list(self.warnings),
        }


def _windowed_slopes(lr: np.ndarray, lc: np.ndarray, half: int) -> np.ndarray:
    out = np.full(len(lr), np.nan)
    for k in range(half, len(lr) - half):
        sl = slice(k - half, k + half + 1)
        out[k] = np.polyfit(lr[sl], lc[sl], 1)[0]
    return out


def _stable_range(local: np.ndarray, lo: int, hi: int) -> tuple[int, int] | None:
    """Widest ``[a, b]`` inside ``[lo, hi]`` whose local slopes vary by at most 10%."""
    best = None
    for a in range(lo, hi + 1):
        if np.isnan(local[a]):
            continue
        for b in range(hi, a + 1, -1):
            seg = local[a : b + 1]
            if np.isnan(seg).any():
                continue
            centre = abs(float(np.mean(seg)))
            if np.ptp(seg) <= SLOPE_STABILITY * centre:
                if best is None or b - a > best[1] - best[0]:
                    best = (a, b)
                break
    return best


def cordim_paircount(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    n_samples: int = 100_000,
    path_depth: int | None = None,
    r_grid: np.ndarray | None = None,
    seed: int = 0,
    r_levels: int = 21,
) -> CorrelationIntegralCurve:
    """Correlation integral ``#{i != j : |x_i - x_j| <= r} / (N (N - 1))`` and its slope.

    Points are midpoints of sampled depth-``path_depth`` cylinders. Radii with
    fewer than 10 pairs are dropped from the fit with a warning. The fit uses
    the widest sub-range (first and last radii excluded) over which 5-point
    local slopes vary by less than 10%; when no such range exists all
    interior radii are used and the curve is flagged ``stable_window=False``.
    """
    _check_pair(measure, geom)
    r = default_radius_grid(geom, r_levels) if r_grid is None else np.sort(np.asarray(r_grid, float))[::-1]
    if len(r) < 4:
        raise ValueError("need at least 4 radii")
    needed = _resolution_depth(geom, float(r.min()))
    if path_depth is None:
        path_depth = needed
    elif path_depth < needed:
        raise ValueError(f"path_depth={path_depth} too shallow for r_min={r.min():.3g}; need >= {needed}")
    xs = np.sort(sample_points(measure, geom, n_samples, path_depth, seed))
    counts = _ordered_pairs_within(xs, r)
    est = counts / (n_samples * (n_samples - 1.0))

    notes = []
    keep = np.flatnonzero(counts >= MIN_PAIRS)
    dropped = np.flatnonzero(counts < MIN_PAIRS)
    if dropped.size:
        msg = f"dropped {dropped.size} radii with fewer than {MIN_PAIRS} pairs (smallest kept r = {r[keep].min():.3g})"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    if keep.size < 4:
        raise DegenerateEstimateError("fewer than 4 radii carry enough pairs for a slope fit")
    lr, lc = np.log(r[keep]), np.log(est[keep])
    local = _windowed_slopes(lr, lc, half=2) if len(lr) >= 7 else np.full(len(lr), np.nan)
    lo, hi = 1, len(lr) - 2
    window = _stable_range(local, lo, hi)
    stable = window is not None and window[1] - window[0] >= 1
    if stable:
        a, b = window[0] - 2, window[1] + 2
        a, b = max(a, lo), min(b, hi)
    else:
        a, b = lo, hi
        notes.append("no range with local slopes stable to 10%; fitted all interior radii")
    fit = linregress(lr[a : b + 1], lc[a : b + 1])
    slope = float(fit.slope) + 0.0
    stderr = float(fit.stderr) if np.isfinite(fit.stderr) else 0.0
    return CorrelationIntegralCurve(
        r=r,
        estimate=est,
        pair_counts=counts,
        n_samples=n_samples,
        path_depth=path_depth,
        seed=seed,
        fit_lo=int(keep[a]),
        fit_hi=int(keep[b]),
        slope=slope,
        stderr=stderr,
        intercept=float(fit.intercept),
        local_slopes=local,
        stable_window=stable,
        warnings=notes,
    )


# --------------------------------------------------------------------------
# local dimensions


@dataclass
class LocalDimensionSample:
    """``b_n = log mu([sigma|_n]) / log diam(E_{sigma|_n})`` along one path.

    ``upper_is_equality`` records whether the geometry's M5 trend is
    consistent, in which case ``upper`` approximates the upper local dimension
    itself and not only a lower bound for it.
    """

    path: np.ndarray
    sequence: np.ndarray
    lower: float
    upper: float
    tail_window: int
    upper_is_equality: bool

    def as_dict(self, include_path: bool = False) -> dict:
        d = {
            "lower": self.lower,
            "upper": self.upper,
            "tail_window": self.tail_window,
            "upper_is_equality": self.upper_is_equality,
            "b_n": self.sequence.tolist(),
        }
        if include_path:
            d["path"] = self.path.tolist()
        return d


def local_dim_sequence(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    path: Word,
    tail_window: int = 5,
    m5: _trend.TrendSummary | None = None,
) -> LocalDimensionSample:
    _check_pair(measure, geom)
    path = np.asarray(path, dtype=np.int64)
    if path.size < max(tail_window, 1):
        raise ValueError("path is shorter than tail_window")
    b = log_cylinder_prefixes(measure, path) / log_diam_prefixes(geom, path) + 0.0
    tail = _tail(b, tail_window)
    if m5 is None:
        m5 = m5_trend(geom, max(path.size, 2))
    return LocalDimensionSample(
        path=path,
        sequence=b,
        lower=float(tail.min()),
        upper=float(tail.max()),
        tail_window=tail_window,
        upper_is_equality=m5.verdict == _trend.CONSISTENT,
    )


@dataclass
class LowerHausdorffEstimate:
    """Essential-infimum proxy: the minimum lower local dimension over sampled paths."""

    value: float
    lowers: np.ndarray
    uppers: np.ndarray
    seed: int
    depth: int
    samples: list[LocalDimensionSample] = field(repr=False, default_factory=list)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "lowers": self.lowers.tolist(),
            "uppers": self.uppers.tolist(),
            "seed": self.seed,
            "depth": self.depth,
            "mean_lower": float(self.lowers.mean()),
        }


def lower_hausdorff_estimate(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    n_paths: int = 100,
    depth: int = 10_000,
    tail_window: int = 5,
    seed: int = 0,
) -> LowerHausdorffEstimate:
    """Sample ``n_paths`` paths (seed of path ``k`` derived from ``(seed, k)``) and take the minimum lower proxy."""
    _check_pair(measure, geom)
    m5 = m5_trend(geom, max(depth, 2))
    samples = [
        local_dim_sequence(measure, geom, sample_path(measure, derive_seed(seed, k), depth), tail_window, m5)
        for k in range(n_paths)
    ]
    lowers = np.array([s.lower for s in samples])
    uppers = np.array([s.upper for s in samples])
    return LowerHausdorffEstimate(float(lowers.min()), lowers, uppers, seed, depth, samples)


# --------------------------------------------------------------------------
# potentials and energies


@dataclass
class PotentialEstimate:
    """Monte Carlo ``int_{d(x,y) >= eps} d(x, y)^{-s} dmu(y)``."""

    s: float
    x: float
    epsilon: float
    value: float
    stderr: float
    n_samples: int
    n_excluded: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def potential_estimate(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    s: float,
    x: float,
    n_samples: int = 100_000,
    epsilon: float = 1e-6,
    seed: int = 0,
    path_depth: int | None = None,
) -> PotentialEstimate:
    """``phi_s(x)`` truncated at ``epsilon``; samples closer than ``epsilon`` are excluded and counted.

    With ``s = 0`` the integrand is identically 1, no truncation applies and
    the value is the total mass 1.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if path_depth is None:
        path_depth = _resolution_depth(geom, epsilon)
    y = sample_points(measure, geom, n_samples, path_depth, seed)
    d = np.abs(y - x)
    far = d >= epsilon
    n_excl = int(n_samples - far.sum())
    if s == 0:
        return PotentialEstimate(s, x, epsilon, 1.0, 0.0, n_samples, n_excl)
    if not far.any():
        raise DegenerateEstimateError(f"all {n_samples} samples lie within epsilon={epsilon:g} of x={x:g}")
    vals = np.zeros(n_samples)
    vals[far] = d[far] ** (-s)
    return PotentialEstimate(
        s, float(x), epsilon, float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_samples)), n_samples, n_excl
    )


@dataclass
class PotentialLadder:
    """``phi_s(x)`` truncated at each rung of a decreasing ``eps`` ladder, from one sample."""

    s: float
    x: float
    epsilon_ladder: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    n_excluded: np.ndarray
    n_samples: int
    growth_exponent: float
    diverging: bool

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "x": self.x,
            "epsilon_ladder": self.epsilon_ladder.tolist(),
            "values": self.values.tolist(),
            "stderr": self.stderr.tolist(),
            "n_excluded": self.n_excluded.tolist(),
            "n_samples": self.n_samples,
            "growth_exponent": self.growth_exponent,
            "diverging": self.diverging,
        }


def potential_ladder(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    s: float,
    x: float,
    n_samples: int = 100_000,
    epsilon_ladder=None,
    seed: int = 0,
) -> PotentialLadder:
    """Truncated potentials along a ladder with the same divergence rule as :func:`energy_estimate`."""
    if s < 0:
        raise ValueError("s must be >= 0")
    lad = _check_ladder(default_epsilon_ladder(geom) if epsilon_ladder is None else epsilon_ladder)
    y = sample_points(measure, geom, n_samples, _resolution_depth(geom, float(lad.min())), seed)
    d = np.abs(y - x)
    vals, errs, excl = [], [], []
    for e in lad:
        far = d >= e
        f = np.where(far, np.maximum(d, e) ** (-s), 0.0)
        vals.append(f.mean())
        errs.append(f.std(ddof=1) / math.sqrt(n_samples))
        excl.append(int(n_samples - far.sum()))
    values = np.array(vals)
    growth = _growth_exponent(lad, values)
    return PotentialLadder(
        float(s), float(x), lad, values, np.array(errs), np.array(excl), n_samples, growth, bool(growth > 0)
    )


def default_epsilon_ladder(geom: MoranGeometrySpec, rungs: int = 6) -> np.ndarray:
    """``gamma_2, gamma_4, ..., gamma_{2 rungs}``."""
    g = np.exp(level_log_diameters(geom, 2 * rungs)["min"])
    return g[1::2].copy()


@dataclass
class _PairHistogram:
    # ordered-pair counts per distance bin [edges[k], edges[k+1])
    edges: np.ndarray
    totals: np.ndarray
    n_samples: int
    n_below: int


def _within(xs: np.ndarray, e: float) -> np.ndarray:
    # per point: #{j != i : |x_j - x_i| < e}, xs sorted
    return np.searchsorted(xs, xs + e, side="left") - np.searchsorted(xs, xs - e, side="right") - 1


def _pair_histogram(xs: np.ndarray, edges: np.ndarray) -> _PairHistogram:
    tot = np.array([int(_within(xs, e).sum()) for e in edges], dtype=np.int64)
    return _PairHistogram(edges, np.diff(tot), len(xs), int(tot[0]))


def _per_point_tails(xs: np.ndarray, edges: np.ndarray, kern: np.ndarray, starts: np.ndarray) -> np.ndarray:
    """Row ``k``: per point ``sum_j K(x_i, x_j)`` over bins from ``starts[k]`` upward."""
    n = len(xs)
    out = np.empty((len(starts), n))
    acc = np.zeros(n)
    upper = _within(xs, edges[-1])
    wanted = {int(b): k for k, b in enumerate(starts)}
    for b in range(len(edges) - 2, -1, -1):
        lower = _within(xs, edges[b])
        acc += kern[b] * (upper - lower)
        upper = lower
        if b in wanted:
            out[wanted[b]] = acc
    return out


def _bin_kernel(edges: np.ndarray, s: float) -> np.ndarray:
    # mean of d^{-s} over a log-uniform distance in each bin
    a, b = edges[:-1], edges[1:]
    if s == 0:
        return np.ones_like(a)
    return (a ** (-s) - b ** (-s)) / (s * np.log(b / a))


def _energy_edges(ladder: np.ndarray) -> np.ndarray:
    # sampled points are cylinder midpoints, strictly inside [0, 1], so every distance is < 1
    top = 1.0
    grid = np.geomspace(ladder.min(), top, max(2, int(math.ceil(math.log(top / ladder.min()) / math.log(1.05)))))
    return np.unique(np.concatenate([grid, ladder]))


@dataclass
class EnergyEstimate:
    """Truncated ``s``-energies ``I_s(eps) = iint_{d >= eps} d^{-s}`` along a decreasing ``eps`` ladder.

    ``values[k]`` belongs to ``epsilon_ladder[k]``. ``growth_exponent`` is
    the fitted ``-d log(increment) / d log(eps)`` of the ladder increments;
    a positive exponent means the increments grow as ``eps`` shrinks and the
    energy diverges (``diverging``).
    """

    s: float
    epsilon_ladder: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    excluded_fraction: np.ndarray
    n_samples: int
    seed: int
    growth_exponent: float
    diverging: bool

    @property
    def value(self) -> float:
        return float(self.values[-1])

    @property
    def epsilon(self) -> float:
        return float(self.epsilon_ladder[-1])

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "epsilon_ladder": self.epsilon_ladder.tolist(),
            "values": self.values.tolist(),
            "stderr": self.stderr.tolist(),
            "excluded_fraction": self.excluded_fraction.tolist(),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "growth_exponent": self.growth_exponent,
            "diverging": self.diverging,
        }


def _check_ladder(epsilon_ladder) -> np.ndarray:
    lad = np.asarray(epsilon_ladder, dtype=float)
    if lad.ndim != 1 or len(lad) < 4:
        raise ValueError("epsilon ladder needs at least 4 rungs for a trend verdict")
    if np.any(np.diff(lad) >= 0) or lad.min() <= 0:
        raise ValueError("epsilon ladder must be positive and strictly decreasing")
    return lad


def _ladder_energies(hist: _PairHistogram, lad: np.ndarray, s: float):
    kern = _bin_kernel(hist.edges, s)
    pairs = hist.n_samples * (hist.n_samples - 1.0)
    # contribution of bins at or above each edge, summed from the top
    contrib = hist.totals * kern
    above = np.concatenate([np.cumsum(contrib[::-1])[::-1], [0.0]])
    idx = np.searchsorted(hist.edges, lad)
    values = above[idx] / pairs
    below = np.concatenate([[0], np.cumsum(hist.totals)])
    excluded = (hist.n_below + below[idx]) / pairs
    return values, excluded, kern, idx


def _growth_exponent(lad: np.ndarray, values: np.ndarray) -> float:
    inc = np.diff(values)
    ok = inc > 0
    if ok.sum() < 2:
        return -math.inf
    slope = np.polyfit(np.log(lad[1:][ok]), np.log(inc[ok]), 1)[0]
    return float(-slope)


def _sorted_sample(measure, geom, n_samples, lad, seed):
    depth = _resolution_depth(geom, float(lad.min()))
    return np.sort(sample_points(measure, geom, n_samples, depth, seed))


def energy_estimate(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    s: float,
    n_samples: int = 100_000,
    epsilon_ladder=None,
    seed: int = 0,
) -> EnergyEstimate:
    """Pair (U-statistic) estimate of the truncated ``s``-energy on every rung of the ladder.

    Pair distances are tallied exactly into fine logarithmic bins (ratio
    1.05, with every rung as a bin edge) and ``d^{-s}`` is averaged over each
    bin, so each rung sums over all ``N (N - 1)`` ordered pairs. Standard
    errors use the first-order (Hoeffding) variance of the U-statistic.
    For ``s = 0`` the integrand is bounded and every value is exactly 1.
    """
    if s < 0:
        raise ValueError("s must be >= 0")
    _check_pair(measure, geom)
    lad = _check_ladder(default_epsilon_ladder(geom) if epsilon_ladder is None else epsilon_ladder)
    xs = _sorted_sample(measure, geom, n_samples, lad, seed)
    edges = _energy_edges(lad)
    hist = _pair_histogram(xs, edges)
    values, excluded, kern, idx = _ladder_energies(hist, lad, s)
    h = _per_point_tails(xs, edges, kern, idx) / (n_samples - 1.0)
    stderr = 2.0 * h.std(axis=1, ddof=1) / math.sqrt(n_samples)
    growth = _growth_exponent(lad, values)
    if s == 0:
        values = np.ones(len(lad))
        stderr = np.zeros(len(lad))
    return EnergyEstimate(
        s=float(s),
        epsilon_ladder=lad,
        values=values,
        stderr=stderr,
        excluded_fraction=excluded,
        n_samples=n_samples,
        seed=seed,
        growth_exponent=growth,
        diverging=bool(growth > 0),
    )


@dataclass
class EnergyBracket:
    """Interval ``[lo, hi]`` with a converging energy at ``lo`` and a diverging one at ``hi``."""

    lo: float
    hi: float
    tol: float
    probes: list[tuple[float, bool, float]]
    n_samples: int
    seed: int

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def as_dict(self) -> dict:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "tol": self.tol,
            "midpoint": self.midpoint,
            "probes": [{"s": s, "diverging": d, "growth_exponent": g} for s, d, g in self.probes],
            "n_samples": self.n_samples,
            "seed": self.seed,
        }


def cordim_energy(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    s_lo: float = 0.0,
    s_hi: float = 1.0,
    tol: float = 0.05,
    n_samples: int = 100_000,
    epsilon_ladder=None,
    seed: int = 0,
) -> EnergyBracket:
    """Bisect on ``s`` using the divergence flag of :func:`energy_estimate`.

    All probes share one sample and one pair histogram.
    """
    if not s_lo < s_hi:
        raise ValueError("need s_lo < s_hi")
    _check_pair(measure, geom)
    lad = _check_ladder(default_epsilon_ladder(geom) if epsilon_ladder is None else epsilon_ladder)
    xs = _sorted_sample(measure, geom, n_samples, lad, seed)
    hist = _pair_histogram(xs, _energy_edges(lad))
    probes = []

    def flag(s):
        values = _ladder_energies(hist, lad, s)[0]
        g = _growth_exponent(lad, values)
        probes.append((float(s), bool(g > 0), g))
        return g > 0

    if flag(s_lo):
        raise ValueError(f"energy already diverges at s_lo={s_lo}")
    if not flag(s_hi):
        raise ValueError(f"energy does not diverge at s_hi={s_hi}")
    lo, hi = s_lo, s_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flag(mid):
            hi = mid
        else:
            lo = mid
    return EnergyBracket(lo, hi, tol, probes, n_samples, seed)


# --------------------------------------------------------------------------
# cross-route consistency


@dataclass
class Budgets:
    n_max: int = 30
    tail_window: int = 5
    samples: int = 100_000
    r_levels: int = 21
    paths: int = 100
    depth: int = 10_000
    seed: int = 0


# pairwise tolerances between correlation-dimension routes
ROUTE_TOLERANCE = {
    (MORAN, FILTRATION): 0.02,
    (MORAN, PAIRCOUNT): 0.05,
    (FILTRATION, PAIRCOUNT): 0.07,
}
# allowance in cordim <= ldim_H
ORDERING_TOLERANCE = 0.02


@dataclass
class RouteDisagreement:
    route_a: str
    route_b: str
    value_a: float
    value_b: float
    tolerance: float

    def describe(self) -> str:
        return (
            f"{self.route_a}={self.value_a:.6f} vs {self.route_b}={self.value_b:.6f} "
            f"differ by {abs(self.value_a - self.value_b):.4f} > {self.tolerance}"
        )


@dataclass
class ConsistencyReport:
    estimates: dict[str, DimensionEstimate]
    curve: CorrelationIntegralCurve
    lower_hausdorff: LowerHausdorffEstimate
    failures: list[RouteDisagreement]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def values(self) -> dict[str, float]:
        return {k: v.value for k, v in self.estimates.items()}

    @property
    def gap(self) -> float:
        """``ldim_H - cordim`` (moran route)."""
        return self.lower_hausdorff.value - self.estimates[MORAN].value

    def raise_for_failures(self) -> None:
        if self.failures:
            raise ConsistencyError(self)

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "values": self.values,
            "lower_hausdorff": self.lower_hausdorff.value,
            "gap": self.gap,
            "failures": [f.__dict__ | {"message": f.describe()} for f in self.failures],
        }


def consistency_check(
    measure: ProductMeasureSpec,
    geom: MoranGeometrySpec,
    budgets: Budgets | None = None,
    validation_depth: int = 8,
) -> ConsistencyReport:
    """Run the three correlation-dimension routes and the lower Hausdorff estimate and compare them.

    Seeds match the standalone estimators: the pair sample uses ``seed`` and
    path ``k`` uses ``derive_seed(seed, k)``, so the numbers coincide with
    separate calls made with the same budgets.
    """
    b = budgets or Budgets()
    _check_pair(measure, geom)
    report = validate(geom, validation_depth)
    broken = [c.name for c in report.exact_failures if c.name in ("M1", "M3")]
    if broken:
        raise ValueError(f"geometry fails {', '.join(broken)} at depth {report.depth}; routes are not comparable")
    moran = cordim_moran(measure, geom, b.n_max, b.tail_window)
    filt = cordim_filtration(measure, build_moran_filtration(geom, b.n_max), b.tail_window)
    curve = cordim_paircount(measure, geom, b.samples, seed=b.seed, r_levels=b.r_levels)
    ests = {MORAN: moran, FILTRATION: filt, PAIRCOUNT: curve.as_estimate()}
    lh = lower_hausdorff_estimate(measure, geom, b.paths, b.depth, b.tail_window, b.seed)
    failures = []
    for (ra, rb), tol in ROUTE_TOLERANCE.items():
        va, vb = ests[ra].value, ests[rb].value
        if abs(va - vb) > tol:
            failures.append(RouteDisagreement(ra, rb, va, vb, tol))
    if moran.value > lh.value + ORDERING_TOLERANCE:
        failures.append(RouteDisagreement(MORAN, "lower_hausdorff", moran.value, lh.value, ORDERING_TOLERANCE))
    return ConsistencyReport(ests, curve, lh, failures)
