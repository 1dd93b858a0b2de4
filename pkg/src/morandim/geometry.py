"""Interval realizations of Moran constructions on ``[0, 1]``.

Every construction set ``E_sigma`` is a closed interval. A child ``sigma i``
of ``E_sigma = [a, a + w]`` is ``[a + o_i w, a + (o_i + c_i) w]`` where the
ratio ``c_i`` and the offset ``o_i`` come from an eventually periodic level
table. Ratios and offsets are stored as exact fractions so that nesting,
disjointness and ball intersections can be decided exactly; long-word
diameters are handled through log tables.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _trend
from .symbolic import (
    ProductMeasureSpec,
    _level_index,
    SymbolSpaceSpec,
    Word,
    check_word,
    derive_seed,
    format_word,
    level_rows,
    sample_path,
)

__all__ = [
    "UNIFORM_GAPS",
    "M4_CONSTANT",
    "ProjectionError",
    "DepthError",
    "MoranGeometrySpec",
    "IntervalSet",
    "ProjectedPoint",
    "ConditionResult",
    "ValidationReport",
    "ClusteringReport",
    "as_fraction",
    "exact_log",
    "spaces_agree",
    "realize",
    "diam",
    "log_diam",
    "log_diam_prefixes",
    "project",
    "project_paths",
    "level_log_diameters",
    "min_diameter",
    "depth_for_diameter",
    "validate",
    "m5_trend",
    "m7_summary",
    "clustering_count",
    "clustering_diagnostic",
]

UNIFORM_GAPS = "uniform-gaps"
EXPLICIT = "explicit"

# C_0 of M4: an interval contains the ball of radius diam/2 about its midpoint
M4_CONSTANT = Fraction(1, 2)

_POWER = re.compile(r"^\s*(\d+)\s*\^\s*(-?\d+)\s*$")


class ProjectionError(ValueError):
    """The supplied prefix is too shallow for the requested tolerance."""


class DepthError(RuntimeError):
    """A stopping word would be longer than the allowed search depth."""


def as_fraction(value) -> Fraction:
    """Exact fraction from an int, float, Fraction, ``"a/b"``, decimal or ``"b^e"`` string."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (int, float)):
        return Fraction(value)
    if isinstance(value, str):
        m = _POWER.match(value)
        if m:
            return Fraction(int(m.group(1))) ** int(m.group(2))
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a number")


def exact_log(q: Fraction) -> float:
    """Natural log of a positive fraction without passing through a float."""
    return math.log(q.numerator) - math.log(q.denominator)


def _uniform_gap_offsets(ratios: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
    total = sum(ratios, Fraction(0))
    if total > 1:
        raise ValueError(f"uniform-gaps layout needs sum of ratios <= 1, got {total}")
    if len(ratios) == 1:
        return (Fraction(0),)
    gap = (1 - total) / (len(ratios) - 1)
    offsets, pos = [], Fraction(0)
    for c in ratios:
        offsets.append(pos)
        pos += c + gap
    return tuple(offsets)


def _table(rows) -> tuple[tuple[Fraction, ...], ...]:
    return tuple(tuple(as_fraction(v) for v in row) for row in rows)


def spaces_agree(a: SymbolSpaceSpec, b: SymbolSpaceSpec) -> bool:
    """Whether two eventually periodic alphabet descriptions coincide on every level."""
    span = max(len(a.preperiod), len(b.preperiod)) + math.lcm(len(a.period), len(b.period))
    return bool(np.array_equal(a.sizes(span), b.sizes(span)))


@dataclass(frozen=True)
class MoranGeometrySpec:
    """Level tables of child ratios and offsets.

    Parameters
    ----------
    ratio_preperiod, ratio_period : sequences of per-level ratio tuples
        Level ``j`` has ``N_j = len(ratios_j)`` children with ratios in ``(0, 1)``.
    offset_preperiod, offset_period : optional
        Explicit child offsets (fractions of the parent length) with the same
        shape as the ratio tables. Omit both for the ``uniform-gaps`` layout,
        which places children left to right with equal gaps, the first flush
        with the left end and the last flush with the right end.
    """

    ratio_preperiod: tuple[tuple[Fraction, ...], ...] = ()
    ratio_period: tuple[tuple[Fraction, ...], ...] = ((Fraction(1, 3), Fraction(1, 3)),)
    offset_preperiod: tuple[tuple[Fraction, ...], ...] | None = None
    offset_period: tuple[tuple[Fraction, ...], ...] | None = None
    space: SymbolSpaceSpec = field(init=False, repr=False, compare=False)
    _tables: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pre, per = _table(self.ratio_preperiod), _table(self.ratio_period)
        if not per:
            raise ValueError("ratio_period must be nonempty")
        for row in pre + per:
            if not row:
                raise ValueError("every level needs at least one child")
            for c in row:
                if not 0 < c < 1:
                    raise ValueError(f"ratio {c} outside (0, 1)")
        object.__setattr__(self, "ratio_preperiod", pre)
        object.__setattr__(self, "ratio_period", per)
        if (self.offset_preperiod is None) != (self.offset_period is None):
            raise ValueError("give both offset tables or neither")
        if self.offset_period is None:
            offsets = tuple(_uniform_gap_offsets(row) for row in pre + per)
        else:
            opre, oper = _table(self.offset_preperiod), _table(self.offset_period)
            if [len(r) for r in opre] != [len(r) for r in pre] or [len(r) for r in oper] != [len(r) for r in per]:
                raise ValueError("offset tables must have the same shape as the ratio tables")
            for orow, crow in zip(opre + oper, pre + per):
                for o, c in zip(orow, crow):
                    if o < 0 or o + c > 1:
                        raise ValueError(f"child with offset {o} and ratio {c} leaves its parent")
            object.__setattr__(self, "offset_preperiod", opre)
            object.__setattr__(self, "offset_period", oper)
            offsets = opre + oper
        rows = pre + per
        object.__setattr__(self, "space", SymbolSpaceSpec(tuple(len(r) for r in pre), tuple(len(r) for r in per)))

        width = max(len(r) for r in rows)
        log_c = np.full((len(rows), width), np.nan)
        c_f = np.full((len(rows), width), np.nan)
        o_f = np.full((len(rows), width), np.nan)
        for k, (crow, orow) in enumerate(zip(rows, offsets)):
            log_c[k, : len(crow)] = [exact_log(c) for c in crow]
            c_f[k, : len(crow)] = [float(c) for c in crow]
            o_f[k, : len(orow)] = [float(o) for o in orow]
        for arr in (log_c, c_f, o_f):
            arr.setflags(write=False)
        object.__setattr__(
            self,
            "_tables",
            {
                "ratios": rows,
                "offsets": offsets,
                "log_c": log_c,
                "c": c_f,
                "o": o_f,
                "row_min": np.nanmin(log_c, axis=1),
                "row_max": np.nanmax(log_c, axis=1),
                "row_mean": np.nanmean(log_c, axis=1),
            },
        )

    @classmethod
    def homogeneous(cls, ratios: Sequence, offsets: Sequence | None = None) -> "MoranGeometrySpec":
        """The same children at every level."""
        if offsets is None:
            return cls((), (tuple(ratios),))
        return cls((), (tuple(ratios),), (), (tuple(offsets),))

    @classmethod
    def cantor(cls) -> "MoranGeometrySpec":
        return cls.homogeneous((Fraction(1, 3), Fraction(1, 3)))

    @property
    def layout(self) -> str:
        return UNIFORM_GAPS if self.offset_period is None else EXPLICIT

    def rows(self, depth: int) -> np.ndarray:
        return level_rows(len(self.ratio_preperiod), len(self.ratio_period), depth)

    def _row(self, level: int) -> int:
        return _level_index(len(self.ratio_preperiod), len(self.ratio_period), level)

    def ratios(self, level: int) -> tuple[Fraction, ...]:
        return self._tables["ratios"][self._row(level)]

    def offsets(self, level: int) -> tuple[Fraction, ...]:
        return self._tables["offsets"][self._row(level)]

    def log_ratio_table(self, depth: int) -> np.ndarray:
        """``(depth, max N)`` array of ``log c_{j,i}``, NaN-padded."""
        return self._tables["log_c"][self.rows(depth)]

    def float_tables(self, depth: int) -> tuple[np.ndarray, np.ndarray]:
        r = self.rows(depth)
        return self._tables["c"][r], self._tables["o"][r]

    def level_log_extremes(self, depth: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-level min, max and mean of ``log c_{j,i}`` for levels ``1..depth``."""
        r = self.rows(depth)
        t = self._tables
        return t["row_min"][r], t["row_max"][r], t["row_mean"][r]

    def max_ratio(self) -> Fraction:
        return max(max(row) for row in self._tables["ratios"])

    def min_ratio(self) -> Fraction:
        return min(min(row) for row in self._tables["ratios"])


@dataclass(frozen=True)
class IntervalSet:
    left: float | Fraction
    right: float | Fraction
    word: tuple[int, ...]

    @property
    def diam(self):
        return self.right - self.left


@dataclass(frozen=True)
class ProjectedPoint:
    x: float
    error_bound: float
    depth: int


def _walk(geom: MoranGeometrySpec, word: Word):
    """Exact ``(left, width)`` of ``E_word``."""
    left, width = Fraction(0), Fraction(1)
    for level, i in enumerate(word, start=1):
        i = int(i)
        left += geom.offsets(level)[i] * width
        width *= geom.ratios(level)[i]
    return left, width


def realize(geom: MoranGeometrySpec, word: Word, exact: bool = False) -> IntervalSet:
    """Closed interval ``E_word``; endpoints are fractions when ``exact``."""
    check_word(geom.space, word)
    left, width = _walk(geom, word)
    w = tuple(int(i) for i in word)
    if exact:
        return IntervalSet(left, left + width, w)
    return IntervalSet(float(left), float(left + width), w)


def log_diam_prefixes(geom: MoranGeometrySpec, path: Word) -> np.ndarray:
    """``log diam(E_{path|_n})`` for ``n = 1..len(path)``."""
    check_word(geom.space, path)
    arr = np.asarray(path, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0)
    return np.cumsum(geom.log_ratio_table(arr.size)[np.arange(arr.size), arr])


def log_diam(geom: MoranGeometrySpec, word: Word) -> float:
    d = log_diam_prefixes(geom, word)
    return float(d[-1]) if d.size else 0.0


def diam(geom: MoranGeometrySpec, word: Word) -> float:
    """``prod_j c_{j, i_j}``; may underflow to 0 for very long words, see :func:`log_diam`."""
    return math.exp(log_diam(geom, word))


def project(geom: MoranGeometrySpec, path: Word, tolerance: float) -> ProjectedPoint:
    """Midpoint of ``E_path``, within ``diam(E_path)/2`` of ``pi(sigma)`` for every extension."""
    check_word(geom.space, path)
    ld = log_diam(geom, path)
    if ld > math.log(tolerance):
        raise ProjectionError(
            f"prefix of length {len(path)} has diameter {math.exp(ld):.6g} > tolerance {tolerance:.6g}"
        )
    c, o = geom.float_tables(len(path))
    left, width = 0.0, 1.0
    for j, i in enumerate(path):
        left += o[j, i] * width
        width *= c[j, i]
    return ProjectedPoint(left + 0.5 * width, 0.5 * math.exp(ld), len(path))


def project_paths(geom: MoranGeometrySpec, paths: np.ndarray) -> np.ndarray:
    """Midpoints of ``E_w`` for every row ``w`` of a ``(n, depth)`` array."""
    paths = np.asarray(paths, dtype=np.int64)
    depth = paths.shape[1]
    c, o = geom.float_tables(depth)
    left = np.zeros(paths.shape[0])
    width = np.ones(paths.shape[0])
    for j in range(depth):
        col = paths[:, j]
        left += o[j, col] * width
        width *= c[j, col]
    return left + 0.5 * width


def level_log_diameters(geom: MoranGeometrySpec, n_max: int) -> dict[str, np.ndarray]:
    """Min, max and geometric-mean diameters over ``Sigma_n`` (log scale), ``n = 1..n_max``.

    Each factorizes over levels because ``diam(E_w)`` is a product of
    independent per-level choices.
    """
    lo, hi, mean = geom.level_log_extremes(n_max)
    return {"min": np.cumsum(lo), "max": np.cumsum(hi), "mean": np.cumsum(mean)}


def min_diameter(geom: MoranGeometrySpec, n: int) -> Fraction:
    """Exact ``gamma_n = min{diam(E_w) : w in Sigma_n}``."""
    g = Fraction(1)
    for level in range(1, n + 1):
        g *= min(geom.ratios(level))
    return g


# --------------------------------------------------------------------------
# validation

HOLDS = "holds-at-depth"
FAILS = "fails"
NOT_CHECKABLE = "not-checkable"


@dataclass
class ConditionResult:
    name: str
    status: str
    checked_depth: int
    witness: tuple[str, ...] | None = None
    evidence: dict = field(default_factory=dict)
    constant: float | None = None
    trend: _trend.TrendSummary | None = None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "checked_depth": self.checked_depth,
            "witness": list(self.witness) if self.witness is not None else None,
            "evidence": self.evidence,
            "constant": self.constant,
            "trend": self.trend.as_dict() if self.trend is not None else None,
        }


@dataclass
class ValidationReport:
    depth: int
    truncated: bool
    conditions: dict[str, ConditionResult]

    @property
    def exact_failures(self) -> list[ConditionResult]:
        return [c for c in self.conditions.values() if c.status == FAILS]

    @property
    def trend_violations(self) -> list[ConditionResult]:
        return [c for c in self.conditions.values() if c.trend is not None and c.trend.verdict == _trend.VIOLATION]

    def __getitem__(self, name: str) -> ConditionResult:
        return self.conditions[name]

    def as_dict(self) -> dict:
        return {
            "depth": self.depth,
            "truncated": self.truncated,
            "conditions": {k: v.as_dict() for k, v in self.conditions.items()},
        }


def _fmt(q: Fraction) -> str:
    return str(q) if q.denominator < 10**12 else repr(float(q))


def m5_trend(geom: MoranGeometrySpec, depth: int) -> _trend.TrendSummary:
    """Worst-case ratio ``log diam(E_{sigma|n}) / log(min child diam)`` over ``Sigma_n``.

    For ``n = 1..depth-1``. The ratio is smallest for the largest level-``n``
    diameter, so the uniform-in-sigma sequence is available without
    enumeration.
    """
    if depth < 2:
        raise ValueError("M5 needs depth >= 2")
    lo, hi, _ = geom.level_log_extremes(depth)
    dmax = np.cumsum(hi)[:-1]
    ratios = dmax / (dmax + lo[1:])
    return _trend.summarize(ratios, target=1.0, indices=np.arange(1, depth))


def m7_summary(geom: MoranGeometrySpec, n_max: int) -> dict:
    """``beta_n`` (geometric mean of level-``n`` diameters) and the spread constant ``C_n``."""
    d = level_log_diameters(geom, n_max)
    log_c = np.maximum(d["max"] - d["mean"], d["mean"] - d["min"])
    beta_ratio = d["mean"][:-1] / d["mean"][1:] if n_max > 1 else np.zeros(0)
    growing = False
    if n_max >= 3:
        half = n_max // 2
        growing = bool(log_c[-1] > log_c[half - 1] + 1e-9)
    ratio_trend = _trend.summarize(beta_ratio, 1.0, np.arange(1, n_max)) if beta_ratio.size else None
    violation = growing or (ratio_trend is not None and ratio_trend.verdict == _trend.VIOLATION)
    return {
        "log_beta": d["mean"],
        "log_C": log_c,
        "C": float(math.exp(log_c.max())),
        "C_growing": growing,
        "beta_ratio_trend": ratio_trend,
        "verdict": _trend.VIOLATION if violation else _trend.CONSISTENT,
    }


def _m8_constant(geom: MoranGeometrySpec, depth: int) -> tuple[float, tuple[int, int]]:
    # diam(E_{ik}) / (diam(E_i) diam(E_k)) = prod_j c_{a+j,k_j} / c_{j,k_j}, a = |i|,
    # independent of the symbols of i, so the max over k factorizes per level
    table = geom.log_ratio_table(2 * depth)
    sizes = geom.space.sizes(2 * depth)
    best, arg = 0.0, (0, 0)
    for a in range(0, depth):
        acc = 0.0
        for j in range(1, depth - a + 1):
            m = int(min(sizes[a + j - 1], sizes[j - 1]))
            acc += float(np.max(table[a + j - 1, :m] - table[j - 1, :m]))
            if acc > best:
                best, arg = acc, (a, j)
    return math.exp(best), arg


def validate(geom: MoranGeometrySpec, depth: int, budget: int = 2**17) -> ValidationReport:
    """Check M1-M8 on every word up to ``depth``.

    M1 and M3 are decided exactly by rational interval arithmetic. M4 holds
    with ``C_0 = 1/2`` for intervals. M2, M6-M8 are computed from the level
    tables; M5 and the ``beta_n`` behaviour of M7 are limits and get trend
    diagnostics only. If enumeration would exceed ``budget`` words, the exact
    checks stop at the last complete level and the report is ``truncated``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    checked, total = 0, 1
    for n in range(1, depth + 1):
        total += geom.space.count_words(n)
        if total > budget:
            break
        checked = n
    truncated = checked < depth

    m1_fail = None
    m3_fail, m3_count = None, 0
    frontier = [((), Fraction(0), Fraction(1))]
    for level in range(1, checked + 1):
        ratios, offsets = geom.ratios(level), geom.offsets(level)
        nxt = []
        for word, left, width in frontier:
            kids = []
            for i, (c, o) in enumerate(zip(ratios, offsets)):
                a, w = left + o * width, c * width
                if m1_fail is None and (a < left or a + w > left + width):
                    m1_fail = (word + (i,), (a, a + w), (left, left + width))
                kids.append((word + (i,), a, w))
            for x in range(len(kids)):
                for y in range(x + 1, len(kids)):
                    (wx, ax, lx), (wy, ay, ly) = kids[x], kids[y]
                    lo, hi = max(ax, ay), min(ax + lx, ay + ly)
                    if lo <= hi:
                        m3_count += 1
                        if m3_fail is None:
                            m3_fail = (wx, wy, lo, hi)
            nxt.extend(kids)
        frontier = nxt

    conds: dict[str, ConditionResult] = {}
    if m1_fail is None:
        conds["M1"] = ConditionResult("M1", HOLDS, checked)
    else:
        w, child, parent = m1_fail
        conds["M1"] = ConditionResult(
            "M1", FAILS, checked, (format_word(w), format_word(w[:-1])),
            {"child": [_fmt(child[0]), _fmt(child[1])], "parent": [_fmt(parent[0]), _fmt(parent[1])]},
        )

    rho = geom.max_ratio()
    d = level_log_diameters(geom, depth)
    conds["M2"] = ConditionResult(
        "M2", HOLDS, depth,
        evidence={"max_ratio": _fmt(rho), "max_log_diam_at_depth": float(d["max"][-1])},
        constant=float(rho),
    )

    if m3_fail is None:
        conds["M3"] = ConditionResult("M3", HOLDS, checked)
    else:
        wx, wy, lo, hi = m3_fail
        conds["M3"] = ConditionResult(
            "M3", FAILS, checked, (format_word(wx), format_word(wy)),
            {
                "overlap": [_fmt(lo), _fmt(hi)],
                "inequality": f"max(left) = {_fmt(lo)} <= {_fmt(hi)} = min(right)",
                "violations": m3_count,
            },
        )

    conds["M4"] = ConditionResult(
        "M4", HOLDS, depth, evidence={"C0": str(M4_CONSTANT), "ball": "midpoint, radius diam/2"},
        constant=float(M4_CONSTANT),
    )

    if depth >= 2:
        conds["M5"] = ConditionResult("M5", NOT_CHECKABLE, depth, trend=m5_trend(geom, depth))
    else:
        conds["M5"] = ConditionResult("M5", NOT_CHECKABLE, depth, evidence={"reason": "depth < 2"})

    lo, _, _ = geom.level_log_extremes(depth)
    per_level_c = np.exp(lo)
    conds["M6"] = ConditionResult(
        "M6", HOLDS, depth,
        evidence={"per_level_min_ratio": per_level_c.tolist()},
        constant=float(per_level_c.min()),
    )

    m7 = m7_summary(geom, depth)
    conds["M7"] = ConditionResult(
        "M7", HOLDS, depth,
        evidence={
            "log_beta": m7["log_beta"].tolist(),
            "log_C": m7["log_C"].tolist(),
            "C_growing": m7["C_growing"],
            "verdict": m7["verdict"],
        },
        constant=m7["C"],
        trend=m7["beta_ratio_trend"],
    )

    dconst, (a, b) = _m8_constant(geom, depth)
    conds["M8"] = ConditionResult(
        "M8", HOLDS, depth, evidence={"prefix_length": a, "suffix_length": b}, constant=dconst
    )
    return ValidationReport(depth, truncated, conds)


# --------------------------------------------------------------------------
# finite clustering


def clustering_count(geom: MoranGeometrySpec, x, r, max_depth: int) -> int:
    """``#N(x, r)``: stopping words ``diam(E_w) <= r < diam(E_{w^-})`` whose set meets ``B(x, r)``.

    Branch and bound from the root; comparisons are exact, touching
    endpoints count as intersecting.
    """
    x, r = as_fraction(x), as_fraction(r)
    if r <= 0:
        raise ValueError("r must be positive")
    lo_ball, hi_ball = x - r, x + r
    if r >= 1:
        # the root is the only set with diam <= r and no parent
        return int(lo_ball <= 1 and hi_ball >= 0)
    count = 0
    stack = [(0, Fraction(0), Fraction(1))]
    while stack:
        level, left, width = stack.pop()
        nxt = level + 1
        for c, o in zip(geom.ratios(nxt), geom.offsets(nxt)):
            a, w = left + o * width, c * width
            if a > hi_ball or a + w < lo_ball:
                continue
            if w <= r:
                count += 1
            elif nxt >= max_depth:
                raise DepthError(f"stopping words for r = {float(r):.6g} are longer than max_depth = {max_depth}")
            else:
                stack.append((nxt, a, w))
    return count


@dataclass
class ClusteringReport:
    points: np.ndarray
    r_grid: np.ndarray
    counts: np.ndarray
    max_per_r: np.ndarray
    sup_estimate: int
    seed: int

    def as_dict(self) -> dict:
        return {
            "points": self.points.tolist(),
            "r_grid": self.r_grid.tolist(),
            "counts": self.counts.tolist(),
            "max_per_r": self.max_per_r.tolist(),
            "sup_estimate": int(self.sup_estimate),
            "seed": self.seed,
        }


def depth_for_diameter(geom: MoranGeometrySpec, log_r: float, limit: int = 100_000) -> int:
    """Smallest ``n`` with ``diam(E_w) <= r`` for every ``w`` in ``Sigma_n``.

    This bounds the length of every stopping word at scale ``r``.
    """
    depth = 16
    while depth <= limit:
        dmax = level_log_diameters(geom, depth)["max"]
        hit = np.flatnonzero(dmax <= log_r + 1e-12)
        if hit.size:
            return int(hit[0]) + 1
        depth *= 2
    raise DepthError("diameters do not shrink below r within the depth limit")


def clustering_diagnostic(
    geom: MoranGeometrySpec,
    measure: ProductMeasureSpec,
    n_points: int = 100,
    r_levels: int = 12,
    seed: int = 0,
) -> ClusteringReport:
    """Sample ``pi(sigma)`` for ``sigma ~ mu`` and tabulate ``#N(x, gamma_k)``, ``k = 1..r_levels``."""
    if not spaces_agree(geom.space, measure.space):
        raise ValueError("measure and geometry live on different symbol spaces")
    radii = [min_diameter(geom, k) for k in range(1, r_levels + 1)]
    max_depth = depth_for_diameter(geom, exact_log(radii[-1]))
    depth = max_depth + 1
    counts = np.zeros((n_points, r_levels), dtype=np.int64)
    points = np.zeros(n_points)
    for p in range(n_points):
        path = sample_path(measure, derive_seed(seed, p), depth)
        left, width = _walk(geom, path)
        x = left + width / 2
        points[p] = float(x)
        for k, r in enumerate(radii):
            counts[p, k] = clustering_count(geom, x, r, max_depth)
    max_per_r = counts.max(axis=0)
    return ClusteringReport(
        points=points,
        r_grid=np.array([float(r) for r in radii]),
        counts=counts,
        max_per_r=max_per_r,
        sup_estimate=int(max_per_r.max()),
        seed=seed,
    )
