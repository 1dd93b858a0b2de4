"""Stopping-time general filtrations of Moran constructions.

Level ``n`` of the filtration is the antichain

    Q_n = {w : diam(E_w) <= gamma_n < diam(E_{w^-})},
    gamma_n = min{diam(E_w) : w in Sigma_n},

and ``delta_n = C_0 * min{diam(E_w) : w in Q_n}`` with ``C_0 = 1/2``, so each
``E_w`` in ``Q_n`` contains a ball of radius ``delta_n`` and sits inside a ball
of radius ``gamma_n``.

The antichains grow exponentially, so level statistics (size, smallest
diameter, sums over the level) come from a forward pass that merges subtrees
with equal diameter. Explicit word lists are kept only below ``word_budget``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import logsumexp

from . import _trend
from .geometry import M4_CONSTANT, MoranGeometrySpec, exact_log, min_diameter, spaces_agree
from .symbolic import BudgetExceededError, ProductMeasureSpec, log_sum_squares

__all__ = [
    "GeneralFiltration",
    "FiltrationCondition",
    "FiltrationReport",
    "build_moran_filtration",
    "stopping_set",
    "stopping_set_bruteforce",
    "level_log_sum_squares",
    "validate_filtration",
]

_LOG_C0 = exact_log(M4_CONSTANT)


def _slack(log_gamma: float) -> float:
    # absorbs rounding between sums of the same logs taken in different orders
    return 1e-10 * max(1.0, abs(log_gamma))


def _key(d: float) -> int:
    return round(d * 1e9)


@dataclass
class GeneralFiltration:
    """Levels ``Q_1..Q_{n_max}`` with their radii sequences (natural-log scale).

    ``levels[n-1]`` is the sorted tuple of stopping words of ``Q_n``, or
    ``None`` when the level holds more than the word budget. ``sizes``,
    ``log_gamma`` and ``log_delta`` are always complete for the built levels;
    ``truncated`` means fewer than the requested levels were built.
    """

    geometry: MoranGeometrySpec
    n_requested: int
    log_gamma: np.ndarray
    log_delta: np.ndarray
    sizes: list[int]
    max_word_length: list[int]
    levels: list[tuple[tuple[int, ...], ...] | None]
    truncated: bool = False
    words_omitted: bool = False

    @property
    def n_levels(self) -> int:
        return len(self.sizes)

    @property
    def gamma(self) -> np.ndarray:
        return np.exp(self.log_gamma)

    @property
    def delta(self) -> np.ndarray:
        return np.exp(self.log_delta)

    def as_dict(self) -> dict:
        return {
            "n_requested": self.n_requested,
            "n_levels": self.n_levels,
            "log_gamma": self.log_gamma.tolist(),
            "log_delta": self.log_delta.tolist(),
            "sizes": list(self.sizes),
            "max_word_length": list(self.max_word_length),
            "truncated": self.truncated,
            "words_omitted": self.words_omitted,
        }


def _sweep(geom: MoranGeometrySpec, log_gamma: float, log_p=None, frontier_budget: int = 10**6):
    """Walk the tree down to the stopping antichain at ``log_gamma``.

    Returns ``(count, min log diam, max word length, log sum mu^2)``; the last
    entry is ``None`` unless ``log_p`` (level -> array of log p) is given.
    """
    slack = _slack(log_gamma)
    # key -> [log diam, count, log weight]
    frontier = {_key(0.0): [0.0, 1, 0.0]}
    count, min_d, longest = 0, math.inf, 0
    stopped_w = []
    level = 0
    while frontier:
        level += 1
        logc = [exact_log(c) for c in geom.ratios(level)]
        lp = log_p(level) if log_p is not None else None
        nxt: dict[int, list] = {}
        for d, cnt, w in frontier.values():
            for i, lc in enumerate(logc):
                nd = d + lc
                nw = w + 2.0 * lp[i] if lp is not None else 0.0
                if nd <= log_gamma + slack:
                    count += cnt
                    min_d = min(min_d, nd)
                    longest = level
                    if lp is not None:
                        stopped_w.append(nw)
                    continue
                k = _key(nd)
                slot = nxt.get(k)
                if slot is None:
                    nxt[k] = [nd, cnt, nw]
                else:
                    slot[1] += cnt
                    if lp is not None:
                        slot[2] = float(np.logaddexp(slot[2], nw))
        if len(nxt) > frontier_budget:
            raise BudgetExceededError(
                f"stopping sweep frontier holds {len(nxt)} distinct diameters at level {level}"
            )
        frontier = nxt
    total = float(logsumexp(stopped_w)) if log_p is not None else None
    return count, min_d, longest, total


def stopping_set(geom: MoranGeometrySpec, log_gamma: float, budget: int = 2**16) -> tuple[tuple[int, ...], ...]:
    """Words ``w`` with ``log diam(E_w) <= log_gamma < log diam(E_{w^-})``, by branch and bound."""
    slack = _slack(log_gamma)
    out: list[tuple[int, ...]] = []
    stack = [((), 0.0)]
    while stack:
        word, d = stack.pop()
        level = len(word) + 1
        for i, c in enumerate(geom.ratios(level)):
            nd = d + exact_log(c)
            if nd <= log_gamma + slack:
                out.append(word + (i,))
                if len(out) > budget:
                    raise BudgetExceededError(f"stopping set exceeds {budget} words")
            else:
                stack.append((word + (i,), nd))
    return tuple(sorted(out))


def stopping_set_bruteforce(geom: MoranGeometrySpec, n: int, max_length: int) -> tuple[tuple[int, ...], ...]:
    """Reference antichain ``Q_n`` by exhaustive exact scan of every word of length ``<= max_length``.

    ``gamma_n`` is the exact minimum over ``Sigma_n`` and every diameter is a
    rational product, so no tolerance is involved. Nothing is pruned: every
    word is visited and tested against the stopping rule.
    """
    gamma = min_diameter(geom, n)
    found = []
    stack = [((), Fraction(1))]
    while stack:
        word, parent = stack.pop()
        level = len(word) + 1
        if level > max_length:
            continue
        for i, c in enumerate(geom.ratios(level)):
            d = parent * c
            if d <= gamma < parent:
                found.append(word + (i,))
            stack.append((word + (i,), d))
    return tuple(sorted(found))


def build_moran_filtration(
    geom: MoranGeometrySpec,
    n_max: int,
    word_budget: int = 2**16,
    frontier_budget: int = 10**6,
) -> GeneralFiltration:
    """Stopping-time filtration ``Q_1..Q_{n_max}`` of a Moran construction."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    lo, _, _ = geom.level_log_extremes(n_max)
    log_gamma_all = np.cumsum(lo)
    log_gamma, log_delta, sizes, longest, levels = [], [], [], [], []
    truncated = omitted = False
    for n in range(1, n_max + 1):
        lg = float(log_gamma_all[n - 1])
        try:
            count, min_d, length, _ = _sweep(geom, lg, frontier_budget=frontier_budget)
        except BudgetExceededError:
            truncated = True
            break
        log_gamma.append(lg)
        log_delta.append(_LOG_C0 + min_d)
        sizes.append(count)
        longest.append(length)
        if count <= word_budget:
            levels.append(stopping_set(geom, lg, budget=word_budget))
        else:
            levels.append(None)
            omitted = True
    return GeneralFiltration(
        geometry=geom,
        n_requested=n_max,
        log_gamma=np.array(log_gamma),
        log_delta=np.array(log_delta),
        sizes=sizes,
        max_word_length=longest,
        levels=levels,
        truncated=truncated,
        words_omitted=omitted,
    )


def _log_masses(measure: ProductMeasureSpec, words) -> np.ndarray:
    by_len: dict[int, list[int]] = {}
    for k, w in enumerate(words):
        by_len.setdefault(len(w), []).append(k)
    out = np.empty(len(words))
    for length, ks in by_len.items():
        arr = np.array([words[k] for k in ks], dtype=np.int64)
        table = measure.log_table(length)
        out[ks] = table[np.arange(length), arr].sum(axis=1)
    return out


def level_log_sum_squares(filt: GeneralFiltration, measure: ProductMeasureSpec, n: int) -> float:
    """``log sum_{w in Q_n} mu([w])^2``.

    Uses the explicit word list when the level has one, otherwise the merged
    sweep; both give the same value up to rounding.
    """
    if not spaces_agree(filt.geometry.space, measure.space):
        raise ValueError("measure and geometry live on different symbol spaces")
    words = filt.levels[n - 1]
    if words is not None:
        if not words:
            raise ValueError(f"level {n} of the filtration is empty")
        return log_sum_squares(_log_masses(measure, words))
    table = {}

    def log_p(level):
        if level not in table:
            table[level] = np.log(np.asarray(measure.vector(level)))
        return table[level]

    _, _, _, total = _sweep(filt.geometry, float(filt.log_gamma[n - 1]), log_p=log_p)
    return total


# --------------------------------------------------------------------------
# conditions F1-F4


@dataclass
class FiltrationCondition:
    name: str
    status: str
    sequence: tuple[float, ...] = ()
    trend: _trend.TrendSummary | None = None
    evidence: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "sequence": list(self.sequence),
            "trend": self.trend.as_dict() if self.trend is not None else None,
            "evidence": self.evidence,
        }


@dataclass
class FiltrationReport:
    n_levels: int
    conditions: dict[str, FiltrationCondition]
    verdict: str

    def __getitem__(self, name: str) -> FiltrationCondition:
        return self.conditions[name]

    @property
    def exact_failures(self) -> list[FiltrationCondition]:
        return [c for c in self.conditions.values() if c.status == "fail"]

    def as_dict(self) -> dict:
        return {
            "n_levels": self.n_levels,
            "verdict": self.verdict,
            "conditions": {k: v.as_dict() for k, v in self.conditions.items()},
        }


CONSISTENT_WITH_F = "consistent-with-F"


def validate_filtration(filt: GeneralFiltration, gamma_threshold: float = 1e-2) -> FiltrationReport:
    """F1 exactly per level; F2 as strict decrease plus ``gamma_{n_max} <= gamma_threshold``;
    F3 and F4 as trends of ``log delta_n / log delta_{n+1}`` and ``log gamma_n / log delta_n``.
    """
    m = filt.n_levels
    if m < 3:
        raise ValueError("need at least 3 filtration levels")
    lg, ld = filt.log_gamma, filt.log_delta
    idx = np.arange(1, m + 1)

    bad = np.flatnonzero(ld > lg)
    f1 = FiltrationCondition(
        "F1",
        "pass" if bad.size == 0 else "fail",
        tuple((ld - lg).tolist()),
        evidence={"first_violation": int(bad[0]) + 1} if bad.size else {},
    )

    g_dec = bool(np.all(np.diff(lg) < 0))
    d_dec = bool(np.all(np.diff(ld) <= 0))
    small = bool(lg[-1] <= math.log(gamma_threshold))
    f2 = FiltrationCondition(
        "F2",
        _trend.CONSISTENT if (g_dec and d_dec and small) else _trend.VIOLATION,
        tuple(lg.tolist()),
        evidence={
            "gamma_strictly_decreasing": g_dec,
            "delta_nonincreasing": d_dec,
            "log_gamma_last": float(lg[-1]),
            "log_threshold": math.log(gamma_threshold),
        },
    )

    r3 = ld[:-1] / ld[1:]
    t3 = _trend.summarize(r3, 1.0, idx[:-1])
    f3 = FiltrationCondition("F3", t3.verdict, t3.sequence, t3)

    r4 = lg / ld
    t4 = _trend.summarize(r4, 1.0, idx)
    f4 = FiltrationCondition("F4", t4.verdict, t4.sequence, t4)

    conds = {"F1": f1, "F2": f2, "F3": f3, "F4": f4}
    ok = f1.status == "pass" and all(c.status == _trend.CONSISTENT for c in (f2, f3, f4))
    return FiltrationReport(m, conds, CONSISTENT_WITH_F if ok else _trend.VIOLATION)
