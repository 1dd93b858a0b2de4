"""Finite-data summaries for sequences that are supposed to converge."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONSISTENT = "consistent"
VIOLATION = "violation-trend"

# extrapolated limit must land this close to the target
LIMIT_TOLERANCE = 0.05


@dataclass(frozen=True)
class TrendSummary:
    """How a finite sequence ``a_1..a_m`` approaches ``target``.

    ``limit_estimate`` extrapolates the tail with ``L + a/n + b/n^2`` (or
    ``L + a/n`` for short tails). It is evidence, not a proved limit.
    """

    sequence: tuple[float, ...]
    indices: tuple[int, ...]
    target: float
    last: float
    tail_gap: float
    limit_estimate: float
    gap_monotone: bool
    verdict: str

    def as_dict(self) -> dict:
        return {
            "indices": list(self.indices),
            "sequence": list(self.sequence),
            "target": self.target,
            "last": self.last,
            "tail_gap": self.tail_gap,
            "limit_estimate": self.limit_estimate,
            "gap_monotone": self.gap_monotone,
            "verdict": self.verdict,
        }


def _extrapolate(n: np.ndarray, a: np.ndarray) -> float:
    k = len(a)
    if k == 1:
        return float(a[0])
    tail = max(3, k // 2) if k >= 3 else k
    n, a = n[-tail:], a[-tail:]
    cols = [np.ones_like(n), 1.0 / n]
    if tail >= 4:
        cols.append(1.0 / n**2)
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), a, rcond=None)
    return float(coef[0])


def summarize(sequence, target: float = 1.0, indices=None, tolerance: float = LIMIT_TOLERANCE) -> TrendSummary:
    a = np.asarray(sequence, dtype=float)
    if a.size == 0:
        raise ValueError("cannot summarize an empty sequence")
    n = np.arange(1, a.size + 1, dtype=float) if indices is None else np.asarray(indices, dtype=float)
    gaps = np.abs(a - target)
    limit = _extrapolate(n, a)
    verdict = CONSISTENT if abs(limit - target) <= tolerance else VIOLATION
    return TrendSummary(
        sequence=tuple(float(x) for x in a),
        indices=tuple(int(i) for i in n),
        target=target,
        last=float(a[-1]),
        tail_gap=float(gaps[-1]),
        limit_estimate=limit,
        gap_monotone=bool(np.all(np.diff(gaps) <= 1e-15)),
        verdict=verdict,
    )
