"""Symbol spaces, words, product measures and exact cylinder arithmetic.

The symbol space is an infinite product of finite alphabets ``I_1 x I_2 x ...``
described by a finite preperiod followed by a period that repeats forever.
Symbols are 0-indexed integers. Cylinder masses are always combined in
natural-log space so that paths of length ~10^4 do not underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import logsumexp

__all__ = [
    "InvalidWordError",
    "BudgetExceededError",
    "SymbolSpaceSpec",
    "ProductMeasureSpec",
    "CylinderMeasureValue",
    "Word",
    "parse_word",
    "format_word",
    "check_word",
    "alphabet_size",
    "cylinder_measure",
    "log_cylinder_prefixes",
    "correlation_sum",
    "correlation_sum_sequence",
    "cylinder_masses",
    "correlation_sum_bruteforce",
    "sample_path",
    "sample_paths",
    "derive_seed",
    "log_sum_squares",
    "ENUMERATION_BUDGET",
]

ENUMERATION_BUDGET = 10**7

Word = Sequence[int]


class InvalidWordError(ValueError):
    """A symbol lies outside the alphabet of its level."""


class BudgetExceededError(RuntimeError):
    """An exhaustive enumeration would exceed its budget."""


def _level_index(n_pre: int, n_per: int, level: int) -> int:
    # index into preperiod + period, level is 1-based
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    if level <= n_pre:
        return level - 1
    return n_pre + (level - 1 - n_pre) % n_per


def level_rows(n_pre: int, n_per: int, depth: int) -> np.ndarray:
    """Vectorized :func:`_level_index` for levels ``1..depth``."""
    levels = np.arange(1, depth + 1)
    return np.where(levels <= n_pre, levels - 1, n_pre + (levels - 1 - n_pre) % n_per).astype(np.int64)


@dataclass(frozen=True)
class SymbolSpaceSpec:
    """Eventually periodic sequence of alphabet sizes ``N_j``."""

    preperiod: tuple[int, ...] = ()
    period: tuple[int, ...] = (2,)

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(n) for n in self.preperiod))
        object.__setattr__(self, "period", tuple(int(n) for n in self.period))
        if not self.period:
            raise ValueError("period must be nonempty")
        if any(n < 1 for n in self.preperiod + self.period):
            raise ValueError("alphabet sizes must be >= 1")

    def alphabet_size(self, level: int) -> int:
        table = self.preperiod + self.period
        return table[_level_index(len(self.preperiod), len(self.period), level)]

    def sizes(self, depth: int) -> np.ndarray:
        """Alphabet sizes for levels ``1..depth``."""
        return np.asarray(self.preperiod + self.period, dtype=np.int64)[
            level_rows(len(self.preperiod), len(self.period), depth)
        ]

    def count_words(self, depth: int) -> int:
        return math.prod(self.alphabet_size(j) for j in range(1, depth + 1))


def alphabet_size(space: SymbolSpaceSpec, level: int) -> int:
    return space.alphabet_size(level)


def parse_word(text: str) -> tuple[int, ...]:
    """Parse ``"0101"`` or ``"0,10,3"`` into a tuple of symbols."""
    text = text.strip()
    if not text:
        return ()
    if "," in text:
        return tuple(int(t) for t in text.split(","))
    return tuple(int(c) for c in text)


def format_word(word: Word) -> str:
    word = [int(i) for i in word]
    if all(i < 10 for i in word):
        return "".join(str(i) for i in word)
    return ",".join(str(i) for i in word)


def check_word(space: SymbolSpaceSpec, word: Word) -> None:
    """Raise :class:`InvalidWordError` unless ``0 <= i_j < N_j`` for every level."""
    arr = np.asarray(word, dtype=np.int64)
    if arr.ndim != 1:
        raise InvalidWordError("a word is a one-dimensional sequence of symbols")
    if arr.size == 0:
        return
    sizes = space.sizes(arr.size)
    bad = np.flatnonzero((arr < 0) | (arr >= sizes))
    if bad.size:
        j = int(bad[0])
        raise InvalidWordError(
            f"symbol {int(arr[j])} at level {j + 1} outside alphabet of size {int(sizes[j])}"
        )


def _as_vector(p) -> tuple[float, ...]:
    vec = tuple(float(x) for x in p)
    if not vec:
        raise ValueError("probability vectors must be nonempty")
    if any(not x > 0 for x in vec):
        raise ValueError(f"probability vector {vec} has non-positive entries")
    if abs(math.fsum(vec) - 1.0) > 1e-12:
        raise ValueError(f"probability vector {vec} sums to {math.fsum(vec)!r}, not 1")
    return vec


@dataclass(frozen=True)
class ProductMeasureSpec:
    """Product (Bernoulli-type) measure with level-dependent probability vectors.

    ``mu([i_1...i_n]) = prod_j p_{j, i_j}``. The level structure follows the
    same preperiod/period convention as :class:`SymbolSpaceSpec`, and the
    induced symbol space is available as :attr:`space`.
    """

    preperiod: tuple[tuple[float, ...], ...] = ()
    period: tuple[tuple[float, ...], ...] = ((0.5, 0.5),)
    space: SymbolSpaceSpec = field(init=False, repr=False, compare=False)
    _log_table: np.ndarray = field(init=False, repr=False, compare=False)
    _log_square_sums: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pre = tuple(_as_vector(p) for p in self.preperiod)
        per = tuple(_as_vector(p) for p in self.period)
        if not per:
            raise ValueError("period must be nonempty")
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)
        object.__setattr__(
            self, "space", SymbolSpaceSpec(tuple(len(p) for p in pre), tuple(len(p) for p in per))
        )
        vectors = pre + per
        width = max(len(p) for p in vectors)
        table = np.full((len(vectors), width), -np.inf)
        for k, p in enumerate(vectors):
            table[k, : len(p)] = np.log(p)
        table.setflags(write=False)
        object.__setattr__(self, "_log_table", table)
        sq = np.array([math.log(math.fsum(x * x for x in p)) for p in vectors])
        sq.setflags(write=False)
        object.__setattr__(self, "_log_square_sums", sq)

    @classmethod
    def bernoulli(cls, p: Sequence[float]) -> "ProductMeasureSpec":
        return cls((), (tuple(p),))

    @classmethod
    def uniform(cls, space: SymbolSpaceSpec) -> "ProductMeasureSpec":
        return cls(
            tuple((1.0 / n,) * n for n in space.preperiod),
            tuple((1.0 / n,) * n for n in space.period),
        )

    def _rows(self, depth: int) -> np.ndarray:
        return level_rows(len(self.preperiod), len(self.period), depth)

    def vector(self, level: int) -> tuple[float, ...]:
        vectors = self.preperiod + self.period
        return vectors[_level_index(len(self.preperiod), len(self.period), level)]

    def log_table(self, depth: int) -> np.ndarray:
        """``(depth, max N)`` array of ``log p_{j,i}``, padded with ``-inf``."""
        return self._log_table[self._rows(depth)]

    def log_square_sums(self, depth: int) -> np.ndarray:
        """``log sum_i p_{j,i}^2`` for levels ``1..depth``."""
        return self._log_square_sums[self._rows(depth)]


@dataclass(frozen=True)
class CylinderMeasureValue:
    log_value: float
    word: tuple[int, ...]

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def log_cylinder_prefixes(measure: ProductMeasureSpec, path: Word) -> np.ndarray:
    """Running ``log mu([path|_n])`` for ``n = 1..len(path)``."""
    check_word(measure.space, path)
    arr = np.asarray(path, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0)
    logp = measure.log_table(arr.size)[np.arange(arr.size), arr]
    return np.cumsum(logp)


def cylinder_measure(measure: ProductMeasureSpec, word: Word) -> CylinderMeasureValue:
    """Mass of the cylinder ``[word]`` in log space."""
    prefixes = log_cylinder_prefixes(measure, word)
    log_value = float(prefixes[-1]) if prefixes.size else 0.0
    return CylinderMeasureValue(log_value, tuple(int(i) for i in word))


def correlation_sum_sequence(measure: ProductMeasureSpec, n_max: int) -> np.ndarray:
    """``log sum_{w in Sigma_n} mu([w])^2`` for ``n = 1..n_max`` via the product formula."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return np.cumsum(measure.log_square_sums(n_max))


def correlation_sum(measure: ProductMeasureSpec, n: int) -> float:
    """Log of ``sum_{w in Sigma_n} mu([w])^2 = prod_j sum_i p_{j,i}^2``."""
    return float(correlation_sum_sequence(measure, n)[-1])


def cylinder_masses(measure: ProductMeasureSpec, n: int, budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """Masses of every word of length ``n``, in lexicographic order.

    Raises :class:`BudgetExceededError` if ``#Sigma_n`` exceeds ``budget``.
    """
    count = measure.space.count_words(n)
    if count > budget:
        raise BudgetExceededError(f"#Sigma_{n} = {count} exceeds enumeration budget {budget}")
    masses = np.ones(1)
    for j in range(1, n + 1):
        masses = np.outer(masses, np.asarray(measure.vector(j))).ravel()
    return masses


def correlation_sum_bruteforce(measure: ProductMeasureSpec, n: int, budget: int = ENUMERATION_BUDGET) -> float:
    """``sum mu([w])^2`` over all words of length ``n`` by direct enumeration."""
    masses = cylinder_masses(measure, n, budget)
    return math.fsum((masses * masses).tolist())


def derive_seed(seed: int, *keys: int) -> int:
    """Independent child seed for ``(seed, *keys)``; stable across runs."""
    return int(np.random.SeedSequence([int(seed), *(int(k) for k in keys)]).generate_state(1, np.uint64)[0])


def _symbols_from_uniforms(measure: ProductMeasureSpec, u: np.ndarray) -> np.ndarray:
    # u has shape (depth, ...) ; first axis indexes levels
    depth = u.shape[0]
    out = np.empty(u.shape, dtype=np.int64)
    rows = measure._rows(depth)
    vectors = measure.preperiod + measure.period
    for r in np.unique(rows):
        cdf = np.cumsum(vectors[r])
        cdf[-1] = np.inf
        mask = rows == r
        out[mask] = np.searchsorted(cdf, u[mask], side="right")
    return out


def sample_path(measure: ProductMeasureSpec, seed: int, depth: int) -> np.ndarray:
    """Draw ``path|_depth`` for a mu-random path, prefix-stable in ``depth``."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    u = np.random.default_rng(seed).random(depth)
    return _symbols_from_uniforms(measure, u)


def sample_paths(measure: ProductMeasureSpec, seed: int, n_paths: int, depth: int) -> np.ndarray:
    """``(n_paths, depth)`` array of i.i.d. paths.

    Uniforms are drawn level by level, so for fixed ``(seed, n_paths)`` a
    deeper call extends every row of a shallower one.
    """
    if depth < 1 or n_paths < 1:
        raise ValueError("depth and n_paths must be >= 1")
    u = np.random.default_rng(seed).random((depth, n_paths))
    return _symbols_from_uniforms(measure, u).T


def log_sum_squares(log_masses: np.ndarray) -> float:
    """``log sum m_i^2`` from ``log m_i``."""
    if len(log_masses) == 0:
        raise ValueError("empty collection")
    return float(logsumexp(2.0 * np.asarray(log_masses)))
