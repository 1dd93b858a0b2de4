import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morandim.symbolic import (
    BudgetExceededError,
    InvalidWordError,
    ProductMeasureSpec,
    SymbolSpaceSpec,
    alphabet_size,
    check_word,
    correlation_sum,
    correlation_sum_bruteforce,
    correlation_sum_sequence,
    cylinder_masses,
    cylinder_measure,
    derive_seed,
    format_word,
    log_sum_squares,
    parse_word,
    sample_path,
    sample_paths,
)


def prob_vector(n):
    # strictly positive weights, normalised
    return st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n).map(lambda w: tuple(x / math.fsum(w) for x in w))


@st.composite
def measures(draw, max_levels=3, max_n=4):
    pre_sizes = draw(st.lists(st.integers(1, max_n), max_size=max_levels))
    per_sizes = draw(st.lists(st.integers(1, max_n), min_size=1, max_size=max_levels))
    pre = tuple(draw(prob_vector(n)) for n in pre_sizes)
    per = tuple(draw(prob_vector(n)) for n in per_sizes)
    return ProductMeasureSpec(pre, per)


class TestAlphabets:
    def test_constant_binary(self):
        assert alphabet_size(SymbolSpaceSpec((), (2,)), 7) == 2

    def test_preperiod_then_period(self):
        space = SymbolSpaceSpec((3,), (2, 4))
        assert alphabet_size(space, 1) == 3
        # the period starts at level 2: (level - 1 - 1) mod 2 picks 2, 4, 2, 4, ...
        assert alphabet_size(space, 3) == 4
        assert alphabet_size(space, 4) == 2
        assert [space.alphabet_size(j) for j in range(1, 7)] == space.sizes(6).tolist() == [3, 2, 4, 2, 4, 2]

    def test_rejects_empty_period_and_zero_size(self):
        with pytest.raises(ValueError):
            SymbolSpaceSpec((), ())
        with pytest.raises(ValueError):
            SymbolSpaceSpec((0,), (2,))

    def test_level_must_be_positive(self):
        with pytest.raises(ValueError):
            alphabet_size(SymbolSpaceSpec(), 0)


class TestWords:
    def test_parse_and_format(self):
        assert parse_word("0101") == (0, 1, 0, 1)
        assert parse_word("0,10,3") == (0, 10, 3)
        assert parse_word("") == ()
        assert format_word((0, 1, 1)) == "011"
        assert format_word((0, 10)) == "0,10"

    def test_check_word(self):
        space = SymbolSpaceSpec((3,), (2,))
        check_word(space, (2, 1, 0))
        with pytest.raises(InvalidWordError, match="level 2"):
            check_word(space, (2, 2))
        with pytest.raises(InvalidWordError):
            check_word(space, (-1,))


class TestMeasures:
    def test_vector_must_sum_to_one(self):
        with pytest.raises(ValueError, match="sums to"):
            ProductMeasureSpec.bernoulli((0.4, 0.5))

    def test_zero_entries_forbidden(self):
        with pytest.raises(ValueError, match="non-positive"):
            ProductMeasureSpec.bernoulli((0.0, 1.0))

    def test_cylinder_examples(self):
        m = ProductMeasureSpec.bernoulli((0.3, 0.7))
        assert cylinder_measure(m, ()).value == 1.0
        assert cylinder_measure(m, (0, 1)).value == pytest.approx(0.21, rel=1e-14)
        u = ProductMeasureSpec.bernoulli((0.5, 0.5))
        assert cylinder_measure(u, (1, 0, 0, 1, 1)).value == pytest.approx(2.0**-5, rel=1e-14)

    def test_invalid_word_raises(self):
        with pytest.raises(InvalidWordError):
            cylinder_measure(ProductMeasureSpec.bernoulli((0.3, 0.7)), (0, 2))

    def test_deep_cylinder_stays_finite(self):
        # 2^-5000 underflows a double; its log does not
        lv = cylinder_measure(ProductMeasureSpec.bernoulli((0.5, 0.5)), (0,) * 5000).log_value
        assert lv == pytest.approx(-5000 * math.log(2), rel=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(measures(), st.data())
    def test_log_space_matches_product(self, m, data):
        n = data.draw(st.integers(1, 50))
        word = [data.draw(st.integers(0, m.space.alphabet_size(j) - 1)) for j in range(1, n + 1)]
        direct = math.prod(m.vector(j)[i] for j, i in enumerate(word, start=1))
        lv = cylinder_measure(m, word).log_value
        assert lv <= 0
        assert math.exp(lv) == pytest.approx(direct, rel=1e-12)


class TestCorrelationSums:
    def test_examples(self):
        assert math.exp(correlation_sum(ProductMeasureSpec.bernoulli((0.5, 0.5)), 1)) == pytest.approx(0.5, rel=1e-15)
        assert math.exp(correlation_sum(ProductMeasureSpec.bernoulli((0.3, 0.7)), 3)) == pytest.approx(0.195112, rel=1e-12)
        alt = ProductMeasureSpec((), ((0.5, 0.5), (0.2, 0.8)))
        assert math.exp(correlation_sum(alt, 2)) == pytest.approx(0.34, rel=1e-14)

    def test_bruteforce_examples(self):
        assert correlation_sum_bruteforce(ProductMeasureSpec.bernoulli((0.5, 0.5)), 3) == pytest.approx(0.125, rel=1e-15)
        assert correlation_sum_bruteforce(ProductMeasureSpec.bernoulli((0.3, 0.7)), 3) == pytest.approx(0.195112, rel=1e-12)

    def test_budget_guard(self):
        with pytest.raises(BudgetExceededError):
            correlation_sum_bruteforce(ProductMeasureSpec.bernoulli((0.5, 0.5)), 24)
        with pytest.raises(BudgetExceededError):
            cylinder_masses(ProductMeasureSpec.bernoulli((0.5, 0.5)), 5, budget=31)

    def test_level_dependent_product_formula(self):
        # preperiod, then a two-level period, checked level by level
        m = ProductMeasureSpec(((0.1, 0.2, 0.7),), ((0.5, 0.5), (0.25, 0.25, 0.5)))
        seq = np.exp(correlation_sum_sequence(m, 6))
        levels = [0.01 + 0.04 + 0.49, 0.5, 0.375, 0.5, 0.375, 0.5]
        assert seq == pytest.approx(np.cumprod(levels), rel=1e-13)
        for n in range(1, 7):
            assert correlation_sum_bruteforce(m, n) == pytest.approx(seq[n - 1], rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(measures(max_n=3), st.integers(1, 7))
    def test_oracle_equivalence(self, m, n):
        exact = math.exp(correlation_sum(m, n))
        assert correlation_sum_bruteforce(m, n) == pytest.approx(exact, rel=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(measures(max_n=3), st.integers(1, 7))
    def test_mass_normalization(self, m, n):
        assert math.fsum(cylinder_masses(m, n).tolist()) == pytest.approx(1.0, abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(measures(), st.integers(2, 40))
    def test_monotone_in_level(self, m, n):
        seq = correlation_sum_sequence(m, n)
        assert np.all(np.diff(seq) <= 1e-15)

    def test_log_sum_squares(self):
        masses = np.array([0.2, 0.3, 0.5])
        assert math.exp(log_sum_squares(np.log(masses))) == pytest.approx(0.38, rel=1e-14)
        with pytest.raises(ValueError):
            log_sum_squares(np.array([]))


class TestSampling:
    def test_single_symbol(self):
        assert sample_path(ProductMeasureSpec.bernoulli((1.0,)), 123, 5).tolist() == [0] * 5

    def test_prefix_stable(self):
        m = ProductMeasureSpec.bernoulli((0.3, 0.7))
        assert np.array_equal(sample_path(m, 9, 20)[:10], sample_path(m, 9, 10))
        deep = sample_paths(m, 4, 50, 30)
        assert np.array_equal(deep[:, :12], sample_paths(m, 4, 50, 12))

    def test_deterministic(self):
        m = ProductMeasureSpec.bernoulli((0.3, 0.7))
        assert np.array_equal(sample_path(m, 5, 100), sample_path(m, 5, 100))
        assert not np.array_equal(sample_path(m, 5, 100), sample_path(m, 6, 100))

    def test_first_symbol_frequency(self):
        first = sample_paths(ProductMeasureSpec.bernoulli((0.5, 0.5)), 0, 100_000, 1)[:, 0]
        assert abs(np.mean(first == 0) - 0.5) < 0.005

    def test_level_marginals(self):
        m = ProductMeasureSpec(((0.2, 0.8),), ((0.1, 0.3, 0.6),))
        paths = sample_paths(m, 1, 40_000, 3)
        assert np.mean(paths[:, 0] == 0) == pytest.approx(0.2, abs=0.01)
        freq = np.bincount(paths[:, 2], minlength=3) / len(paths)
        assert freq == pytest.approx([0.1, 0.3, 0.6], abs=0.01)
        check_word(m.space, paths[0])

    def test_derived_seeds_differ(self):
        assert derive_seed(0, 1) != derive_seed(0, 2)
        assert derive_seed(0, 1) == derive_seed(0, 1)
