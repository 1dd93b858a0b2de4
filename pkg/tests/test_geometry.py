import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morandim.geometry import (
    DepthError,
    MoranGeometrySpec,
    ProjectionError,
    as_fraction,
    clustering_count,
    clustering_diagnostic,
    depth_for_diameter,
    diam,
    log_diam_prefixes,
    m5_trend,
    min_diameter,
    project,
    project_paths,
    realize,
    validate,
)
from morandim.symbolic import InvalidWordError, ProductMeasureSpec, sample_path

F = Fraction
CANTOR = MoranGeometrySpec.cantor()
OVERLAP = MoranGeometrySpec.homogeneous((F(3, 5), F(3, 5)), (F(0), F(2, 5)))
SINGLE = MoranGeometrySpec.homogeneous((F(1, 2),))
DOUBLY_EXP = MoranGeometrySpec(tuple((F(1, 2**2**j),) * 2 for j in range(1, 7)), ((F(1, 2**128),) * 2,))


@st.composite
def geometries(draw, max_n=3, max_levels=2):
    """Random non-overlapping uniform-gaps constructions with level-dependent ratios."""

    def row():
        n = draw(st.integers(1, max_n))
        den = draw(st.integers(n + 1, 12))
        nums = draw(st.lists(st.integers(1, 3), min_size=n, max_size=n))
        if sum(nums) >= den:
            nums = [1] * n
        return tuple(F(k, den) for k in nums)

    pre = tuple(row() for _ in range(draw(st.integers(0, max_levels))))
    per = tuple(row() for _ in range(draw(st.integers(1, max_levels))))
    return MoranGeometrySpec(pre, per)


def words_of(geom, length):
    return product(*[range(geom.space.alphabet_size(j)) for j in range(1, length + 1)])


class TestSpec:
    def test_fraction_parsing(self):
        assert as_fraction("1/3") == F(1, 3)
        assert as_fraction("2^-4") == F(1, 16)
        assert as_fraction(0.25) == F(1, 4)
        assert as_fraction("0.4") == F(2, 5)
        with pytest.raises(TypeError):
            as_fraction(True)

    def test_ratio_bounds(self):
        with pytest.raises(ValueError):
            MoranGeometrySpec.homogeneous((F(1), F(1, 3)))

    def test_child_must_stay_inside(self):
        with pytest.raises(ValueError, match="leaves its parent"):
            MoranGeometrySpec.homogeneous((F(1, 2),), (F(3, 4),))

    def test_uniform_gaps_need_room(self):
        with pytest.raises(ValueError):
            MoranGeometrySpec.homogeneous((F(2, 3), F(2, 3)))

    def test_layout_names(self):
        assert CANTOR.layout == "uniform-gaps"
        assert OVERLAP.layout == "explicit"


class TestRealize:
    def test_cantor_children(self):
        r = realize(CANTOR, (0,), exact=True)
        assert (r.left, r.right) == (0, F(1, 3))
        r = realize(CANTOR, (1,), exact=True)
        assert (r.left, r.right) == (F(2, 3), 1)
        root = realize(CANTOR, ())
        assert (root.left, root.right) == (0.0, 1.0)

    def test_invalid_word(self):
        with pytest.raises(InvalidWordError):
            realize(CANTOR, (0, 2))

    def test_diameters(self):
        assert diam(CANTOR, (0, 1, 1, 0)) == pytest.approx(3.0**-4, rel=1e-14)
        alt = MoranGeometrySpec((), ((F(1, 3),) * 2, (F(1, 4),) * 2))
        assert diam(alt, (1, 0)) == pytest.approx(1 / 12, rel=1e-14)
        assert diam(CANTOR, ()) == 1.0

    @settings(max_examples=40, deadline=None)
    @given(geometries(), st.data())
    def test_nesting_and_product_law(self, geom, data):
        n = data.draw(st.integers(1, 10))
        word = tuple(data.draw(st.integers(0, geom.space.alphabet_size(j) - 1)) for j in range(1, n + 1))
        child, parent = realize(geom, word, exact=True), realize(geom, word[:-1], exact=True)
        assert parent.left <= child.left <= child.right <= parent.right
        assert child.diam == parent.diam * geom.ratios(n)[word[-1]]
        ld = log_diam_prefixes(geom, word)
        assert math.exp(ld[-1]) == pytest.approx(float(child.diam), rel=1e-12)


class TestProject:
    def test_extreme_paths(self):
        p = project(CANTOR, (0,) * 20, 1e-9)
        assert abs(p.x - 0.0) <= 3.0**-20 / 2 + 1e-18
        q = project(CANTOR, (1,) * 20, 1e-9)
        assert abs(q.x - 1.0) <= 3.0**-20 / 2 + 1e-15
        assert q.error_bound == pytest.approx(3.0**-20 / 2)

    def test_single_child_goes_to_zero(self):
        assert project(SINGLE, (0,) * 40, 1e-10).x == pytest.approx(0.0, abs=1e-12)

    def test_too_shallow(self):
        with pytest.raises(ProjectionError, match="diameter"):
            project(CANTOR, (0, 1), 1e-3)

    def test_prefixes_are_cauchy(self):
        m = ProductMeasureSpec.bernoulli((0.3, 0.7))
        path = sample_path(m, 3, 30)
        xs = [project(CANTOR, path[:n], 1.0).x for n in range(1, 31)]
        for n in range(30):
            for k in range(n, 30):
                assert abs(xs[n] - xs[k]) <= 3.0 ** -(n + 1) + 1e-15

    def test_vectorized_matches_scalar(self):
        m = ProductMeasureSpec.bernoulli((0.5, 0.5))
        paths = np.array([sample_path(m, s, 25) for s in range(20)])
        xs = project_paths(CANTOR, paths)
        assert xs == pytest.approx([project(CANTOR, p, 1.0).x for p in paths], abs=1e-15)


class TestValidate:
    def test_cantor_holds(self):
        rep = validate(CANTOR, 8)
        assert not rep.exact_failures and not rep.truncated
        assert rep["M1"].status == rep["M3"].status == "holds-at-depth"
        assert rep["M6"].constant == pytest.approx(1 / 3)
        assert rep["M7"].constant == pytest.approx(1.0)
        assert np.allclose(rep["M7"].evidence["log_beta"], -np.arange(1, 9) * math.log(3))
        assert rep["M8"].constant == pytest.approx(1.0)
        assert rep["M4"].constant == 0.5

    def test_overlap_fails_m3_with_witness(self):
        rep = validate(OVERLAP, 2)
        m3 = rep["M3"]
        assert m3.status == "fails"
        assert m3.witness == ("0", "1")
        assert m3.evidence["overlap"] == ["2/5", "3/5"]
        assert "<=" in m3.evidence["inequality"]
        assert rep["M1"].status == "holds-at-depth"

    def test_doubly_exponential_m5_trend(self):
        rep = validate(DOUBLY_EXP, 6)
        t = rep["M5"].trend
        assert t.verdict == "violation-trend"
        assert abs(t.last - 0.5) < 0.05
        # exponent sums 2^(n+1) - 2 against 2^(n+2) - 2
        n = np.arange(1, 6)
        assert np.allclose(t.sequence, (2.0 ** (n + 1) - 2) / (2.0 ** (n + 2) - 2))

    def test_cantor_m5_consistent(self):
        t = m5_trend(CANTOR, 30)
        assert t.verdict == "consistent"
        assert t.gap_monotone

    def test_truncation_flag(self):
        rep = validate(CANTOR, 12, budget=1000)
        assert rep.truncated and rep["M1"].checked_depth == 8

    def test_m8_matches_bruteforce(self):
        geom = MoranGeometrySpec((), ((F(1, 3), F(1, 4)), (F(1, 5), F(1, 2))))
        depth = 5
        best = Fraction(0)
        for a in range(depth):
            for b in range(1, depth - a + 1):
                for iota in words_of(geom, a):
                    for kappa in words_of(geom, b):
                        whole = realize(geom, iota + kappa, exact=True).diam
                        ratio = whole / (realize(geom, iota, exact=True).diam * realize(geom, kappa, exact=True).diam)
                        best = max(best, ratio)
        assert validate(geom, depth)["M8"].constant == pytest.approx(float(best), rel=1e-12)


def _brute_clustering(geom, x, r, max_len):
    # every word up to max_len, exact
    count = 0
    for n in range(1, max_len + 1):
        for w in words_of(geom, n):
            iv, parent = realize(geom, w, exact=True), realize(geom, w[:-1], exact=True)
            if iv.diam <= r < parent.diam and iv.left <= x + r and iv.right >= x - r:
                count += 1
    return count


class TestClustering:
    def test_examples(self):
        assert clustering_count(CANTOR, 0, F(1, 81), 8) == 1
        assert clustering_count(CANTOR, F(2, 9), F(1, 9), 8) == 2
        assert clustering_count(SINGLE, 0, F(1, 10), 10) == 1

    def test_depth_error(self):
        with pytest.raises(DepthError):
            clustering_count(CANTOR, 0, F(1, 3**10), 5)

    @settings(max_examples=25, deadline=None)
    @given(geometries(max_n=3, max_levels=2), st.fractions(0, 1), st.integers(1, 4))
    def test_matches_bruteforce(self, geom, x, k):
        r = min_diameter(geom, k)
        assert r < 1
        max_len = depth_for_diameter(geom, math.log(r)) + 1
        got = clustering_count(geom, x, r, max_len)
        assert got == _brute_clustering(geom, x, r, max_len)

    @settings(max_examples=25, deadline=None)
    @given(geometries(), st.integers(0, 10**6), st.integers(1, 5))
    def test_at_least_one_on_the_set(self, geom, seed, k):
        r = min_diameter(geom, k)
        depth = depth_for_diameter(geom, math.log(r)) + 1
        path = sample_path(ProductMeasureSpec.uniform(geom.space), seed, depth)
        x = realize(geom, path, exact=True).left
        assert clustering_count(geom, x, r, depth) >= 1

    def test_cantor_diagnostic_bounded(self):
        rep = clustering_diagnostic(CANTOR, ProductMeasureSpec.bernoulli((0.5, 0.5)), 100, 12, seed=0)
        assert rep.counts.shape == (100, 12)
        assert rep.counts.min() >= 1
        assert rep.sup_estimate <= 4
        assert rep.max_per_r.max() == rep.max_per_r[:3].max()

    def test_single_child_diagnostic(self):
        rep = clustering_diagnostic(SINGLE, ProductMeasureSpec.bernoulli((1.0,)), 10, 8)
        assert np.all(rep.counts == 1)

    def test_overlap_still_reports(self):
        rep = clustering_diagnostic(OVERLAP, ProductMeasureSpec.bernoulli((0.5, 0.5)), 10, 5)
        assert rep.counts.min() >= 1

    def test_deterministic(self):
        m = ProductMeasureSpec.bernoulli((0.3, 0.7))
        a = clustering_diagnostic(CANTOR, m, 20, 6, seed=5)
        b = clustering_diagnostic(CANTOR, m, 20, 6, seed=5)
        assert np.array_equal(a.points, b.points) and np.array_equal(a.counts, b.counts)
