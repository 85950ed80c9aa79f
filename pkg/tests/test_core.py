import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from sublin.core import (
    DIVERGING, Event, Interval, MonotonicityError, TestFunction, capacity_lower, capacity_upper,
    choquet_integral, choquet_lower, choquet_upper, conjugate_expectation, extended_expectation, truncate,
    upper_expectation,
)
from sublin.measures import Discrete, GeneratorSet, Normal, Pareto

PM1 = GeneratorSet.of(Discrete.point(1.0), Discrete.point(-1.0))
N12 = GeneratorSet.of(Normal(0, 1), Normal(0, 2))
SQ = TestFunction.power(2)


@st.composite
def discrete_gens(draw):
    measures = []
    for _ in range(draw(st.integers(1, 3))):
        k = draw(st.integers(1, 4))
        vals = draw(st.lists(st.integers(-6, 6), min_size=k, max_size=k))
        w = np.asarray(draw(st.lists(st.integers(1, 9), min_size=k, max_size=k)), dtype=float)
        measures.append(Discrete(vals, w / w.sum()))
    return GeneratorSet(tuple(measures))


def poly(c0, c1, c2):
    return TestFunction(lambda x: c0 + c1 * x + c2 * x * x, degree=2, coeff_bound=abs(c0) + abs(c1) + abs(c2))


coef = st.floats(-3, 3, allow_nan=False)


class TestEnvelope:
    def test_max_of_means(self):
        assert upper_expectation(PM1, TestFunction.identity()) == 1.0
        assert conjugate_expectation(PM1, TestFunction.identity()) == -1.0

    def test_normal_pair_second_moment(self):
        assert upper_expectation(N12, SQ) == pytest.approx(4.0, rel=1e-6)
        assert conjugate_expectation(N12, SQ) == pytest.approx(1.0, rel=1e-6)

    def test_normal_pair_negative_abs(self):
        neg_abs = TestFunction(lambda x: -abs(x), degree=1, coeff_bound=1.0, breakpoints=(0.0,))
        assert upper_expectation(N12, neg_abs) == pytest.approx(-math.sqrt(2 / math.pi), rel=1e-6)

    def test_singleton_collapses(self):
        g = GeneratorSet.of(Normal(1, 2))
        assert upper_expectation(g, SQ) == pytest.approx(conjugate_expectation(g, SQ), rel=1e-12)

    @given(discrete_gens(), coef, coef, coef, coef, coef, coef)
    def test_subadditive(self, g, a0, a1, a2, b0, b1, b2):
        f, h = poly(a0, a1, a2), poly(b0, b1, b2)
        assert upper_expectation(g, f + h) <= upper_expectation(g, f) + upper_expectation(g, h) + 1e-10

    @given(discrete_gens(), coef, coef, coef, st.floats(0, 10))
    def test_positive_homogeneous(self, g, a0, a1, a2, lam):
        f = poly(a0, a1, a2)
        assert upper_expectation(g, f.scale(lam)) == pytest.approx(lam * upper_expectation(g, f), abs=1e-9)

    @given(discrete_gens(), st.floats(-5, 5))
    def test_constants_preserved(self, g, c):
        assert upper_expectation(g, TestFunction.constant(c)) == pytest.approx(c, abs=1e-12)

    @given(discrete_gens(), coef, coef, coef)
    def test_conjugate_below_upper(self, g, a0, a1, a2):
        f = poly(a0, a1, a2)
        assert conjugate_expectation(g, f) <= upper_expectation(g, f) + 1e-12
        assert conjugate_expectation(g, f) == pytest.approx(-upper_expectation(g, -f), abs=1e-12)

    @given(discrete_gens(), coef, coef, st.floats(0, 3))
    def test_monotone(self, g, a0, a1, bump):
        f = poly(a0, a1, 0.0)
        h = poly(a0 + bump, a1, 0.0)
        assert upper_expectation(g, f) <= upper_expectation(g, h) + 1e-12

    def test_declared_regularity_is_checked(self):
        with pytest.raises(ValueError):
            TestFunction(lambda x: x**3, degree=1, coeff_bound=1.0).check([10.0])
        with pytest.raises(ValueError):
            TestFunction(lambda x: x)  # missing constants


class TestCapacities:
    def test_point_masses(self):
        assert capacity_upper(PM1, Event.ge(0.5)) == 1.0
        assert capacity_lower(PM1, Event.ge(0.5)) == 0.0

    def test_normal_symmetry(self):
        assert capacity_upper(GeneratorSet.of(Normal(0, 1)), Event.gt(0.0)) == pytest.approx(0.5)

    def test_normal_pair_two_sided(self):
        assert capacity_upper(N12, Event.abs_gt(2.0)) == pytest.approx(2 * stats.norm.cdf(-1), rel=1e-12)
        assert capacity_lower(N12, Event.abs_gt(2.0)) == pytest.approx(2 * stats.norm.cdf(-2), rel=1e-10)

    @given(discrete_gens(), st.floats(-6, 6), st.floats(0, 4))
    def test_lower_is_conjugate_and_below(self, g, t, w):
        ev = Event((Interval(t, t + w, True, False),))
        up, lo = capacity_upper(g, ev), capacity_lower(g, ev)
        assert lo <= up + 1e-12
        assert lo == pytest.approx(min(ev.prob(m) for m in g.measures), abs=1e-12)

    def test_complement_round_trip(self):
        ev = Event.abs_ge(1.5)
        assert not ev.contains(1.0) and ev.contains(-1.5) and ev.complement().contains(1.0)
        assert ev.complement().complement() == ev

    def test_interval_rejects_reversed(self):
        with pytest.raises(ValueError):
            Interval(2.0, 1.0)


class TestChoquet:
    def test_exponential_survival(self):
        res = choquet_integral(lambda t: math.exp(-t) if t >= 0 else 1.0, breakpoints=(0.0,))
        assert res.value == pytest.approx(1.0, rel=1e-8)

    @pytest.mark.parametrize("c", [2.5, -1.5, 0.0])
    def test_constants(self, c):
        res = choquet_upper(GeneratorSet.of(Discrete.point(c)))
        assert res.value == pytest.approx(c, abs=1e-12)

    def test_pm1(self):
        assert choquet_upper(PM1).value == pytest.approx(1.0, abs=1e-12)
        assert choquet_lower(PM1).value == pytest.approx(-1.0, abs=1e-12)

    @given(discrete_gens())
    def test_discrete_matches_layer_sum(self, g):
        # oracle: sum over sorted support points of the layer widths times V(X >= t)
        pts = np.unique(np.concatenate([m.values for m in g.measures]))
        lo = pts[0]
        want = lo + sum((b - a) * max(m.sf_ge(b) for m in g.measures) for a, b in zip(pts[:-1], pts[1:]))
        assert choquet_upper(g).value == pytest.approx(want, abs=1e-9)

    def test_singleton_equals_mean(self):
        g = GeneratorSet.of(Normal(0.7, 1.3))
        assert choquet_upper(g).value == pytest.approx(0.7, abs=1e-7)

    def test_heavy_tail_diverges(self):
        res = choquet_upper(GeneratorSet.of(Pareto(1.0)))
        assert res.status == DIVERGING and res.infinite

    def test_non_monotone_survival_rejected(self):
        with pytest.raises(MonotonicityError):
            choquet_integral(lambda t: 0.5 + 0.4 * math.sin(t) if t >= 0 else 1.0)

    def test_out_of_range_survival_rejected(self):
        with pytest.raises(ValueError):
            choquet_integral(lambda t: 2.0)

    def test_quadrature_agrees_with_scipy(self):
        g = GeneratorSet.of(Normal(0.3, 1.0), Normal(-0.2, 2.0))
        f = lambda t: float(g.upper_sf_ge(t))
        pos, _ = integrate.quad(f, 0, np.inf, limit=200)
        neg, _ = integrate.quad(lambda t: f(t) - 1.0, -np.inf, 0, limit=200)
        assert choquet_upper(g).value == pytest.approx(pos + neg, rel=1e-6)


class TestTruncation:
    def test_values(self):
        assert truncate(5, 2) == 2
        assert truncate(-5, 2) == -2
        assert truncate(1.5, 2) == 1.5
        assert truncate(np.array([-3.0, 0.5, 3.0]), 1.0).tolist() == [-1.0, 0.5, 1.0]

    def test_level_must_be_positive(self):
        with pytest.raises(ValueError):
            truncate(1.0, 0.0)

    def test_bounded_converges_at_first_step(self):
        g = GeneratorSet.of(Discrete.uniform([-0.5, 0.75]))
        res = extended_expectation(g)
        assert res.converged
        assert res.value == pytest.approx(0.125, abs=1e-12)
        assert len(res.history) == 2

    def test_symmetric_normal(self):
        res = extended_expectation(GeneratorSet.of(Normal(0, 1)))
        assert res.converged and abs(res.value) < 1e-6

    def test_heavy_tail_does_not_converge(self):
        res = extended_expectation(GeneratorSet.of(Pareto(0.5)), c_schedule=[2.0**k for k in range(16)])
        assert not res.converged
        # oracle: truncated mean int_0^c min(1, x^-1/2) dx = 2 sqrt(c) - 1
        assert res.value == pytest.approx(2 * math.sqrt(2.0**15) - 1, rel=1e-6)
