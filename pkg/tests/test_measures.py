import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from sublin.measures import (
    Discrete, GeneratorSet, Normal, Pareto, QuantileDefined, SurvivalDefined,
    compile_expression, measure_from_dict,
)


@st.composite
def discrete_measures(draw, max_support=5):
    k = draw(st.integers(1, max_support))
    values = draw(st.lists(st.floats(-20, 20, allow_nan=False), min_size=k, max_size=k))
    weights = draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
    w = np.asarray(weights)
    return Discrete(values, w / w.sum())


class TestDiscrete:
    def test_ties_are_merged(self):
        d = Discrete([1.0, 1.0, 2.0], [0.25, 0.25, 0.5])
        assert d.values.tolist() == [1.0, 2.0]
        assert d.probs.tolist() == [0.5, 0.5]

    def test_rejects_bad_probs(self):
        with pytest.raises(ValueError):
            Discrete([0, 1], [0.6, 0.6])
        with pytest.raises(ValueError):
            Discrete([0, 1], [-0.1, 1.1])
        with pytest.raises(ValueError):
            Discrete([], [])

    def test_cdf_left_and_right(self):
        d = Discrete.uniform([-1.0, 1.0])
        assert d.cdf(-1.0) == 0.5
        assert d.cdf_left(-1.0) == 0.0
        assert d.sf_ge(1.0) == 0.5
        assert d.sf_gt(1.0) == 0.0

    def test_small_upper_tail_keeps_precision(self):
        d = Discrete([0.0, 1.0], [1 - 1e-17, 1e-17])
        assert d.sf_ge(1.0) == pytest.approx(1e-17, rel=1e-12)

    @given(discrete_measures())
    def test_abs_tail_matches_enumeration(self, d):
        for x in (0.0, 0.5, 3.0, 10.0):
            want = float(d.probs[np.abs(d.values) >= x].sum()) if x > 0 else 1.0
            assert d.abs_sf_ge(x) == pytest.approx(want, abs=1e-12)

    @given(discrete_measures())
    def test_ppf_inverts_cdf(self, d):
        u = np.linspace(0.01, 0.99, 17)
        q = d.ppf(u)
        assert np.all(d.cdf(q) >= u - 1e-12)
        assert np.all(d.cdf_left(q) <= u + 1e-12)


class TestNormal:
    def test_tail_has_no_cancellation(self):
        n = Normal(0, 1)
        assert n.sf_ge(40.0) == pytest.approx(stats.norm.sf(40.0), rel=1e-10)
        assert n.abs_sf_ge(40.0) == pytest.approx(2 * stats.norm.sf(40.0), rel=1e-10)

    def test_second_moment(self):
        assert Normal(0, 2).expect(lambda x: x**2).value == pytest.approx(4.0, rel=1e-8)

    def test_rejects_nonpositive_sd(self):
        with pytest.raises(ValueError):
            Normal(0, 0)


class TestSignSplit:
    def test_pareto_survival(self):
        p = Pareto(3.0)
        assert p.abs_sf_ge(2.0) == pytest.approx(1 / 8)
        assert p.abs_sf_ge(0.5) == 1.0

    def test_symmetric_pareto_mass_split(self):
        p = Pareto(2.0, sign="symmetric")
        assert p.cdf(-2.0) == pytest.approx(0.125)
        assert p.sf_ge(2.0) == pytest.approx(0.125)

    def test_survival_expression_matches_pareto(self):
        s = SurvivalDefined("min(1, x**-3)", breakpoints=(1.0,))
        p = Pareto(3.0)
        xs = np.array([0.3, 1.0, 2.5, 40.0])
        assert np.allclose(s.abs_sf_ge(xs), p.abs_sf_ge(xs))

    def test_survival_must_be_monotone(self):
        with pytest.raises(ValueError):
            SurvivalDefined("min(1, x)")

    def test_quantile_defined_uniform(self):
        q = QuantileDefined("2*u - 1")
        assert q.cdf(0.0) == pytest.approx(0.5, abs=1e-9)
        assert q.expect(lambda x: x**2).value == pytest.approx(1 / 3, rel=1e-7)


class TestExpressions:
    def test_disallows_attribute_access(self):
        with pytest.raises(ValueError):
            compile_expression("x.__class__")

    def test_unknown_name(self):
        with pytest.raises(ValueError):
            compile_expression("y + 1")

    def test_vectorized(self):
        f = compile_expression("where(x > 1, x**2, 0)")
        assert f(np.array([0.5, 2.0])).tolist() == [0.0, 4.0]


class TestGeneratorSet:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            GeneratorSet(())

    def test_envelope_tails(self):
        g = GeneratorSet.of(Normal(0, 1), Normal(0, 2))
        assert g.upper_abs_sf_gt(2.0) == pytest.approx(2 * stats.norm.cdf(-1.0), rel=1e-12)

    def test_json_round_trip(self):
        g = GeneratorSet.of(Discrete([-1, 2], [0.5, 0.5]), Normal(1, 3), Pareto(2.5, 2.0, "symmetric"),
                            SurvivalDefined("min(1, x**-3)"), label="mix")
        back = GeneratorSet.from_json(g.to_json())
        assert back.to_dict() == g.to_dict()
        assert back.upper_abs_sf_ge(3.0) == g.upper_abs_sf_ge(3.0)

    def test_single_measure_document(self):
        g = GeneratorSet.from_dict({"kind": "normal", "mean": 0, "sd": 1})
        assert len(g) == 1

    def test_unknown_keys_rejected(self):
        with pytest.raises(ValueError):
            measure_from_dict({"kind": "normal", "mean": 0, "sigma": 1})
        with pytest.raises(ValueError):
            GeneratorSet.from_dict({"measures": [], "extra": 1})
        with pytest.raises(ValueError):
            measure_from_dict({"kind": "cauchy"})

    def test_json_is_plain(self):
        doc = json.loads(GeneratorSet.of(Discrete.point(1.0)).to_json())
        assert doc["measures"][0]["kind"] == "discrete"
        assert math.isclose(doc["measures"][0]["probs"][0], 1.0)
