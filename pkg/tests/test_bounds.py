import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sublin.bounds import (
    BlockingInputs, ExpIneqInputs, best_exp_inequality_rhs, blocking_bound, exp_gauss_term, exp_inequality_inputs,
    exp_inequality_rhs, exp_middle_term, moment_lower_bound, moment_bracket,
)
from sublin.functionals import loglog, normalizer
from sublin.measures import Discrete, GeneratorSet, Normal, Pareto
from sublin.paths import hitting_functional, solve_dp


class TestExpInequality:
    def test_saturated_gauss_term(self):
        y = 0.7
        inp = ExpIneqInputs(n=10, x=10 * y, y=y, p=2.0, delta=1.0, A_n=y**2, B_n=math.inf, tail_max=0.0)
        assert exp_middle_term(inp) == pytest.approx(2 * math.e**4, rel=1e-12)
        assert exp_gauss_term(inp) == 1.0
        assert exp_inequality_rhs(inp) == pytest.approx(2 * math.e**4 + 1, rel=1e-12)

    def test_gauss_only(self):
        inp = ExpIneqInputs(n=1, x=2.0, y=1.0, delta=1.0, A_n=0.0, B_n=1.0, tail_max=0.0)
        assert exp_inequality_rhs(inp) == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_tail_only(self):
        inp = ExpIneqInputs(n=1, x=2.0, y=1.0, A_n=0.0, B_n=0.0, tail_max=0.1)
        assert exp_inequality_rhs(inp) == pytest.approx(0.1)

    def test_middle_term_in_logs_does_not_overflow(self):
        inp = ExpIneqInputs(n=1, x=1e4, y=1.0, p=4.0, A_n=1e-3)
        assert exp_middle_term(inp) == 0.0
        big = ExpIneqInputs(n=1, x=1e4, y=1.0, p=4.0, A_n=10.0)
        assert big.tail_max == 0.0 and math.isinf(exp_middle_term(big))

    def test_validation(self):
        with pytest.raises(ValueError):
            ExpIneqInputs(n=1, x=1.0, y=1.0, p=1.5)
        with pytest.raises(ValueError):
            ExpIneqInputs(n=1, x=1.0, y=1.0, delta=0.0)
        with pytest.raises(ValueError):
            ExpIneqInputs(n=1, x=1.0, y=1.0, tail_max=1.5)

    def test_inputs_for_bounded_pair(self):
        g = GeneratorSet.of(Discrete.uniform([-1.0, 1.0]), Discrete.point(0.5))
        inp = exp_inequality_inputs(g, n=4, x=2.0, y=0.75, p=2.0)
        # A_n = n max E[(X+ ^ y)^2]: uniform gives 0.5 * 0.5625, the point mass 0.25
        assert inp.A_n == pytest.approx(4 * 0.28125, rel=1e-9)
        assert inp.B_n == pytest.approx(4 * max(0.5 * 0.5625 + 0.5, 0.25), rel=1e-9)
        assert inp.tail_max == pytest.approx(1 - 0.5**4, rel=1e-12)

    @given(st.integers(2, 8), st.floats(0.2, 6.0))
    def test_rhs_dominates_exact_adversarial_tail(self, n, x):
        g = GeneratorSet.of(Discrete.uniform([-1.0, 1.0]), Discrete([-2.0, 0.0, 1.0], [0.25, 0.25, 0.5]))
        rhs, _ = best_exp_inequality_rhs(g, n, x)
        assert solve_dp(g, hitting_functional(x, 0.0), n).value <= rhs


class TestBlocking:
    def test_p_must_exceed_two_and_r(self):
        with pytest.raises(ValueError, match="p > 2∨r"):
            BlockingInputs(r=1.0, p=2.0, z=1.0, sigma_bar_sq=1.0)
        with pytest.raises(ValueError, match="p > 2∨r"):
            BlockingInputs(r=3.0, p=3.0, z=1.0, sigma_bar_sq=1.0)

    def test_g3_block_term(self):
        rep = blocking_bound(BlockingInputs(r=2.0, p=3.0, z=4.0, sigma_bar_sq=1.0, K_max=6),
                             GeneratorSet.of(Normal(0, 1)))
        blk = next(b for b in rep.blocks if b["k"] == 3)
        assert blk["g3"] == pytest.approx(math.exp(-loglog(16.0)), rel=1e-12)
        assert blk["g3"] == pytest.approx(0.3606737602, rel=1e-9)

    def test_zero_variable(self):
        rep = blocking_bound(BlockingInputs(r=1.0, p=3.0, z=1.0, sigma_bar_sq=0.0, K_max=10),
                             GeneratorSet.of(Discrete.point(0.0)))
        assert rep.g1 == 0.0 and rep.g2 == 0.0

    def test_g1_against_direct_sum(self):
        g = GeneratorSet.of(Pareto(3.0, sign="symmetric"))
        rep = blocking_bound(BlockingInputs(r=1.0, p=3.0, z=50.0, sigma_bar_sq=3.0, K_max=14), g)
        n = np.arange(1, 2**15 + 1, dtype=float)
        direct = 2 * math.fsum(g.upper_abs_sf_ge(50.0 * normalizer(n) / 30))
        assert sum(b["g1"] for b in rep.blocks) == pytest.approx(direct, rel=1e-6)

    def test_decreasing_in_z(self):
        g = GeneratorSet.of(Discrete.uniform([-1.0, 1.0]))
        totals = [blocking_bound(BlockingInputs(1.0, 3.0, z, 1.0, K_max=20), g).total for z in (1e3, 1e4, 1e5)]
        assert totals[0] >= totals[1] >= totals[2]
        assert totals[2] < 1e-6

    def test_table_and_json(self):
        rep = blocking_bound(BlockingInputs(1.0, 3.0, 4.0, 1.0, K_max=3), GeneratorSet.of(Normal(0, 1)))
        assert rep.table().split("\n")[0].split() == ["k", "n_k", "g1_k", "g2_k", "g3_k"]
        assert rep.to_dict()["inputs"]


class TestBrackets:
    def test_moment_bracket(self):
        assert moment_bracket(0.0, 0.0, 0.0, 1.0, 3.0) == 0.0
        assert moment_bracket(1.0, 1.0, 1.0, 2.5, 7.0) == pytest.approx(3.0)
        assert moment_bracket(16.0, 2.0, 1.0, 1.0, 4.0) == pytest.approx(5.0)
        assert math.isinf(moment_bracket(math.inf, 1.0, 1.0, 1.0, 3.0))

    def test_bracket_rejects_small_p(self):
        with pytest.raises(ValueError):
            moment_bracket(1.0, 1.0, 1.0, 3.0, 3.0)

    def test_moment_lower_bound(self):
        assert moment_lower_bound(GeneratorSet.of(Discrete.point(1.0)), 1.0).lower == pytest.approx(1 / math.sqrt(2))
        assert moment_lower_bound(GeneratorSet.of(Discrete.uniform([-2.0, 0.0])), 2.0).lower == 0.0
        two = GeneratorSet.of(Discrete.point(2.0), Discrete.point(-3.0))
        assert moment_lower_bound(two, 2.0).upper == pytest.approx(4.5, rel=1e-10)
