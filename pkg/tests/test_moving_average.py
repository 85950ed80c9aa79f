import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sublin.functionals import normalizer
from sublin.measures import Discrete, GeneratorSet, Normal
from sublin.moving_average import (
    BIDIRECTIONAL, ONE_SIDED, Coefficients, approx_residual, cluster_coverage, default_window, innovations,
    lil_estimate, ma_from_innovations, mean_abs, simulate_ma, tail_cutoff, window_max,
)
from sublin.paths import mean_seeking_policy

NORMAL = GeneratorSet.of(Normal(0, 1))


def direct_convolution(beta: dict, Y: dict, N: int) -> np.ndarray:
    """X_t = sum_j beta_j Y_{t-j} by explicit double loop; missing Y are zero."""
    return np.array([sum(b * Y.get(t - j, 0.0) for j, b in beta.items()) for t in range(1, N + 1)])


class TestCoefficients:
    def test_geometric_sums(self):
        c = Coefficients.geometric(0.5)
        assert c.beta_sum == pytest.approx(3.0)
        assert c.B == pytest.approx(3.0)
        assert c.tail_abs(4) == pytest.approx(2 * 0.5**5 / 0.5)

    def test_finite_window(self):
        c = Coefficients.finite({-1: 0.2, 0: 1.0, 3: -0.4})
        assert c.J == 3
        assert c.beta_sum == pytest.approx(0.8)
        assert c.B == pytest.approx(1.6)
        assert c.tail_abs(1) == pytest.approx(0.4)

    def test_round_trip(self):
        for c in (Coefficients.geometric(0.3, -2.0), Coefficients.finite({-2: 0.5, 1: 0.25}),
                  Coefficients.array([0.1, 0.2], lo=4)):
            assert Coefficients.from_dict(c.to_dict()) == c
        assert Coefficients.from_dict({"kind": "identity"}) == Coefficients.identity()

    def test_rejects_bad(self):
        with pytest.raises(ValueError):
            Coefficients.geometric(1.0)
        with pytest.raises(ValueError):
            Coefficients("finite", ())


class TestTailCutoff:
    def test_finite_window_returns_J(self):
        c = Coefficients.finite({j: 1.0 for j in range(6)})
        assert tail_cutoff(c, 1.0, 1e-6, 1.0) == 5

    def test_geometric_closed_form(self):
        assert tail_cutoff(Coefficients.geometric(0.5), 1.0, 0.01, 1.0) == 8

    def test_large_budget(self):
        assert tail_cutoff(Coefficients.geometric(0.5), 1.0, 3.0, 1.0) == 0

    @given(st.floats(0.05, 0.9), st.floats(1e-6, 1.0))
    def test_geometric_is_minimal(self, rho, budget):
        c = Coefficients.geometric(rho)
        m = tail_cutoff(c, 1.0, budget, 1.0)
        assert c.tail_abs(m) <= budget * (1 + 1e-12)
        if m > 0:
            assert c.tail_abs(m - 1) > budget


class TestConvolution:
    def test_identity(self):
        Y = np.array([1.0, -2.0, 0.5])
        p = ma_from_innovations(Coefficients.identity(), Y)
        assert np.array_equal(p.T, np.cumsum(Y))

    def test_hand_example(self):
        p = ma_from_innovations(Coefficients.finite({0: 0.5, 1: 0.5}), np.array([1.0, 2.0, 3.0]))
        assert p.X.tolist() == [0.5, 1.5, 2.5]
        assert p.T[-1] == 4.5

    def test_zero_coefficients(self):
        p = ma_from_innovations(Coefficients.finite({0: 0.0, 1: 0.0}), np.ones(5))
        assert np.all(p.T == 0)

    @given(st.dictionaries(st.integers(-3, 3), st.floats(-2, 2, allow_nan=False), min_size=1, max_size=4),
           st.integers(1, 12), st.sampled_from([ONE_SIDED, BIDIRECTIONAL]))
    def test_against_double_loop(self, beta, N, conv):
        rng = np.random.default_rng(N)
        Y = rng.normal(size=N)
        before = rng.normal(size=4)
        after = rng.normal(size=4)
        c = Coefficients.finite(beta)
        p = ma_from_innovations(c, Y, convention=conv, Y_before=before, Y_after=after)
        Yd = {t + 1: Y[t] for t in range(N)}
        Yd.update({N + 1 + i: after[i] for i in range(4)})
        if conv == BIDIRECTIONAL:
            Yd.update({-i: before[i] for i in range(4)})
        want = direct_convolution({j: b for j, b in beta.items()}, Yd, N)
        assert np.allclose(p.X, want, atol=1e-12)

    def test_geometric_simulation_matches_double_loop(self):
        c = Coefficients.geometric(0.5)
        path = simulate_ma(c, NORMAL, 40, seed=3, m=6, convention=BIDIRECTIONAL)
        lo, beta = c.window(6)
        Y, Yb, Ya = innovations(NORMAL, 40, 3, before=6, after=6)
        Yd = {t + 1: Y[t] for t in range(40)}
        Yd.update({41 + i: Ya[i] for i in range(6)})
        Yd.update({-i: Yb[i] for i in range(6)})
        want = direct_convolution({lo + i: b for i, b in enumerate(beta)}, Yd, 40)
        assert np.allclose(path.X, want, atol=1e-12)

    def test_innovations_prefix_stable(self):
        a, _, _ = innovations(NORMAL, 100, 5)
        b, _, _ = innovations(NORMAL, 300, 5)
        assert np.array_equal(a, b[:100])

    def test_dynamic_policy_rejected(self):
        g = GeneratorSet.of(Normal(0, 1), Normal(0, 2))
        with pytest.raises(ValueError):
            simulate_ma(Coefficients.identity(), g, 10, 0, policy=mean_seeking_policy(g))


class TestDiagnostics:
    def test_identity_residual_zero(self):
        p = simulate_ma(Coefficients.identity(), NORMAL, 256, seed=1)
        assert approx_residual(p, Coefficients.identity()) == 0.0

    def test_residual_hand_example(self):
        c = Coefficients.finite({0: 0.5, 1: 0.5})
        p = ma_from_innovations(c, np.array([1.0, 2.0, 3.0]))
        assert approx_residual(p, c, (3, 3)) == pytest.approx(1.5 / math.sqrt(6))

    def test_window_max(self):
        p = ma_from_innovations(Coefficients.identity(), np.array([1.0, 1.0]))
        assert window_max(p, (1, 2)) == pytest.approx(max(1 / math.sqrt(2), 2 / 2))

    def test_default_window(self):
        assert default_window(2**20) == (1024, 2**20)

    def test_zero_innovations(self):
        g = GeneratorSet.of(Discrete.point(0.0))
        est = lil_estimate(Coefficients.identity(), g, 64, [1, 2])
        assert est.target == 0 and est.median == 0
        cov = cluster_coverage([simulate_ma(Coefficients.identity(), g, 64, 1)], 0.0, (8, 64))
        assert cov.counts.tolist() == [57]

    def test_premise_warning(self):
        g = GeneratorSet.of(Normal(1.0, 1.0))
        with pytest.warns(RuntimeWarning):
            lil_estimate(Coefficients.identity(), g, 64, [1])

    def test_mean_abs(self):
        assert mean_abs(NORMAL) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-8)

    def test_thread_invariance(self):
        c = Coefficients.geometric(0.5)
        a = lil_estimate(c, NORMAL, 512, list(range(6)), threads=1)
        b = lil_estimate(c, NORMAL, 512, list(range(6)), threads=8)
        assert a.per_seed.tobytes() == b.per_seed.tobytes()

    def test_symmetric_histogram(self):
        N = 4096
        paths = [simulate_ma(Coefficients.identity(), NORMAL, N, s) for s in range(64)]
        # one point per path keeps the bin counts multinomial
        cov = cluster_coverage(paths, 1.0, (N, N), bins=10)
        left, right = int(cov.counts[:5].sum()), int(cov.counts[5:].sum())
        assert abs(left - right) <= 3 * math.sqrt(left + right)
        assert cov.frequencies.sum() == pytest.approx(1.0)

    def test_summary_csv(self):
        est = lil_estimate(Coefficients.identity(), NORMAL, 128, [4, 5])
        lines = est.summary_csv().splitlines()
        assert lines[0] == "seed,max_over_window,residual,target"
        assert len(lines) == 3
