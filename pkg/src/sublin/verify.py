"""Named verification checks with versioned sizes and tolerances.

Each check returns a :class:`CheckResult`; ``run_suite`` runs a named suite
(``quick`` or ``full``) from ``defaults.json``.  Checks are deterministic
given the master seed, and thread count never changes their numbers.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable

import numpy as np
from scipy import special, stats

from . import rng as rngmod
from .bounds import best_exp_inequality_rhs
from .core import Event, TestFunction, capacity_lower, capacity_upper, choquet_upper, upper_expectation
from .functionals import (
    choquet_abs_power, choquet_pos_power, eta, normalizer, series_excess_moment,
    series_truncated_moment,
)
from .measures import Discrete, GeneratorSet, Normal, Pareto, SurvivalDefined
from .moving_average import Coefficients, cluster_coverage, lil_estimate, simulate_ma
from .paths import (
    ConstantPolicy, CyclicPolicy, DPPolicy, MaxStatConfig, PLATEAU, GROWING, abs_partial_sum,
    brute_force_upper, exact_dp_upper, history_functional, hitting_functional, max_stat_functional,
    mc_choquet_max_moment, mean_seeking_policy, partial_sum, plateau_divergence_probe, sample_paths,
    solve_dp, static_policy_value,
)


def load_defaults() -> dict:
    return json.loads(resources.files("sublin").joinpath("defaults.json").read_text())


@dataclass
class CheckResult:
    name: str
    criterion: int
    passed: bool
    metrics: dict = field(default_factory=dict)
    runtime_s: float = 0.0
    budget_s: float | None = None
    failures: list = field(default_factory=list)

    @property
    def within_budget(self) -> bool:
        return self.budget_s is None or self.runtime_s <= self.budget_s

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        budget = f" (budget {self.budget_s:g}s)" if self.budget_s is not None else ""
        extra = f" -- {'; '.join(self.failures)}" if self.failures else ""
        return f"[{mark}] {self.criterion:>2} {self.name}: {self.runtime_s:.2f}s{budget}{extra}"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "criterion": self.criterion,
            "passed": self.passed,
            "runtime_s": self.runtime_s,
            "budget_s": self.budget_s,
            "failures": list(self.failures),
            "metrics": _jsonable(self.metrics),
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _rel_close(got: float, want: float, rtol: float) -> bool:
    return abs(got - want) <= rtol * max(abs(want), 1e-300)


# -- 1: closed-form corpus ----------------------------------------------------------------


def check_choquet_exactness(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    rtol = tol["choquet_rtol"]
    n01_n02 = GeneratorSet.of(Normal(0, 1), Normal(0, 2))
    pm1 = GeneratorSet.of(Discrete.point(1.0), Discrete.point(-1.0))
    cases = {
        "exp_survival": (choquet_upper(GeneratorSet.of(SurvivalDefined("exp(-x)"))).value, 1.0),
        "constant_2.5": (choquet_upper(GeneratorSet.of(Discrete.point(2.5))).value, 2.5),
        "constant_-1.5": (choquet_upper(GeneratorSet.of(Discrete.point(-1.5))).value, -1.5),
        "normal_pair_CV_X2": (choquet_abs_power(n01_n02, 2.0).value, 4.0),
        "normal_pair_E_X2": (upper_expectation(n01_n02, TestFunction.power(2)), 4.0),
        "normal_pair_E_neg_abs": (
            upper_expectation(n01_n02, TestFunction(lambda x: -abs(x), degree=1, coeff_bound=1.0,
                                                    breakpoints=(0.0,))),
            -math.sqrt(2 / math.pi)),
        "normal_pair_V_abs_gt_2": (capacity_upper(n01_n02, Event.abs_gt(2.0)), 2 * special.ndtr(-1.0)),
        "normal_pair_v_abs_gt_2": (capacity_lower(n01_n02, Event.abs_gt(2.0)), 2 * special.ndtr(-2.0)),
        "two_point_CV_X": (choquet_upper(pm1).value, 1.0),
        "two_point_E_X": (upper_expectation(pm1, TestFunction.identity()), 1.0),
        "two_point_eta3": (eta(GeneratorSet.of(Discrete.point(2.0), Discrete.point(-1.0)), 3.0).value, 8.0),
    }
    failures = [f"{k}: {got!r} vs {want!r}" for k, (got, want) in cases.items()
                if not _rel_close(got, want, rtol)]
    metrics = {k: {"value": got, "expected": want, "rel_err": abs(got - want) / abs(want)}
               for k, (got, want) in cases.items()}
    return CheckResult("choquet_exactness", 1, not failures, metrics, failures=failures)


# -- 2: recursion vs brute force ------------------------------------------------------------


def random_dp_instance(gen_rng: np.random.Generator, n_max=5, support_max=3, gen_max=2):
    """Random small instance: discrete generators on a shared lattice and a payoff."""
    k = int(gen_rng.integers(1, support_max + 1))
    atoms = np.sort(gen_rng.choice(np.arange(-3, 4), size=k, replace=False)).astype(float)
    g = int(gen_rng.integers(1, gen_max + 1))
    measures = []
    for _ in range(g):
        w = gen_rng.dirichlet(np.ones(k))
        w[gen_rng.random(k) < 0.2] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
        w = w / w.sum()
        measures.append(Discrete(atoms[w > 0], w[w > 0] / w[w > 0].sum()))
    n = int(gen_rng.integers(1, n_max + 1))
    kind = int(gen_rng.integers(0, 4))
    if kind == 0:
        f = max_stat_functional(float(gen_rng.choice([0.5, 1.0, 2.0, 3.0])),
                                str(gen_rng.choice(["positive", "absolute"])))
    elif kind == 1:
        f = partial_sum()
    elif kind == 2:
        f = abs_partial_sum()
    else:
        w = gen_rng.normal(size=n_max)
        f = history_functional(lambda h, w=w: math.sin(sum(wi * x for wi, x in zip(w, h))) + 0.1 * len(h))
    return GeneratorSet(tuple(measures)), f, n


def check_dp_oracle(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    gen_rng = rngmod.stream(seed, "dp-oracle")
    atol = tol["dp_atol"]
    worst = 0.0
    fails = []
    dominance = 0
    for i in range(size["instances"]):
        gen, f, n = random_dp_instance(gen_rng, size["n_max"], size["support_max"], size["gen_max"])
        dp = exact_dp_upper(gen, f, n)
        bf = brute_force_upper(gen, f, n)
        const = max(static_policy_value(gen, f, [t] * n) for t in range(len(gen.measures)))
        worst = max(worst, abs(dp - bf))
        if abs(dp - bf) > atol:
            fails.append(f"instance {i}: dp {dp!r} vs brute {bf!r}")
        if dp < const - atol:
            dominance += 1
            fails.append(f"instance {i}: dp {dp!r} below constant policy {const!r}")
    metrics = {"instances": size["instances"], "max_abs_diff": worst, "dominance_violations": dominance}
    return CheckResult("dp_oracle", 2, not fails, metrics, failures=fails[:5])


# -- 3: sub-linearity properties ----------------------------------------------------------


def _random_test_function(gen_rng: np.random.Generator) -> TestFunction:
    kind = int(gen_rng.integers(0, 5))
    a, b, c = gen_rng.normal(size=3)
    if kind == 0:
        return TestFunction(lambda x: a + b * x + c * x * x, degree=2, coeff_bound=abs(a) + abs(b) + abs(c))
    if kind == 1:
        s = float(gen_rng.normal())
        return TestFunction(lambda x: b * abs(x - s), degree=1, coeff_bound=abs(b) * (1 + abs(s)),
                            breakpoints=(s,))
    if kind == 2:
        return TestFunction(lambda x: a * math.sin(b * x), "bounded-lipschitz", bound=abs(a), lip=abs(a * b))
    if kind == 3:
        cut = abs(float(c)) + 0.1
        return TestFunction(lambda x: a * max(-cut, min(cut, x)), "bounded-lipschitz", bound=abs(a) * cut,
                            lip=abs(a), breakpoints=(-cut, cut))
    return TestFunction(lambda x: a * math.exp(-x * x), "bounded-lipschitz", bound=abs(a), lip=abs(a))


def _random_discrete_gen(gen_rng: np.random.Generator) -> GeneratorSet:
    ms = []
    for _ in range(int(gen_rng.integers(1, 4))):
        k = int(gen_rng.integers(1, 6))
        vals = np.round(gen_rng.normal(scale=2.0, size=k), 3)
        ms.append(Discrete(vals, gen_rng.dirichlet(np.ones(k))))
    return GeneratorSet(tuple(ms))


def check_sublinearity(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    gen_rng = rngmod.stream(seed, "sublinearity")
    atol = tol["property_atol"]
    counts = {"subadditivity": 0, "homogeneity": 0, "monotonicity": 0, "constants": 0, "conjugate": 0}
    for _ in range(size["triples"]):
        gen = _random_discrete_gen(gen_rng)
        phi, psi = _random_test_function(gen_rng), _random_test_function(gen_rng)
        lam = float(gen_rng.exponential(2.0))
        c = float(gen_rng.normal(scale=5.0))
        e_phi = upper_expectation(gen, phi)
        e_psi = upper_expectation(gen, psi)
        scale = max(1.0, abs(e_phi), abs(e_psi))
        if upper_expectation(gen, phi + psi) > e_phi + e_psi + atol * scale:
            counts["subadditivity"] += 1
        if abs(upper_expectation(gen, phi.scale(lam)) - lam * e_phi) > atol * max(1.0, lam) * scale:
            counts["homogeneity"] += 1
        dominating = TestFunction(lambda x: phi(x) + psi(x) ** 2, degree=4, coeff_bound=1e6)
        if e_phi > upper_expectation(gen, dominating) + atol * scale:
            counts["monotonicity"] += 1
        if abs(upper_expectation(gen, TestFunction.constant(c)) - c) > atol * max(1.0, abs(c)):
            counts["constants"] += 1
        if -upper_expectation(gen, -phi) > e_phi + atol * scale:
            counts["conjugate"] += 1
    fails = [f"{k}: {v} violations" for k, v in counts.items() if v]
    return CheckResult("sublinearity", 3, not fails, {"triples": size["triples"], "violations": counts},
                       failures=fails)


# -- 4: exponential inequality --------------------------------------------------------------

EXP_GEN = GeneratorSet.of(Discrete.uniform([-1.0, 1.0]), Discrete([-2.0, 0.0, 1.0], [0.25, 0.25, 0.5]),
                          label="bounded-pair")


def clopper_pearson_upper(k: int, n: int, level: float) -> float:
    """One-sided upper confidence bound for a binomial proportion."""
    if k >= n:
        return 1.0
    return float(stats.beta.ppf(level, k + 1, n - k))


def check_exp_inequality(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    gen = EXP_GEN
    center = max(m.expect(lambda x: x).value for m in gen.measures)
    reps = size["replications"]
    level = tol["cp_level"]
    static = [ConstantPolicy(0), ConstantPolicy(1), CyclicPolicy([0, 1])]
    rows = []
    fails = []
    for n in size["n"]:
        xs = math.sqrt(n) * np.linspace(0.25, 3.0, size["x_points"])
        n_dp = int(size["dp_policy_points"][str(n)])
        dp_idx = sorted(set(np.linspace(0, len(xs) - 1, n_dp).round().astype(int).tolist())) if n_dp else []
        functionals = {i: hitting_functional(float(xs[i]), center) for i in dp_idx}
        dps = {i: solve_dp(gen, f, n) for i, f in functionals.items()}
        exact = [dps[i].value if i in dps else solve_dp(gen, hitting_functional(float(x), center), n).value
                 for i, x in enumerate(xs)]
        def task(idx: range) -> np.ndarray:
            u = rngmod.uniforms(seed, f"exp-ineq-{n}", idx, n)
            out = np.zeros((len(static) + 1, len(xs)), dtype=np.int64)
            for p_i, pol in enumerate(static):
                paths = sample_paths(gen, pol, n, seed, idx, u=u)
                run = np.max(np.cumsum(paths - center, axis=1), axis=1)
                out[p_i] = np.sum(run[:, None] >= xs[None, :], axis=0)
            for i in dp_idx:
                paths = sample_paths(gen, DPPolicy(dps[i], functionals[i]), n, seed, idx, u=u)
                run = np.max(np.cumsum(paths - center, axis=1), axis=1)
                out[-1, i] = np.sum(run >= xs[i])
            return out[None]

        parts = rngmod.map_chunks(task, reps, threads, chunk=10_000)
        hits = parts.sum(axis=0)
        for i, x in enumerate(xs):
            rhs, inp = best_exp_inequality_rhs(gen, n, float(x))
            cand = [clopper_pearson_upper(int(hits[p, i]), reps, level) for p in range(len(static))]
            if i in dp_idx:
                cand.append(clopper_pearson_upper(int(hits[-1, i]), reps, level))
            mc_upper = max(cand)
            ok = mc_upper <= rhs and exact[i] <= rhs
            rows.append({"n": n, "x": float(x), "mc_cp_upper": mc_upper, "dp_exact": exact[i], "rhs": rhs,
                         "rhs_p": inp.p, "rhs_y": inp.y, "rhs_delta": inp.delta, "ok": ok})
            if not ok:
                fails.append(f"n={n} x={x:.3g}: tail {mc_upper:.4g} > rhs {rhs:.4g}")
    min_rhs = min(r["rhs"] for r in rows)
    return CheckResult("exp_inequality", 4, not fails, {"rows": rows, "min_rhs": min_rhs, "replications": reps},
                       failures=fails[:5])


# -- 5: truncated and excess series ------------------------------------------------------------------------


def pareto_truncated_oracle(alpha: float, p: float, a: np.ndarray) -> np.ndarray:
    """``int_0^c p x^{p-1} min(1, x^{-alpha}) dx / c^p`` at ``c = a``, in closed form."""
    if p == alpha:
        num = 1.0 + p * np.log(a)
    else:
        num = 1.0 + p / (p - alpha) * (a ** (p - alpha) - 1.0)
    return np.where(a >= 1.0, num, a**p) / a**p


def pareto_excess_oracle(alpha: float, a: np.ndarray) -> np.ndarray:
    """``int_a^inf min(1, x^{-alpha}) dx / a`` for ``a >= 1``."""
    return a ** (1.0 - alpha) / (alpha - 1.0) / a


def check_series_lemma(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    N = int(size["N"])
    rtol = tol["series_cauchy_rtol"]
    ortol = tol["series_oracle_rtol"]
    last = int(tol["series_nondecreasing_last"])
    n = np.arange(1, N + 1, dtype=float)
    a = normalizer(n)
    metrics = {}
    fails = []
    for alpha in (3.0, 2.0):
        gen = GeneratorSet.of(Pareto(alpha))
        tc = series_truncated_moment(gen, 3.0, 1.0, N)
        ec = series_excess_moment(gen, 1.0, N, with_integral_form=False)
        o_t = np.cumsum(pareto_truncated_oracle(alpha, 3.0, a))[tc.checkpoints - 1]
        o_e = np.cumsum(pareto_excess_oracle(alpha, a))[ec.checkpoints - 1]
        err_t = float(np.max(np.abs(tc.partial_sums / o_t - 1)))
        err_e = float(np.max(np.abs(ec.partial_sums / o_e - 1)))
        key = f"tail_x^-{alpha:g}"
        metrics[key] = {
            "truncated_total": tc.total, "excess_total": ec.total,
            "truncated_cauchy": tc.is_cauchy(rtol), "excess_cauchy": ec.is_cauchy(rtol),
            "truncated_last_increments": tc.increments[-last:].tolist(),
            "oracle_rel_err_truncated": err_t, "oracle_rel_err_excess": err_e,
        }
        if err_t > ortol or err_e > ortol:
            fails.append(f"{key}: oracle disagreement {max(err_t, err_e):.2e}")
        if alpha == 3.0:
            if not (tc.is_cauchy(rtol) and ec.is_cauchy(rtol)):
                fails.append(f"{key}: expected both curves Cauchy")
        else:
            if tc.is_cauchy(rtol):
                fails.append(f"{key}: truncated curve unexpectedly Cauchy")
            nd = tc.increments_nondecreasing(last)
            metrics[key]["increments_nondecreasing"] = nd
            if not nd:
                fails.append(f"{key}: increments over the last {last} checkpoints decrease")
    return CheckResult("series_lemma", 5, not fails, metrics, failures=fails)


# -- 6: plateau / growth --------------------------------------------------------------------


def check_plateau_probe(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    grid = [2**k for k in range(size["k_min"], size["k_max"] + 1)]
    kw = dict(r=1.0, mode="absolute", N_grid=grid, replications=size["replications"], seed=seed,
              threads=threads, plateau_rtol=tol["plateau_rtol"], growth=tol["growth"])
    normal = plateau_divergence_probe(GeneratorSet.of(Normal(0, 1)), **kw)
    pareto = plateau_divergence_probe(GeneratorSet.of(Pareto(1.5, sign="symmetric")), **kw)
    fails = []
    if normal.verdict != PLATEAU:
        fails.append(f"normal verdict {normal.verdict}")
    if pareto.verdict != GROWING:
        fails.append(f"pareto verdict {pareto.verdict}")
    return CheckResult("plateau_probe", 6, not fails,
                       {"normal": normal.to_dict(), "pareto_1.5": pareto.to_dict()}, failures=fails)


# -- 7: optimality bracket ------------------------------------------------------------------


def check_optimality_bracket(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    gen = EXP_GEN
    r = 3.0
    upper_mean = max(m.expect(lambda x: x).value for m in gen.measures)
    lower = choquet_pos_power(gen, r).value / normalizer(1) ** r
    cv_abs = choquet_abs_power(gen, r).value
    K = tol["max_moment_K"]
    cfg = MaxStatConfig(int(size["N"]), r, "positive", seed=seed, replications=int(size["replications"]))
    policies = [ConstantPolicy(0), ConstantPolicy(1), CyclicPolicy([0, 1]), mean_seeking_policy(gen)]
    est = mc_choquet_max_moment(gen, policies, cfg, threads)
    env = est.envelope
    dp_small = exact_dp_upper(gen, max_stat_functional(r), int(size["dp_N"]))
    fails = []
    if upper_mean > 1e-12:
        fails.append(f"upper mean {upper_mean} > 0")
    if env.mean < lower - tol["mc_se_multiple"] * env.se:
        fails.append(f"envelope {env.mean:.4g} below lower bracket {lower:.4g}")
    if env.mean > K * cv_abs:
        fails.append(f"envelope {env.mean:.4g} above {K:g} x C_V[|X|^3] = {K * cv_abs:.4g}")
    if dp_small < lower - 1e-12:
        fails.append("exact small-N value below the lower bracket")
    metrics = {"lower": lower, "C_V_abs_r": cv_abs, "K": K, "ratio_to_C_V": env.mean / cv_abs,
               "dp_exact_small_N": dp_small, "dp_N": size["dp_N"], **est.to_dict()}
    return CheckResult("optimality_bracket", 7, not fails, metrics, failures=fails)


# -- 8, 9: moving averages --------------------------------------------------------------------

MA_FINITE = Coefficients.finite({0: 0.5, 1: 0.3, 2: 0.2})


def check_ma_residual(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    N = int(size["N"])
    seeds = [seed + i for i in range(int(size["seeds"]))]
    est = lil_estimate(MA_FINITE, GeneratorSet.of(Normal(0, 1)), N, seeds, window=(int(size["n0"]), N),
                       threads=threads)
    med = float(np.median(est.residuals))
    ok = med < tol["residual_max"]
    fails = [] if ok else [f"median residual {med:.4g} >= {tol['residual_max']}"]
    return CheckResult("ma_residual", 8, ok, {"median_residual": med, "per_seed": est.residuals}, failures=fails)


def check_ma_lil_band(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    N = int(size["N"])
    window = (int(size["n0"]), N)
    seeds = [seed + i for i in range(int(size["seeds"]))]
    gen = GeneratorSet.of(Normal(0, 1))
    ident = lil_estimate(Coefficients.identity(), gen, N, seeds, window=window, threads=threads)
    geo = lil_estimate(Coefficients.geometric(0.5), gen, N, seeds, window=window, threads=threads)
    lo, hi = tol["lil_band_lo"], tol["lil_band_hi"]
    fails = []
    for name, e in (("identity", ident), ("geometric", geo)):
        if not lo * e.target <= e.median <= hi * e.target:
            fails.append(f"{name} median {e.median:.4g} outside [{lo}, {hi}] x {e.target:.4g}")
    beta = Coefficients.geometric(0.5).beta_sum
    ratio = geo.median / ident.median
    if abs(ratio - beta) > tol["lil_ratio_rtol"] * beta:
        fails.append(f"median ratio {ratio:.4g} not within {tol['lil_ratio_rtol']:.0%} of {beta:g}")
    paths = [simulate_ma(Coefficients.identity(), gen, N, s) for s in seeds[:4]]
    cov = cluster_coverage(paths, ident.target, window)
    metrics = {"identity": ident.to_dict(), "geometric": geo.to_dict(), "ratio": ratio,
               "coverage_interior_visited": cov.interior_visited(tol["coverage_frac"])}
    return CheckResult("ma_lil_band", 9, not fails, metrics, failures=fails)


# -- 10: thread-count invariance ----------------------------------------------------------


def check_determinism(size: dict, tol: dict, seed: int, threads: int) -> CheckResult:
    gen = EXP_GEN
    cfg = MaxStatConfig(int(size["N"]), 1.0, "positive", seed=seed, replications=int(size["replications"]))
    policies = [ConstantPolicy(1), mean_seeking_policy(gen)]
    seeds = [seed + i for i in range(int(size["seeds"]))]
    runs = {}
    for t in (1, 8):
        est = mc_choquet_max_moment(gen, policies, cfg, threads=t)
        ma = lil_estimate(Coefficients.geometric(0.5), GeneratorSet.of(Normal(0, 1)), int(size["ma_N"]), seeds,
                          threads=t)
        runs[t] = [e.values.tobytes() for e in est.estimates] + [ma.per_seed.tobytes(), ma.residuals.tobytes()]
    same = runs[1] == runs[8]
    return CheckResult("determinism", 10, same, {"identical": same},
                       failures=[] if same else ["1-thread and 8-thread runs differ"])


CHECKS: dict[str, tuple[Callable, float]] = {
    "choquet_exactness": (check_choquet_exactness, 1.0),
    "dp_oracle": (check_dp_oracle, 10.0),
    "sublinearity": (check_sublinearity, 5.0),
    "exp_inequality": (check_exp_inequality, 120.0),
    "series_lemma": (check_series_lemma, 30.0),
    "plateau_probe": (check_plateau_probe, 600.0),
    "optimality_bracket": (check_optimality_bracket, 300.0),
    "ma_residual": (check_ma_residual, 300.0),
    "ma_lil_band": (check_ma_lil_band, 900.0),
    "determinism": (check_determinism, None),
}


def run_check(name: str, suite: str = "quick", seed: int | None = None, threads: int = 1,
              tolerances: dict | None = None, defaults: dict | None = None) -> CheckResult:
    defaults = defaults or load_defaults()
    tol = {**defaults["tolerances"], **(tolerances or {})}
    fn, budget = CHECKS[name]
    size = defaults["suites"][suite].get(name, {})
    seed = defaults["seed"] if seed is None else seed
    t0 = time.perf_counter()
    try:
        res = fn(size, tol, seed, threads)
    except Exception as exc:  # a crashing check is a failed check, reported with its error
        res = CheckResult(name, list(CHECKS).index(name) + 1, False, {}, failures=[f"error: {exc!r}"])
    res.runtime_s = time.perf_counter() - t0
    if suite == "full":
        res.budget_s = budget
        if not res.within_budget:
            res.passed = False
            res.failures.append(f"runtime {res.runtime_s:.1f}s over budget {budget:g}s")
    return res


@dataclass
class SuiteReport:
    suite: str
    seed: int
    threads: int
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def table(self) -> str:
        return "\n".join(r.line() for r in self.results)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "threads": self.threads, "passed": self.passed,
                "checks": [r.to_dict() for r in self.results]}


def run_suite(suite: str = "quick", checks=None, seed: int | None = None, threads: int = 1,
              tolerances: dict | None = None, progress: Callable[[CheckResult], None] | None = None) -> SuiteReport:
    defaults = load_defaults()
    if suite not in defaults["suites"]:
        raise ValueError(f"unknown suite {suite!r}")
    names = list(checks) if checks else list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}")
    seed = defaults["seed"] if seed is None else seed
    results = []
    for name in names:
        res = run_check(name, suite, seed, threads, tolerances, defaults)
        results.append(res)
        if progress:
            progress(res)
    return SuiteReport(suite, seed, threads, results)
