"""LIL normalizer and the moment functionals that govern the max-moment.

Logarithms follow the convention ``log x = ln max(e, x)``, so ``log`` and
``loglog`` are both at least 1 everywhere and ``a_1 = sqrt(2)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from . import quadrature as quad
from .core import (
    CONVERGED, DIVERGING, TAIL_TRUNCATED, ChoquetResult, TestFunction, _json_float,
    choquet_abs_transform, choquet_integral, conjugate_expectation, upper_expectation,
)
from .measures import DivergentIntegralError, GeneratorSet


def log_(x):
    """``ln max(e, x)``."""
    return np.log(np.maximum(math.e, x))


def loglog(x):
    return log_(log_(x))


def normalizer(n):
    """``a_n = sqrt(2 n loglog n)``; accepts scalars or arrays (``n`` may be real)."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 1):
        raise ValueError("normalizer needs n >= 1")
    out = np.sqrt(2.0 * n * loglog(n))
    return out if out.ndim else float(out)


def normalizer_inverse(u: float) -> float:
    """Real ``n`` with ``a_n = u``; values below 1 mean every ``a_n`` exceeds ``u``."""
    h = 0.5 * u * u
    if h <= E_E:
        return h
    return _fixed_point(lambda n: h / math.log(math.log(n)), h)


# -- monotone transforms of |X| and their inverses ------------------------------------


def _loglog1(x: float) -> float:
    return math.log(max(math.e, math.log(max(math.e, x))))


def _log1(x: float) -> float:
    return math.log(max(math.e, x))


def _sq_over_loglog(x: float) -> float:
    return x * x / _loglog1(x)


def _sq_log_over_loglog(x: float) -> float:
    return x * x * _log1(x) / _loglog1(x)


E_E = math.exp(math.e)


def _fixed_point(step, x0: float) -> float:
    x = x0
    for _ in range(200):
        nxt = step(x)
        if abs(nxt - x) <= 1e-15 * nxt:
            return nxt
        x = nxt
    return x


@lru_cache(maxsize=1 << 16)
def _inv_sq_over_loglog(t: float) -> float:
    """Inverse of ``x^2 / loglog x`` on ``[0, inf)``."""
    if t <= 0:
        return 0.0
    if t <= E_E**2:
        return math.sqrt(t)
    return _fixed_point(lambda x: math.sqrt(t * _loglog1(x)), math.sqrt(t))


@lru_cache(maxsize=1 << 16)
def _inv_sq_log_over_loglog(t: float) -> float:
    """Inverse of ``x^2 log x / loglog x`` on ``[0, inf)``."""
    if t <= 0:
        return 0.0
    if t <= math.e**2:
        return math.sqrt(t)
    if t <= E_E**2 * math.e:
        # x^2 ln x = t on (e, e^e]: Newton from above converges monotonically
        x = math.sqrt(t)
        for _ in range(100):
            nxt = x - (x * x * math.log(x) - t) / (2 * x * math.log(x) + x)
            if abs(nxt - x) <= 1e-15 * nxt:
                return nxt
            x = nxt
        return x
    return _fixed_point(lambda x: math.sqrt(t * _loglog1(x) / _log1(x)), math.sqrt(t))


#: kinks of the logarithm convention, on the |X| scale
CONVENTION_KINKS = (math.e, E_E)


def varsigma(gen: GeneratorSet, tol: float = 1e-8, t_cap: float = 1e6) -> ChoquetResult:
    """``C_V[X^2 / loglog|X|]``."""
    return choquet_abs_transform(gen, _sq_over_loglog, _inv_sq_over_loglog, tol=tol, t_cap=t_cap,
                                 kinks=CONVENTION_KINKS)


def eta(gen: GeneratorSet, r: float, tol: float = 1e-8, t_cap: float = 1e6) -> ChoquetResult:
    """The r-dependent functional: varsigma for r < 2, the log-corrected second
    moment at r = 2 and ``C_V[|X|^r]`` beyond."""
    if not r > 0:
        raise ValueError("r must be positive")
    if r < 2:
        return varsigma(gen, tol=tol, t_cap=t_cap)
    if r == 2:
        return choquet_abs_transform(gen, _sq_log_over_loglog, _inv_sq_log_over_loglog, tol=tol, t_cap=t_cap,
                                     kinks=CONVENTION_KINKS)
    return choquet_abs_transform(gen, lambda x: x**r, lambda t: t ** (1.0 / r), tol=tol, t_cap=t_cap)


def choquet_abs_power(gen: GeneratorSet, r: float, tol: float = 1e-8, t_cap: float = 1e6) -> ChoquetResult:
    """``C_V[|X|^r]``."""
    return choquet_abs_transform(gen, lambda x: x**r, lambda t: t ** (1.0 / r), tol=tol, t_cap=t_cap)


def choquet_pos_power(gen: GeneratorSet, r: float, tol: float = 1e-8, t_cap: float = 1e6) -> ChoquetResult:
    """``C_V[(X^+)^r]``."""
    def sf(t):
        if t <= 0:
            return 1.0
        return float(gen.upper_sf_ge(t ** (1.0 / r)))
    bps = [b**r for b in gen.breakpoints if b > 0]
    return choquet_integral(sf, tol=tol, t_cap=t_cap, breakpoints=bps)


def _upper_moment(gen: GeneratorSet, k: int, upper=True) -> tuple[float, float]:
    """Upper (or lower) ``E[X^k]`` with divergence mapped to ``inf``."""
    tf = TestFunction.power(k, absolute=False) if k != 2 else TestFunction(lambda x: x * x, degree=2, coeff_bound=1.0)
    try:
        if upper:
            return upper_expectation(gen, tf), 0.0
        return conjugate_expectation(gen, tf), 0.0
    except DivergentIntegralError:
        return math.inf, math.inf


@dataclass
class FunctionalReport:
    r: float
    sigma_bar_sq: float
    varsigma: ChoquetResult
    eta: ChoquetResult
    mean_upper: float
    mean_lower: float
    sigma_bar_sq_error: float = 0.0

    @property
    def sigma_bar(self) -> float:
        return math.sqrt(self.sigma_bar_sq)

    def consistent(self) -> bool:
        """For ``r >= 2`` a finite eta must come with finite varsigma and sigma_bar."""
        if self.r >= 2 and self.eta.finite:
            return self.varsigma.finite and math.isfinite(self.sigma_bar_sq)
        return True

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "sigma_bar_sq": _json_float(self.sigma_bar_sq),
            "sigma_bar_sq_error": _json_float(self.sigma_bar_sq_error),
            "varsigma": self.varsigma.to_dict(),
            "eta": self.eta.to_dict(),
            "mean_upper": _json_float(self.mean_upper),
            "mean_lower": _json_float(self.mean_lower),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def functional_report(gen: GeneratorSet, r: float = 1.0, tol: float = 1e-8) -> FunctionalReport:
    """sigma_bar^2, varsigma, eta_r and the upper/lower means of one generator set.

    For finitely many countably additive generators the truncation limits
    ``E~[X^2]`` and ``E~[X]`` equal the envelope of the untruncated moments,
    which is what gets computed here.
    """
    s2, s2err = _upper_moment(gen, 2)
    m_up, _ = _upper_moment(gen, 1)
    m_lo, _ = _upper_moment(gen, 1, upper=False)
    return FunctionalReport(r, s2, varsigma(gen, tol=tol), eta(gen, r, tol=tol), m_up, m_lo, s2err)


# -- truncated and excess series -----------------------------------------------------


def default_checkpoints(N: int) -> list[int]:
    ks = [2**k for k in range(0, 64) if 2**k <= N]
    if ks[-1] != N:
        ks.append(N)
    return ks


@dataclass
class SeriesCurve:
    name: str
    checkpoints: np.ndarray
    partial_sums: np.ndarray
    terms_at_checkpoints: np.ndarray
    params: dict = field(default_factory=dict)
    integral_form: float | None = None

    @property
    def total(self) -> float:
        return float(self.partial_sums[-1])

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.partial_sums)

    @property
    def finite(self) -> bool:
        return bool(np.all(np.isfinite(self.partial_sums)))

    def is_cauchy(self, rtol: float = 1e-3) -> bool:
        """Last checkpoint increment below ``rtol`` times the total."""
        if not self.finite:
            return False
        if self.total == 0.0:
            return True
        return bool(self.increments[-1] < rtol * self.total)

    def increments_nondecreasing(self, last: int = 4) -> bool:
        inc = self.increments[-last:]
        return bool(np.all(np.diff(inc) >= 0))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "n": self.checkpoints.tolist(),
            "term": [_json_float(float(v)) for v in self.terms_at_checkpoints],
            "partial_sum": [_json_float(float(v)) for v in self.partial_sums],
            "cauchy": self.is_cauchy(),
            "integral_form": None if self.integral_form is None else _json_float(self.integral_form),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "term", "partial_sum"])
        for n, t, s in zip(self.checkpoints, self.terms_at_checkpoints, self.partial_sums):
            w.writerow([int(n), repr(float(t)), repr(float(s))])
        return buf.getvalue()


def _curve(name, terms: np.ndarray, checkpoints, params) -> SeriesCurve:
    cps = np.asarray(checkpoints, dtype=np.int64)
    # fixed-order accumulation keeps partial sums bit-stable
    cum = np.cumsum(terms)
    return SeriesCurve(name, cps, cum[cps - 1], terms[cps - 1], params)


def series_truncated_moment(gen: GeneratorSet, p: float, delta: float = 1.0, N: int = 2**20,
                            checkpoints: Sequence[int] | None = None) -> SeriesCurve:
    """Partial sums of ``sum_n C_V[(|X| ^ delta a_n)^p] / a_n^p``.

    ``C_V[(|X| ^ c)^p] = int_0^c p x^{p-1} V(|X| >= x) dx`` is accumulated on
    the grid of all ``delta a_n`` at once.
    """
    if not p > 2:
        raise ValueError("p must exceed 2")
    if not delta > 0:
        raise ValueError("delta must be positive")
    n = np.arange(1, N + 1, dtype=float)
    a = normalizer(n)
    caps = delta * a

    def integrand(x):
        return p * x ** (p - 1.0) * gen.upper_abs_sf_ge(x)

    H = quad.cumulative_integral(integrand, caps, breakpoints=gen.abs_breakpoints)
    terms = H / a**p
    cps = checkpoints if checkpoints is not None else default_checkpoints(N)
    return _curve("truncated_moment", terms, cps, {"p": p, "delta": delta, "N": N})


def _excess_term(gen: GeneratorSet, r: float, a: float, tol: float) -> float:
    """``C_V[((|X| - a)^+)^r] / a^r = int_0^inf r w^{r-1} V(|X| >= a (1 + w)) dw``."""
    bps = [b / a - 1.0 for b in gen.abs_breakpoints if b > a]

    def f(w):
        return r * w ** (r - 1.0) * float(gen.upper_abs_sf_ge(a * (1.0 + w)))

    res = quad.integrate_halfline(f, tol=tol, t_cap=2.0**40, breakpoints=bps, abs_floor=0.0)
    if res.status == DIVERGING:
        return math.inf
    return res.value


def series_excess_moment(gen: GeneratorSet, r: float, N: int = 2**20, checkpoints: Sequence[int] | None = None,
                         exact_upto: int = 512, per_octave: int = 16, tol: float = 1e-10,
                         with_integral_form: bool = True) -> SeriesCurve:
    """Partial sums of ``sum_n C_V[((|X| - a_n)^+)^r] / a_n^r``.

    Terms up to ``exact_upto`` are integrated one by one; beyond that they are
    integrated on a log-spaced grid (``per_octave`` points per doubling of n)
    and interpolated in ``log n`` (on the log scale when all are positive).
    """
    if not r > 0:
        raise ValueError("r must be positive")
    n_exact = np.arange(1, min(N, exact_upto) + 1)
    terms = np.empty(N)
    for i in n_exact:
        terms[i - 1] = _excess_term(gen, r, normalizer(float(i)), tol)
    if N > exact_upto:
        octaves = math.log2(N / exact_upto)
        grid = np.unique(np.concatenate([
            np.geomspace(exact_upto, N, int(math.ceil(octaves * per_octave)) + 1), [float(N)]
        ]))
        gvals = np.array([_excess_term(gen, r, normalizer(g), tol) for g in grid])
        rest = np.arange(exact_upto + 1, N + 1, dtype=float)
        if np.all(np.isfinite(gvals)) and np.all(gvals > 0):
            # terms decay like powers of n, so log-log interpolation is nearly exact
            terms[exact_upto:] = np.exp(np.interp(np.log(rest), np.log(grid), np.log(gvals)))
        elif np.all(np.isfinite(gvals)):
            terms[exact_upto:] = np.interp(np.log(rest), np.log(grid), gvals)
        else:
            terms[exact_upto:] = math.inf
    cps = checkpoints if checkpoints is not None else default_checkpoints(N)
    curve = _curve("excess_moment", terms, cps, {"r": r, "N": N})
    if with_integral_form:
        curve.integral_form = excess_integral_form(gen, r, N)
    return curve


def excess_integral_form(gen: GeneratorSet, r: float, N: float, tol: float = 1e-8) -> float:
    """``int_16^N a_y^{-r} int_{a_y}^inf r u^{r-1} V(|X| > u) du dy``."""
    if N <= 16:
        return 0.0

    def inner(a):
        bps = [b for b in gen.abs_breakpoints if b > a]
        res = quad.integrate_halfline(
            lambda u: r * (a + u) ** (r - 1.0) * float(gen.upper_abs_sf_gt(a + u)),
            tol=tol, t_cap=2.0**40, breakpoints=[b - a for b in bps], abs_floor=0.0,
        )
        return math.inf if res.status == DIVERGING else res.value

    a16 = normalizer(16.0)
    if math.isinf(inner(a16)):
        return math.inf

    # substitute y = e^s
    def outer(s):
        y = math.exp(s)
        a = normalizer(y)
        return y * inner(a) / a**r

    val, _ = quad.integrate_interval(outer, math.log(16.0), math.log(N), tol=1e-8)
    return val


# -- Markov-type bound ------------------------------------------------------------


def markov_choquet_bound(C0: float, p: float, r: float) -> float:
    """``r / (p - r) * C0^{r/p}``, the shorter closed-form constant."""
    if not (C0 > 0 and p > 0 and 0 < r < p):
        raise ValueError("need C0 > 0 and 0 < r < p")
    return r / (p - r) * C0 ** (r / p)


def markov_integral(C0: float, p: float, r: float) -> float:
    """``int_0^inf 1 ^ (C0 x^{-p/r}) dx``, evaluated numerically.

    Closed form is ``p / (p - r) * C0^{r/p}`` (split at ``x = C0^{r/p}``).
    """
    if not (C0 > 0 and p > 0 and 0 < r < p):
        raise ValueError("need C0 > 0 and 0 < r < p")
    x0 = C0 ** (r / p)
    k = p / r
    res = quad.integrate_halfline(lambda t: min(1.0, C0 * (x0 + t) ** (-k)), tol=1e-10, t_cap=2.0**60)
    if res.status == DIVERGING:
        return math.inf
    return x0 + res.value


@dataclass(frozen=True)
class MarkovCheck:
    premise_holds: bool
    C0_observed: float
    choquet_moment: float
    short_bound: float
    integral_bound: float

    @property
    def holds(self) -> bool:
        return (not self.premise_holds) or self.choquet_moment <= self.integral_bound * (1 + 1e-6)


def check_markov(gen: GeneratorSet, C0: float, p: float, r: float,
                 grid: Sequence[float] | None = None) -> MarkovCheck:
    """Verify ``x^p V(|X| >= x) <= C0`` on a grid and compare ``C_V[|X|^r]`` with
    the tail integral."""
    xs = np.geomspace(1e-6, 1e12, 2000) if grid is None else np.asarray(grid, dtype=float)
    observed = float(np.max(xs**p * gen.upper_abs_sf_ge(xs)))
    moment = choquet_abs_power(gen, r).value
    return MarkovCheck(observed <= C0 * (1 + 1e-9), observed, moment,
                       markov_choquet_bound(C0, p, r), markov_integral(C0, p, r))
