"""Right-hand sides of the exponential inequality and the dyadic blocking bound.

Everything here is plain arithmetic on quantities supplied by the caller or
computed from a :class:`GeneratorSet`.  Values above 1 are returned as is:
they bound a probability vacuously but are still the exact expression.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import quadrature as quad
from .core import CONVERGED, DIVERGING, ChoquetResult, _json_float
from .functionals import (
    choquet_abs_power, choquet_pos_power, loglog, normalizer, normalizer_inverse,
)
from .measures import GeneratorSet

#: largest argument of ``exp`` that stays finite
_EXP_MAX = math.log(np.finfo(float).max)


def _exp(x: float) -> float:
    return math.inf if x > _EXP_MAX else math.exp(x)


@dataclass(frozen=True)
class ExpIneqInputs:
    n: int
    x: float
    y: float
    p: float = 2.0
    delta: float = 1.0
    A_n: float = 0.0
    B_n: float = 0.0
    tail_max: float = 0.0

    def __post_init__(self):
        if not (self.x > 0 and self.y > 0):
            raise ValueError("x and y must be positive")
        if not self.p >= 2:
            raise ValueError("p must be at least 2")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.A_n < 0 or self.B_n < 0 or not 0 <= self.tail_max <= 1:
            raise ValueError("A_n, B_n must be nonnegative and tail_max in [0, 1]")


def exp_middle_term(inp: ExpIneqInputs) -> float:
    """``2 exp(p^p) (A_n / y^p)^(delta x / (10 y))``, evaluated in logs."""
    if inp.A_n == 0.0:
        return 0.0
    expo = inp.delta * inp.x / (10.0 * inp.y)
    log_val = math.log(2.0) + inp.p**inp.p + expo * (math.log(inp.A_n) - inp.p * math.log(inp.y))
    return _exp(log_val)


def exp_gauss_term(inp: ExpIneqInputs) -> float:
    """``exp(-x^2 / (2 B_n (1 + delta)))``; ``B_n = 0`` gives 0, ``B_n = inf`` gives 1."""
    if inp.B_n == 0.0:
        return 0.0
    return math.exp(-inp.x**2 / (2.0 * inp.B_n * (1.0 + inp.delta)))


def exp_inequality_rhs(inp: ExpIneqInputs) -> float:
    return inp.tail_max + exp_middle_term(inp) + exp_gauss_term(inp)


def exp_inequality_inputs(gen: GeneratorSet, n: int, x: float, y: float, p: float = 2.0,
                          delta: float = 1.0) -> ExpIneqInputs:
    """Fill ``A_n``, ``B_n`` and the tail term for ``n`` i.i.d. copies under ``gen``.

    ``tail_max = V(max_k X_k > y)`` is evaluated by the adversarial recursion
    ``1 - (1 - V(X > y))^n``, which is exact for Peng-independent copies.
    """
    def pos_trunc(t):
        return np.minimum(np.maximum(t, 0.0), y) ** p

    def trunc_sq(t):
        return np.minimum(t, y) ** 2

    a1 = max(m.expect(pos_trunc, breakpoints=(0.0, y)).value for m in gen.measures)
    b1 = max(m.expect(trunc_sq, breakpoints=(0.0, y)).value for m in gen.measures)
    v = float(np.max([1.0 - m.cdf(y) for m in gen.measures]))
    tail = 1.0 - (1.0 - v) ** n
    return ExpIneqInputs(n, x, y, p, delta, n * a1, n * b1, min(max(tail, 0.0), 1.0))


def best_exp_inequality_rhs(gen: GeneratorSet, n: int, x: float, p_grid=(2.0, 2.5, 3.0, 4.0),
                            y_fracs=None, delta_grid=(0.25, 0.5, 1.0)) -> tuple[float, ExpIneqInputs]:
    """Smallest right-hand side over a grid of the free parameters ``p, y, delta``."""
    if y_fracs is None:
        y_fracs = np.geomspace(1e-3, 1.0, 31)
    best = (math.inf, None)
    for p in p_grid:
        for frac in y_fracs:
            for d in delta_grid:
                inp = exp_inequality_inputs(gen, n, x, frac * x, p, d)
                val = exp_inequality_rhs(inp)
                if val < best[0]:
                    best = (val, inp)
    return best


# -- blocking decomposition ----------------------------------------------------------


@dataclass(frozen=True)
class BlockingInputs:
    r: float
    p: float
    z: float
    sigma_bar_sq: float
    K_max: int = 40

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not self.p > max(2.0, self.r):
            raise ValueError("need p > 2∨r")
        if not self.z > 0:
            raise ValueError("z must be positive")
        if self.K_max < 1:
            raise ValueError("K_max must be at least 1")


@dataclass
class BoundReport:
    g1: float
    g2: float
    g3: float
    tails: dict
    status: dict
    blocks: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict)

    @property
    def total(self) -> float:
        return self.g1 + self.g2 + self.g3

    def to_dict(self) -> dict:
        return {
            "inputs": self.inputs,
            "g1": _json_float(self.g1),
            "g2": _json_float(self.g2),
            "g3": _json_float(self.g3),
            "total": _json_float(self.total),
            "tails": {k: _json_float(v) for k, v in self.tails.items()},
            "status": dict(self.status),
            "blocks": [{k: (_json_float(v) if isinstance(v, float) else v) for k, v in b.items()}
                       for b in self.blocks],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    def table(self) -> str:
        lines = [f"{'k':>3} {'n_k':>14} {'g1_k':>12} {'g2_k':>12} {'g3_k':>12}"]
        for b in self.blocks:
            lines.append(f"{b['k']:>3} {b['n_k']:>14} {b['g1']:>12.5g} {b['g2']:>12.5g} {b['g3']:>12.5g}")
        return "\n".join(lines)


EXACT_BLOCK = 4096


def _g1_block(gen: GeneratorSet, c: float, lo: int, hi: int) -> float:
    """``sum_{n=lo}^{hi} V(|X| >= c a_n)``.

    Small blocks are summed term by term.  Larger ones use the trapezoidal
    Euler-Maclaurin form ``int + (h(lo) + h(hi)) / 2`` which, for the
    monotone summand, is off by at most ``(h(lo) - h(hi)) / 2``.
    """
    if hi - lo + 1 <= EXACT_BLOCK:
        n = np.arange(lo, hi + 1, dtype=float)
        return math.fsum(gen.upper_abs_sf_ge(c * normalizer(n)))

    def h(n):
        return float(gen.upper_abs_sf_ge(c * normalizer(n)))

    pts = [normalizer_inverse(b / c) for b in gen.abs_breakpoints if b > 0]
    val, _ = quad.integrate_interval(h, float(lo), float(hi), points=pts, tol=1e-9)
    return val + 0.5 * (h(lo) + h(hi))


def _geometric_tail(prev: float, last: float) -> float:
    if last == 0.0:
        return 0.0
    if prev <= 0.0 or last >= prev:
        return math.inf
    ratio = last / prev
    return last * ratio / (1.0 - ratio)


def _g3_tail(c: float, j0: int) -> float:
    """``sum_{j > j0} (j ln 2)^{-c}`` majorized by ``int_{j0}^inf (t ln 2)^{-c} dt``."""
    if c <= 1.0:
        return math.inf
    return _exp(-c * math.log(j0 * math.log(2.0)) + math.log(j0) - math.log(c - 1.0))


def blocking_bound(inp: BlockingInputs, gen: GeneratorSet) -> BoundReport:
    """``g1(z) + g2(z) + g3(z)`` on the dyadic blocks ``n_k = 2^k``, ``k <= K_max``.

    ``g1`` is the single-index majorant ``2 sum_n V(|X| >= z^{1/r} a_n / 30)``;
    ``g2`` uses the constant ``2 e^{p^p}`` with exponent 3; ``g3`` is the
    Gaussian block term.  Each is extended past ``K_max`` by a tail estimate.
    """
    r, p, z = inp.r, inp.p, inp.z
    zr = z ** (1.0 / r)
    c1 = zr / 30.0
    log_cp = math.log(2.0) + p**p
    c3 = z ** (2.0 / r) / (4.0 * inp.sigma_bar_sq) if inp.sigma_bar_sq > 0 else math.inf

    blocks = []
    g1_terms, g2_terms, g3_terms = [], [], []
    for k in range(inp.K_max + 1):
        n_k, n_next = 2**k, 2 ** (k + 1)
        lo = 1 if k == 0 else n_k + 1
        g1_k = 2.0 * _g1_block(gen, c1, lo, n_next)
        x = zr * normalizer(n_next)
        y = x / 30.0
        m = gen.upper_truncated_abs_moment(p, y)
        if m == 0.0:
            g2_k = 0.0
        else:
            g2_k = _exp(log_cp + 3.0 * (math.log(n_next) + math.log(m) - p * math.log(y)))
        g3_k = 0.0 if math.isinf(c3) else math.exp(-c3 * float(loglog(n_next)))
        g1_terms.append(g1_k)
        g2_terms.append(g2_k)
        g3_terms.append(g3_k)
        blocks.append({"k": k, "n_k": n_k, "g1": g1_k, "g2": g2_k, "g3": g3_k})

    tails = {
        "g1": _geometric_tail(g1_terms[-2], g1_terms[-1]),
        "g2": _geometric_tail(g2_terms[-2], g2_terms[-1]),
        "g3": 0.0 if math.isinf(c3) else _g3_tail(c3, inp.K_max + 1),
    }
    sums = {}
    status = {}
    for name, terms in (("g1", g1_terms), ("g2", g2_terms), ("g3", g3_terms)):
        s = math.fsum(terms) + tails[name]
        sums[name] = s
        status[name] = CONVERGED if math.isfinite(s) else DIVERGING
    return BoundReport(sums["g1"], sums["g2"], sums["g3"], tails, status, blocks, asdict(inp))


@dataclass
class BoundIntegral:
    value: float
    z: np.ndarray
    integrand: np.ndarray
    head: float
    cauchy: bool

    def to_dict(self) -> dict:
        return {
            "value": _json_float(self.value),
            "head": self.head,
            "cauchy": self.cauchy,
            "z": self.z.tolist(),
            "integrand": [float(v) for v in self.integrand],
        }


def integrate_blocking_bound(gen: GeneratorSet, r: float, p: float, sigma_bar_sq: float,
                             j_range=(-10, 30), K_max: int = 40, rtol: float = 1e-4) -> BoundIntegral:
    """``int_0^inf 1 ^ (g1 + g2 + g3)(z) dz`` by the trapezoid rule on ``z = 2^j``.

    The piece below the first grid point is bounded by its length.  The
    result counts as finite when the last grid interval adds less than
    ``rtol`` of the total.
    """
    js = np.arange(j_range[0], j_range[1] + 1)
    zs = 2.0 ** js
    vals = np.array([
        min(1.0, blocking_bound(BlockingInputs(r, p, float(z), sigma_bar_sq, K_max), gen).total)
        for z in zs
    ])
    pieces = 0.5 * (vals[1:] + vals[:-1]) * np.diff(zs)
    head = float(zs[0])
    total = head + math.fsum(pieces)
    cauchy = bool(pieces[-1] < rtol * total)
    return BoundIntegral(total, zs, vals, head, cauchy)


def moment_bracket(varsigma: float, eta_r: float, sigma_bar: float, r: float, p: float) -> float:
    """``eta_r + varsigma^{r/p} + sigma_bar^r``; infinite inputs give ``inf``."""
    if not r > 0 or not p > max(2.0, r):
        raise ValueError("need r > 0 and p > 2∨r")
    vals = (varsigma, eta_r, sigma_bar)
    if any(v < 0 or math.isnan(v) for v in vals):
        raise ValueError("functionals must be nonnegative")
    if any(math.isinf(v) for v in vals):
        return math.inf
    return eta_r + varsigma ** (r / p) + sigma_bar**r


@dataclass(frozen=True)
class MomentBracket:
    positive: ChoquetResult
    absolute: ChoquetResult

    @property
    def lower(self) -> float:
        return self.positive.value

    @property
    def upper(self) -> float:
        return self.absolute.value


def moment_lower_bound(gen: GeneratorSet, r: float, tol: float = 1e-8) -> MomentBracket:
    """``C_V[(X^+)^r] / a_1^r`` and ``C_V[|X|^r] / a_1^r``, the ``N = 1`` statistic bracket."""
    if not r > 0:
        raise ValueError("r must be positive")
    scale = normalizer(1) ** r
    pos = choquet_pos_power(gen, r, tol=tol)
    ab = choquet_abs_power(gen, r, tol=tol)
    return MomentBracket(
        ChoquetResult(pos.value / scale, pos.abs_error / scale, pos.status),
        ChoquetResult(ab.value / scale, ab.abs_error / scale, ab.status),
    )
