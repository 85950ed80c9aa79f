"""One-dimensional laws and finite generator sets.

A :class:`GeneratorSet` is the ambiguity set whose upper envelope defines the
sub-linear expectation.  Every law exposes its distribution function in both
the right-continuous form (``P(X <= x)``) and the left-limit form
(``P(X < x)``) so interval events can be measured exactly, plus a vectorized
quantile map used for sampling.
"""

from __future__ import annotations

import ast
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import special

from . import quadrature as quad

PROB_ATOL = 1e-12


class DivergentIntegralError(ArithmeticError):
    """An expectation under one of the generators is not finite."""

    def __init__(self, message, generator=None):
        super().__init__(message)
        self.generator = generator


class Measure:
    """Base class.  Subclasses set ``kind`` and implement the cdf pair."""

    kind = "abstract"
    samplable = True

    # -- distribution function -------------------------------------------
    def cdf(self, x):
        """``P(X <= x)``, vectorized."""
        raise NotImplementedError

    def cdf_left(self, x):
        """``P(X < x)``, vectorized."""
        return self.cdf(x)

    def sf_ge(self, x):
        """``P(X >= x)``."""
        return 1.0 - self.cdf_left(x)

    def abs_sf_ge(self, x):
        """``P(|X| >= x)``; equals 1 for ``x <= 0``."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = self.sf_ge(ax) + self.cdf(-ax)
        out = np.where(x <= 0.0, 1.0, np.minimum(out, 1.0))
        return out if out.ndim else float(out)

    def abs_sf_gt(self, x):
        """``P(|X| > x)`` for ``x >= 0``."""
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = 1.0 - self.cdf(ax) + self.cdf_left(-ax)
        out = np.where(x < 0.0, 1.0, np.clip(out, 0.0, 1.0))
        return out if out.ndim else float(out)

    def ppf(self, u):
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Points where the distribution function is not smooth."""
        return ()

    # -- integration ---------------------------------------------------------
    def expect(self, phi, tol: float = 1e-8, breakpoints: Sequence[float] = ()) -> quad.QuadResult:
        raise NotImplementedError

    def truncated_abs_moment(self, p: float, y: float) -> float:
        """``E[(|X| ^ y)^p] = int_0^y p x^{p-1} P(|X| > x) dx``."""
        if y <= 0:
            return 0.0
        val, _ = quad.integrate_interval(
            lambda x: p * x ** (p - 1) * self.abs_sf_gt(x),
            0.0,
            y,
            points=[abs(b) for b in self.breakpoints],
        )
        return val

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()!r})"


class Discrete(Measure):
    kind = "discrete"

    def __init__(self, values, probs):
        values = np.asarray(values, dtype=float).ravel()
        probs = np.asarray(probs, dtype=float).ravel()
        if values.size == 0 or values.shape != probs.shape:
            raise ValueError("discrete measure needs matching, nonempty values and probs")
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(probs.sum() - 1.0) > PROB_ATOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        if not np.all(np.isfinite(values)):
            raise ValueError("support values must be finite")
        uniq, inv = np.unique(values, return_inverse=True)
        merged = np.zeros(uniq.size)
        np.add.at(merged, inv, probs)
        keep = merged > 0
        self.values = uniq[keep]
        self.probs = merged[keep]
        self._cum = np.cumsum(self.probs)
        self._cum[-1] = 1.0
        # tail sums computed separately so small upper tails keep full precision
        self._tail = np.concatenate([np.cumsum(self.probs[::-1])[::-1], [0.0]])
        self._tail[0] = 1.0

    @classmethod
    def point(cls, c: float) -> "Discrete":
        return cls([c], [1.0])

    @classmethod
    def uniform(cls, values) -> "Discrete":
        values = list(values)
        return cls(values, [1.0 / len(values)] * len(values))

    def cdf(self, x):
        idx = np.searchsorted(self.values, x, side="right")
        out = np.concatenate([[0.0], self._cum])[idx]
        return out if np.ndim(out) else float(out)

    def cdf_left(self, x):
        idx = np.searchsorted(self.values, x, side="left")
        out = np.concatenate([[0.0], self._cum])[idx]
        return out if np.ndim(out) else float(out)

    def sf_ge(self, x):
        out = self._tail[np.searchsorted(self.values, x, side="left")]
        return out if np.ndim(out) else float(out)

    def sf_gt(self, x):
        out = self._tail[np.searchsorted(self.values, x, side="right")]
        return out if np.ndim(out) else float(out)

    def abs_sf_ge(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.where(x <= 0.0, 1.0, np.minimum(self.sf_ge(ax) + self.cdf(-ax), 1.0))
        return out if out.ndim else float(out)

    def abs_sf_gt(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.where(x < 0.0, 1.0, np.minimum(self.sf_gt(ax) + self.cdf_left(-ax), 1.0))
        return out if out.ndim else float(out)

    def ppf(self, u):
        idx = np.searchsorted(self._cum, u, side="right")
        return self.values[np.minimum(idx, self.values.size - 1)]

    @property
    def breakpoints(self):
        return tuple(float(v) for v in self.values)

    def expect(self, phi, tol=1e-8, breakpoints=()):
        vals = np.array([phi(float(v)) for v in self.values], dtype=float)
        if not np.all(np.isfinite(vals)):
            raise DivergentIntegralError("test function is not finite on the support")
        return quad.QuadResult(math.fsum(vals * self.probs), 0.0)

    def truncated_abs_moment(self, p, y):
        return math.fsum(np.minimum(np.abs(self.values), y) ** p * self.probs)

    def to_dict(self):
        return {"kind": self.kind, "values": self.values.tolist(), "probs": self.probs.tolist()}


class Normal(Measure):
    kind = "normal"

    def __init__(self, mean: float = 0.0, sd: float = 1.0):
        if not sd > 0:
            raise ValueError("sd must be positive")
        self.mean = float(mean)
        self.sd = float(sd)

    def cdf(self, x):
        return special.ndtr((np.asarray(x, dtype=float) - self.mean) / self.sd)

    def sf_ge(self, x):
        return special.ndtr((self.mean - np.asarray(x, dtype=float)) / self.sd)

    def abs_sf_ge(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.where(x <= 0.0, 1.0, np.minimum(self.sf_ge(ax) + self.cdf(-ax), 1.0))
        return out if out.ndim else float(out)

    abs_sf_gt = abs_sf_ge

    def ppf(self, u):
        return self.mean + self.sd * special.ndtri(u)

    def expect(self, phi, tol=1e-8, breakpoints=()):
        m, s = self.mean, self.sd
        zbps = [(b - m) / s for b in breakpoints]
        c = 1.0 / math.sqrt(2.0 * math.pi)

        def right(z):
            return phi(m + s * z) * c * math.exp(-0.5 * z * z)

        def left(z):
            return phi(m - s * z) * c * math.exp(-0.5 * z * z)

        r = quad.integrate_halfline(right, tol=tol, t_cap=64.0, breakpoints=[b for b in zbps if b > 0])
        l = quad.integrate_halfline(left, tol=tol, t_cap=64.0, breakpoints=[-b for b in zbps if b < 0])
        return _combine(r, l)

    def to_dict(self):
        return {"kind": self.kind, "mean": self.mean, "sd": self.sd}


class _SignSplit(Measure):
    """``X = sign * |X|`` with ``P(X < 0) = neg_fraction * P(|X| > 0)``."""

    neg_fraction = 0.0

    def abs_sf(self, x):
        """``P(|X| > x)`` for ``x >= 0`` (continuous away from 0)."""
        raise NotImplementedError

    def abs_ppf(self, u):
        raise NotImplementedError

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        q = self.neg_fraction
        ax = np.abs(x)
        g = self.abs_sf(ax)
        out = np.where(x < 0, q * g, 1.0 - (1.0 - q) * g)
        return out if out.ndim else float(out)

    def cdf_left(self, x):
        x = np.asarray(x, dtype=float)
        q = self.neg_fraction
        g = self.abs_sf(np.abs(x))
        g0 = self.abs_sf(0.0)
        out = np.where(x <= 0, q * np.where(x == 0, g0, g), 1.0 - (1.0 - q) * g)
        return out if out.ndim else float(out)

    def sf_ge(self, x):
        x = np.asarray(x, dtype=float)
        q = self.neg_fraction
        g = self.abs_sf(np.abs(x))
        g0 = self.abs_sf(0.0)
        out = np.where(x > 0, (1.0 - q) * g, 1.0 - q * np.where(x == 0, g0, g))
        return out if out.ndim else float(out)

    def abs_sf_ge(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x <= 0.0, 1.0, self.abs_sf(np.abs(x)))
        return out if out.ndim else float(out)

    def abs_sf_gt(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0.0, 1.0, self.abs_sf(np.abs(x)))
        return out if out.ndim else float(out)

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        q = self.neg_fraction
        if q <= 0:
            return self.abs_ppf(u)
        if q >= 1:
            return -self.abs_ppf(u)
        neg = u < q
        inner = np.where(neg, u / q, (u - q) / (1.0 - q))
        mag = self.abs_ppf(np.clip(inner, 0.0, 1.0))
        return np.where(neg, -mag, mag)

    def expect(self, phi, tol=1e-8, breakpoints=()):
        # quantile form in s = -log2(1 - u): the tail of |X| maps to s -> inf
        q = self.neg_fraction
        atom0 = 1.0 - float(self.abs_sf(0.0))
        ln2 = math.log(2.0)
        g0 = 1.0 - atom0

        def integrand(s):
            # |X| quantile at level atom0 + g0 * (1 - 2^-s)
            w = 2.0 ** (-s)
            x = float(self.abs_ppf(atom0 + g0 * (1.0 - w)))
            return ln2 * w * g0 * ((1.0 - q) * phi(x) + q * phi(-x))

        res = quad.integrate_halfline(integrand, tol=tol, t_cap=60.0, edges=quad.unit_edges())
        head = atom0 * phi(0.0) if atom0 > 0 else 0.0
        return quad.QuadResult(res.value + head, res.abs_error, res.status)

    def truncated_abs_moment(self, p, y):
        if y <= 0:
            return 0.0
        val, _ = quad.integrate_interval(
            lambda x: p * x ** (p - 1) * float(self.abs_sf(x)), 0.0, y, points=self.breakpoints
        )
        return val


def _sign_fraction(sign) -> float:
    if sign in (1, "+", "positive", "+1"):
        return 0.0
    if sign in (-1, "-", "negative", "-1"):
        return 1.0
    if sign in ("symmetric", 0, "0"):
        return 0.5
    raise ValueError(f"sign must be +1, -1 or 'symmetric', got {sign!r}")


class Pareto(_SignSplit):
    """``P(|X| > x) = (xmin / x)^alpha`` for ``x >= xmin``."""

    kind = "pareto"

    def __init__(self, alpha: float, xmin: float = 1.0, sign=1):
        if not alpha > 0 or not xmin > 0:
            raise ValueError("alpha and xmin must be positive")
        self.alpha = float(alpha)
        self.xmin = float(xmin)
        self.sign = sign
        self.neg_fraction = _sign_fraction(sign)

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(x < self.xmin, 1.0, (self.xmin / np.maximum(x, self.xmin)) ** self.alpha)
        return out if out.ndim else float(out)

    def abs_ppf(self, u):
        u = np.asarray(u, dtype=float)
        with np.errstate(divide="ignore"):
            return self.xmin * (1.0 - u) ** (-1.0 / self.alpha)

    @property
    def breakpoints(self):
        if self.neg_fraction == 0:
            return (self.xmin,)
        if self.neg_fraction == 1:
            return (-self.xmin,)
        return (-self.xmin, self.xmin)

    def expect(self, phi, tol=1e-8, breakpoints=()):
        a, xm, q = self.alpha, self.xmin, self.neg_fraction

        def dens(x):
            return a * xm**a * x ** (-a - 1.0)

        def f(t):
            x = xm + t
            return ((1.0 - q) * phi(x) + q * phi(-x)) * dens(x)

        bps = [abs(b) - xm for b in breakpoints if abs(b) > xm]
        return quad.integrate_halfline(f, tol=tol, t_cap=2.0**40 * xm, breakpoints=bps, edges=quad.doubling_edges(0.0, xm))

    def to_dict(self):
        return {"kind": self.kind, "alpha": self.alpha, "xmin": self.xmin, "sign": self.sign}


class SurvivalDefined(_SignSplit):
    """Law given by the survival ``G(x) = P(|X| > x)`` of its modulus.

    ``neg_fraction`` is the share of the mass of ``|X| > 0`` placed on the
    negative axis.  ``G`` is assumed continuous on ``(0, inf)``; declare any
    kinks through ``breakpoints`` (on the ``|X|`` scale).
    """

    kind = "survival"

    def __init__(self, G: Callable | str, neg_fraction: float = 0.0, breakpoints=(), expr: str | None = None):
        if isinstance(G, str):
            expr, G = G, compile_expression(G)
        if not 0.0 <= neg_fraction <= 1.0:
            raise ValueError("neg_fraction must lie in [0, 1]")
        self._G = G
        self.expr = expr
        self.neg_fraction = float(neg_fraction)
        self._bps = tuple(float(b) for b in breakpoints)
        g0 = float(self._eval(np.array([0.0]))[0])
        if g0 > 1.0 + PROB_ATOL or g0 < 0.0:
            raise ValueError(f"G(0) = {g0} is not a probability")
        grid = np.concatenate([[0.0], np.geomspace(1e-6, 1e12, 400)])
        gv = self._eval(grid)
        if np.any(np.diff(gv) > 1e-12):
            raise ValueError("survival function G must be non-increasing")

    def _eval(self, x: np.ndarray) -> np.ndarray:
        try:
            out = np.asarray(self._G(x), dtype=float)
            if out.shape != x.shape:
                raise ValueError
        except (TypeError, ValueError):
            out = np.array([float(self._G(float(v))) for v in x.ravel()]).reshape(x.shape)
        return out

    def abs_sf(self, x):
        x = np.asarray(x, dtype=float)
        out = np.clip(self._eval(np.atleast_1d(x)), 0.0, 1.0).reshape(x.shape)
        return out if out.ndim else float(out)

    def abs_ppf(self, u):
        # smallest x with G(x) <= 1 - u, by bisection on a log scale
        u = np.atleast_1d(np.asarray(u, dtype=float))
        target = 1.0 - u
        hi = np.ones_like(u)
        for _ in range(2100):
            bad = self.abs_sf(hi) > target
            if not bad.any():
                break
            hi = np.where(bad, hi * 2.0, hi)
        lo = np.where(self.abs_sf(np.zeros_like(u)) <= target, 0.0, hi / 2.0)
        lo = np.where(hi == 1.0, 0.0, lo)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            above = self.abs_sf(mid) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= 1e-13 * np.maximum(hi, 1e-300)):
                break
        return hi

    @property
    def breakpoints(self):
        q = self.neg_fraction
        out = []
        if q < 1:
            out += list(self._bps)
        if q > 0:
            out += [-b for b in self._bps]
        return tuple(sorted(out))

    def to_dict(self):
        if self.expr is None:
            raise TypeError("survival-defined measure built from a callable cannot be serialized")
        return {"kind": self.kind, "G": self.expr, "neg_fraction": self.neg_fraction, "breakpoints": list(self._bps)}


class QuantileDefined(Measure):
    """Law given by a non-decreasing quantile map ``Q: (0, 1) -> R``."""

    kind = "quantile"

    def __init__(self, Q: Callable | str, breakpoints=(), expr: str | None = None):
        if isinstance(Q, str):
            expr, Q = Q, compile_expression(Q, var="u")
        self._Q = Q
        self.expr = expr
        self._bps = tuple(float(b) for b in breakpoints)
        grid = np.linspace(1e-9, 1 - 1e-9, 513)
        qv = self.ppf(grid)
        if np.any(np.diff(qv) < -1e-12):
            raise ValueError("quantile function must be non-decreasing")

    def ppf(self, u):
        u = np.asarray(u, dtype=float)
        try:
            out = np.asarray(self._Q(u), dtype=float)
            if out.shape != u.shape:
                raise ValueError
        except (TypeError, ValueError):
            out = np.array([float(self._Q(float(v))) for v in u.ravel()]).reshape(u.shape)
        return out

    def _level(self, x, strict):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        lo = np.zeros_like(x)
        hi = np.ones_like(x)
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            q = self.ppf(mid)
            below = q < x if strict else q <= x
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return lo

    def cdf(self, x):
        out = self._level(x, strict=False)
        return out if np.ndim(x) else float(out[0])

    def cdf_left(self, x):
        out = self._level(x, strict=True)
        return out if np.ndim(x) else float(out[0])

    @property
    def breakpoints(self):
        return self._bps

    def expect(self, phi, tol=1e-8, breakpoints=()):
        ln2 = math.log(2.0)

        def upper(s):
            w = 2.0 ** (-s)
            return ln2 * w * 0.5 * phi(float(self.ppf(1.0 - 0.5 * w)))

        def lower(s):
            w = 2.0 ** (-s)
            return ln2 * w * 0.5 * phi(float(self.ppf(0.5 * w)))

        r = quad.integrate_halfline(upper, tol=tol, t_cap=60.0, edges=quad.unit_edges())
        l = quad.integrate_halfline(lower, tol=tol, t_cap=60.0, edges=quad.unit_edges())
        return _combine(r, l)

    def to_dict(self):
        if self.expr is None:
            raise TypeError("quantile-defined measure built from a callable cannot be serialized")
        return {"kind": self.kind, "Q": self.expr, "breakpoints": list(self._bps)}


def _combine(a: quad.QuadResult, b: quad.QuadResult) -> quad.QuadResult:
    if quad.DIVERGING in (a.status, b.status):
        return quad.QuadResult(math.nan, math.inf, quad.DIVERGING)
    status = quad.CONVERGED if a.status == b.status == quad.CONVERGED else quad.TAIL_TRUNCATED
    return quad.QuadResult(a.value + b.value, a.abs_error + b.abs_error, status)


@dataclass(frozen=True)
class GeneratorSet:
    """Nonempty finite family of laws; its upper envelope is the sub-linear expectation."""

    measures: tuple
    label: str = ""

    def __post_init__(self):
        ms = tuple(self.measures)
        if not ms:
            raise ValueError("a generator set needs at least one measure")
        for m in ms:
            if not isinstance(m, Measure):
                raise TypeError(f"{m!r} is not a Measure")
        object.__setattr__(self, "measures", ms)

    def __len__(self):
        return len(self.measures)

    def __iter__(self):
        return iter(self.measures)

    def __getitem__(self, i):
        return self.measures[i]

    @property
    def samplable(self) -> bool:
        return all(m.samplable for m in self.measures)

    @property
    def all_discrete(self) -> bool:
        return all(isinstance(m, Discrete) for m in self.measures)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({b for m in self.measures for b in m.breakpoints}))

    @property
    def abs_breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted({abs(b) for b in self.breakpoints if b != 0}))

    def upper_sf_ge(self, t):
        """``V(X >= t)``."""
        return np.max([np.asarray(m.sf_ge(t), dtype=float) for m in self.measures], axis=0)

    def upper_abs_sf_ge(self, x):
        """``V(|X| >= x)``."""
        return np.max([np.asarray(m.abs_sf_ge(x), dtype=float) for m in self.measures], axis=0)

    def upper_abs_sf_gt(self, x):
        """``V(|X| > x)``."""
        return np.max([np.asarray(m.abs_sf_gt(x), dtype=float) for m in self.measures], axis=0)

    def upper_truncated_abs_moment(self, p: float, y: float) -> float:
        """``max_theta E_theta[(|X| ^ y)^p]``."""
        return max(m.truncated_abs_moment(p, y) for m in self.measures)

    def to_dict(self) -> dict:
        return {"label": self.label, "measures": [m.to_dict() for m in self.measures]}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def of(cls, *measures, label="") -> "GeneratorSet":
        return cls(tuple(measures), label)

    @classmethod
    def from_dict(cls, doc) -> "GeneratorSet":
        if isinstance(doc, list):
            return cls(tuple(measure_from_dict(d) for d in doc))
        if "kind" in doc:
            return cls((measure_from_dict(doc),))
        unknown = set(doc) - {"label", "measures"}
        if unknown:
            raise ValueError(f"unknown generator-set keys: {sorted(unknown)}")
        return cls(tuple(measure_from_dict(d) for d in doc["measures"]), doc.get("label", ""))

    @classmethod
    def from_json(cls, text: str) -> "GeneratorSet":
        return cls.from_dict(json.loads(text))


_MEASURE_KEYS = {
    "discrete": {"values", "probs"},
    "normal": {"mean", "sd"},
    "pareto": {"alpha", "xmin", "sign"},
    "survival": {"G", "neg_fraction", "breakpoints"},
    "quantile": {"Q", "breakpoints"},
}


def measure_from_dict(doc: dict) -> Measure:
    kind = doc.get("kind")
    if kind not in _MEASURE_KEYS:
        raise ValueError(f"unknown measure kind {kind!r}")
    params = {k: v for k, v in doc.items() if k != "kind"}
    unknown = set(params) - _MEASURE_KEYS[kind]
    if unknown:
        raise ValueError(f"unknown keys for {kind} measure: {sorted(unknown)}")
    if kind == "discrete":
        return Discrete(params["values"], params["probs"])
    if kind == "normal":
        return Normal(params.get("mean", 0.0), params.get("sd", 1.0))
    if kind == "pareto":
        return Pareto(params["alpha"], params.get("xmin", 1.0), params.get("sign", 1))
    if kind == "survival":
        return SurvivalDefined(params["G"], params.get("neg_fraction", 0.0), params.get("breakpoints", ()))
    return QuantileDefined(params["Q"], params.get("breakpoints", ()))


# -- tiny expression language for serializable callables ---------------------

_FUNCS = {
    "min": np.minimum,
    "max": np.maximum,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "where": np.where,
    "tan": np.tan,
    "pi": np.pi,
    "e": np.e,
}
_ALLOWED = (
    ast.Expression, ast.BinOp, ast.UnaryOp, ast.Call, ast.Name, ast.Load, ast.Constant,
    ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow, ast.USub, ast.UAdd, ast.Compare,
    ast.Lt, ast.LtE, ast.Gt, ast.GtE,
)


def compile_expression(text: str, var: str = "x") -> Callable:
    """Compile an arithmetic expression in one variable into a numpy callable."""
    tree = ast.parse(text, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ValueError(f"disallowed syntax in expression {text!r}: {type(node).__name__}")
        if isinstance(node, ast.Name) and node.id != var and node.id not in _FUNCS:
            raise ValueError(f"unknown name {node.id!r} in expression {text!r}")
    code = compile(tree, "<expr>", "eval")

    def fn(v):
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            return eval(code, {"__builtins__": {}}, {**_FUNCS, var: np.asarray(v, dtype=float)})

    return fn
