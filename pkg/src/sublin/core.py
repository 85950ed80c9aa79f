"""Sub-linear expectation, capacity pair and Choquet integrals over a generator set."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import quadrature as quad
from .measures import DivergentIntegralError, GeneratorSet, Measure

CONVERGED = quad.CONVERGED
DIVERGING = quad.DIVERGING
TAIL_TRUNCATED = quad.TAIL_TRUNCATED


class MonotonicityError(ValueError):
    """A survival function increased somewhere on the quadrature grid."""


class TestFunction:
    """A real test function with declared regularity.

    ``kind`` is ``"bounded-lipschitz"`` (needs ``bound`` and ``lip``) or
    ``"polynomial-growth"`` (needs ``degree`` and ``coeff_bound``, meaning
    ``|phi(x)| <= coeff_bound * (1 + |x|^degree)``).
    """

    __test__ = False  # keep pytest from collecting it

    def __init__(self, fn: Callable[[float], float], kind="polynomial-growth", *, bound=None, lip=None,
                 degree=None, coeff_bound=None, breakpoints: Sequence[float] = ()):
        if kind == "bounded-lipschitz":
            if bound is None or lip is None:
                raise ValueError("bounded-lipschitz test functions need bound and lip")
        elif kind == "polynomial-growth":
            if degree is None or coeff_bound is None:
                raise ValueError("polynomial-growth test functions need degree and coeff_bound")
        else:
            raise ValueError(f"unknown test-function kind {kind!r}")
        self.fn = fn
        self.kind = kind
        self.bound = bound
        self.lip = lip
        self.degree = degree
        self.coeff_bound = coeff_bound
        self.breakpoints = tuple(float(b) for b in breakpoints)

    def __call__(self, x):
        return self.fn(x)

    def check(self, points: Iterable[float]) -> None:
        """Spot-check the declared constants; raises ``ValueError`` on violation."""
        xs = np.asarray(sorted(set(float(p) for p in points)), dtype=float)
        if xs.size == 0:
            return
        vals = np.array([self.fn(x) for x in xs], dtype=float)
        slack = 1e-9 * (1.0 + np.abs(vals))
        if self.kind == "bounded-lipschitz":
            if np.any(np.abs(vals) > self.bound + slack):
                raise ValueError("test function exceeds its declared bound")
            if xs.size > 1:
                dx = np.diff(xs)
                ok = dx > 1e-12
                slopes = np.abs(np.diff(vals))[ok] / dx[ok]
                if np.any(slopes > self.lip * (1 + 1e-9) + 1e-9):
                    raise ValueError("test function exceeds its declared Lipschitz constant")
        else:
            cap = self.coeff_bound * (1.0 + np.abs(xs) ** self.degree)
            if np.any(np.abs(vals) > cap + slack):
                raise ValueError("test function exceeds its declared polynomial growth")

    # algebra used by the property suites
    def __add__(self, other: "TestFunction") -> "TestFunction":
        f, g = self.fn, other.fn
        return _combine(lambda x: f(x) + g(x), self, other, 1.0, 1.0)

    def __neg__(self) -> "TestFunction":
        return self.scale(-1.0)

    def scale(self, lam: float) -> "TestFunction":
        f = self.fn
        a = abs(lam)
        if self.kind == "bounded-lipschitz":
            return TestFunction(lambda x: lam * f(x), self.kind, bound=a * self.bound, lip=a * self.lip,
                                breakpoints=self.breakpoints)
        return TestFunction(lambda x: lam * f(x), self.kind, degree=self.degree, coeff_bound=a * self.coeff_bound,
                            breakpoints=self.breakpoints)

    # common constructors
    @classmethod
    def identity(cls) -> "TestFunction":
        return cls(lambda x: x, degree=1, coeff_bound=1.0)

    @classmethod
    def power(cls, k: float, absolute: bool = True) -> "TestFunction":
        if absolute:
            return cls(lambda x: abs(x) ** k, degree=k, coeff_bound=1.0, breakpoints=(0.0,))
        return cls(lambda x: x**k, degree=k, coeff_bound=1.0)

    @classmethod
    def constant(cls, c: float) -> "TestFunction":
        return cls(lambda x: c, "bounded-lipschitz", bound=abs(c), lip=0.0)

    @classmethod
    def clip(cls, c: float) -> "TestFunction":
        return cls(lambda x: truncate(x, c), "bounded-lipschitz", bound=c, lip=1.0, breakpoints=(-c, c))


def _combine(fn, a: TestFunction, b: TestFunction, ca: float, cb: float) -> TestFunction:
    bps = tuple(sorted(set(a.breakpoints) | set(b.breakpoints)))
    if a.kind == b.kind == "bounded-lipschitz":
        return TestFunction(fn, "bounded-lipschitz", bound=a.bound + b.bound, lip=a.lip + b.lip, breakpoints=bps)

    def growth(t):
        if t.kind == "polynomial-growth":
            return t.degree, t.coeff_bound
        return 0, t.bound

    da, ka = growth(a)
    db, kb = growth(b)
    return TestFunction(fn, degree=max(da, db), coeff_bound=ka + kb, breakpoints=bps)


def _as_test_function(phi) -> TestFunction:
    if isinstance(phi, TestFunction):
        return phi
    raise TypeError("phi must be a TestFunction (declare its regularity)")


def _check_grid(gen: GeneratorSet, phi: TestFunction) -> np.ndarray:
    pts = set(phi.breakpoints) | set(gen.breakpoints)
    pts |= {float(v) for v in np.linspace(-10.0, 10.0, 41)}
    return np.asarray(sorted(pts))


def _expectations(gen: GeneratorSet, phi: TestFunction, tol: float) -> list[float]:
    phi = _as_test_function(phi)
    phi.check(_check_grid(gen, phi))
    out = []
    for i, m in enumerate(gen.measures):
        res = m.expect(phi.fn, tol=tol, breakpoints=phi.breakpoints)
        if res.status == DIVERGING or not math.isfinite(res.value):
            raise DivergentIntegralError(
                f"expectation under generator {i} ({m.kind}) does not converge", generator=i
            )
        out.append(res.value)
    return out


def upper_expectation(gen: GeneratorSet, phi: TestFunction, tol: float = 1e-8) -> float:
    """``E^[phi(X)] = max_theta E_theta[phi(X)]``."""
    return max(_expectations(gen, phi, tol))


def conjugate_expectation(gen: GeneratorSet, phi: TestFunction, tol: float = 1e-8) -> float:
    """``-E^[-phi(X)] = min_theta E_theta[phi(X)]``."""
    return min(_expectations(gen, phi, tol))


# -- events ---------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: float = -math.inf
    hi: float = math.inf
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi):
            raise ValueError("interval endpoints must not be NaN")
        if self.lo > self.hi:
            raise ValueError(f"interval lower end {self.lo} exceeds upper end {self.hi}")

    @property
    def empty(self) -> bool:
        return self.lo == self.hi and not (self.lo_closed and self.hi_closed)

    def prob(self, m: Measure) -> float:
        if self.empty:
            return 0.0
        upper = 1.0 if self.hi == math.inf else (m.cdf(self.hi) if self.hi_closed else m.cdf_left(self.hi))
        lower = 0.0 if self.lo == -math.inf else (m.cdf_left(self.lo) if self.lo_closed else m.cdf(self.lo))
        return float(min(1.0, max(0.0, upper - lower)))

    def contains(self, x: float) -> bool:
        left = x > self.lo or (self.lo_closed and x == self.lo)
        right = x < self.hi or (self.hi_closed and x == self.hi)
        return left and right


@dataclass(frozen=True)
class Event:
    """Finite union of intervals, kept disjoint and sorted."""

    intervals: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalize(self.intervals))

    @classmethod
    def gt(cls, t):
        return cls((Interval(t, math.inf, False, False),))

    @classmethod
    def ge(cls, t):
        return cls((Interval(t, math.inf, True, False),))

    @classmethod
    def abs_gt(cls, t):
        return cls((Interval(-math.inf, -t, False, False), Interval(t, math.inf, False, False)))

    @classmethod
    def abs_ge(cls, t):
        return cls((Interval(-math.inf, -t, False, True), Interval(t, math.inf, True, False)))

    def union(self, other: "Event") -> "Event":
        return Event(self.intervals + other.intervals)

    def complement(self) -> "Event":
        out = []
        lo, lo_closed = -math.inf, False
        for iv in self.intervals:
            out.append(Interval(lo, iv.lo, lo_closed, not iv.lo_closed))
            lo, lo_closed = iv.hi, not iv.hi_closed
        out.append(Interval(lo, math.inf, lo_closed, False))
        return Event(tuple(out))

    def prob(self, m: Measure) -> float:
        return min(1.0, sum(iv.prob(m) for iv in self.intervals))

    def contains(self, x: float) -> bool:
        return any(iv.contains(x) for iv in self.intervals)


def _normalize(intervals) -> tuple:
    ivs = sorted((iv for iv in intervals if not iv.empty), key=lambda iv: (iv.lo, not iv.lo_closed))
    merged: list[Interval] = []
    for iv in ivs:
        if merged:
            last = merged[-1]
            touches = iv.lo < last.hi or (iv.lo == last.hi and (iv.lo_closed or last.hi_closed))
            if touches:
                if iv.hi > last.hi or (iv.hi == last.hi and iv.hi_closed):
                    merged[-1] = Interval(last.lo, iv.hi, last.lo_closed, iv.hi_closed)
                continue
        merged.append(iv)
    for iv in merged:
        # infinite ends are never closed
        if iv.lo == -math.inf and iv.lo_closed or iv.hi == math.inf and iv.hi_closed:
            raise ValueError("infinite interval ends cannot be closed")
    return tuple(merged)


def capacity_upper(gen: GeneratorSet, event: Event) -> float:
    """``V(A) = max_theta P_theta(A)``."""
    return max(event.prob(m) for m in gen.measures)


def capacity_lower(gen: GeneratorSet, event: Event) -> float:
    """``v(A) = 1 - V(A^c) = min_theta P_theta(A)``."""
    return 1.0 - capacity_upper(gen, event.complement())


# -- Choquet integral -----------------------------------------------------------------


@dataclass(frozen=True)
class ChoquetResult:
    value: float
    abs_error: float
    status: str

    @property
    def finite(self) -> bool:
        return self.status != DIVERGING and math.isfinite(self.value)

    @property
    def infinite(self) -> bool:
        return not self.finite

    def to_dict(self) -> dict:
        return {"value": _json_float(self.value), "abs_error": _json_float(self.abs_error), "status": self.status}


def _json_float(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")


class _Recorder:
    """Wraps a survival function and keeps every evaluation for the monotonicity check."""

    def __init__(self, survival, flip=False):
        self.survival = survival
        self.flip = flip
        self.ts: list[float] = []
        self.vs: list[float] = []

    def __call__(self, s):
        t = -s if self.flip else s
        v = float(self.survival(t))
        if not (-1e-12 <= v <= 1.0 + 1e-12):
            raise ValueError(f"survival value {v} at t={t} is outside [0, 1]")
        self.ts.append(t)
        self.vs.append(v)
        return (1.0 - v) if self.flip else v

    def check(self, atol=1e-10):
        if not self.ts:
            return
        order = np.argsort(self.ts, kind="stable")
        v = np.asarray(self.vs)[order]
        rises = np.diff(v)
        if np.any(rises > atol):
            i = int(np.argmax(rises))
            t = np.asarray(self.ts)[order]
            raise MonotonicityError(f"survival increases by {rises[i]:.3g} between t={t[i]:g} and t={t[i + 1]:g}")


def choquet_integral(survival: Callable[[float], float], tol: float = 1e-8, t_cap: float = 1e6,
                     breakpoints: Sequence[float] = ()) -> ChoquetResult:
    """``C_V[X] = int_0^inf V(X >= t) dt + int_{-inf}^0 [V(X >= t) - 1] dt``.

    ``survival(t)`` must return ``V(X >= t)``.  Each half-line is swept on a
    doubling grid; a half-line that keeps growing past ``t_cap`` yields an
    infinite value with status ``diverging``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    pos = _Recorder(survival)
    neg = _Recorder(survival, flip=True)
    rp = quad.integrate_halfline(pos, tol=tol, t_cap=t_cap, breakpoints=[b for b in breakpoints if b > 0])
    rn = quad.integrate_halfline(neg, tol=tol, t_cap=t_cap, breakpoints=[-b for b in breakpoints if b < 0])
    # both recorders see the same function of t
    merged = _Recorder(survival)
    merged.ts = pos.ts + neg.ts
    merged.vs = pos.vs + neg.vs
    merged.check()
    if rp.status == DIVERGING and rn.status == DIVERGING:
        return ChoquetResult(math.nan, math.inf, DIVERGING)
    if rp.status == DIVERGING:
        return ChoquetResult(math.inf, math.inf, DIVERGING)
    if rn.status == DIVERGING:
        return ChoquetResult(-math.inf, math.inf, DIVERGING)
    status = CONVERGED if rp.status == rn.status == CONVERGED else TAIL_TRUNCATED
    return ChoquetResult(rp.value - rn.value, rp.abs_error + rn.abs_error, status)


def upper_survival(gen: GeneratorSet) -> Callable[[float], float]:
    """``t -> V(X >= t)`` built from the upper capacity."""
    return lambda t: float(gen.upper_sf_ge(t))


def choquet_upper(gen: GeneratorSet, tol: float = 1e-8, t_cap: float = 1e6) -> ChoquetResult:
    """``C_V[X]`` for the variable itself."""
    return choquet_integral(upper_survival(gen), tol=tol, t_cap=t_cap, breakpoints=gen.breakpoints)


def choquet_lower(gen: GeneratorSet, tol: float = 1e-8, t_cap: float = 1e6) -> ChoquetResult:
    """``C_v[X]`` using the lower capacity ``v(X >= t) = min_theta P_theta(X >= t)``."""
    def sf(t):
        return min(float(m.sf_ge(t)) for m in gen.measures)
    return choquet_integral(sf, tol=tol, t_cap=t_cap, breakpoints=gen.breakpoints)


def choquet_abs_transform(gen: GeneratorSet, g: Callable[[float], float], g_inv: Callable[[float], float],
                          tol: float = 1e-8, t_cap: float = 1e6, kinks: Sequence[float] = ()) -> ChoquetResult:
    """``C_V[g(|X|)]`` for ``g`` increasing on ``[0, inf)`` with ``g(0) = 0``.

    Uses the pushforward ``V(g(|X|) >= t) = V(|X| >= g^{-1}(t))``; ``kinks``
    are non-smooth points of ``g`` on the ``|X|`` scale.
    """
    def sf(t):
        if t <= 0:
            return 1.0
        return float(gen.upper_abs_sf_ge(g_inv(t)))

    bps = [g(b) for b in (*gen.abs_breakpoints, *kinks)]
    return choquet_integral(sf, tol=tol, t_cap=t_cap, breakpoints=bps)


# -- truncation ---------------------------------------------------------------


def truncate(x, c: float):
    """``(-c) v x ^ c``."""
    if not c > 0:
        raise ValueError("truncation level must be positive")
    if np.ndim(x):
        return np.clip(x, -c, c)
    return min(max(x, -c), c)


@dataclass(frozen=True)
class ExtendedResult:
    value: float
    converged: bool
    level: float
    history: tuple = ()


def extended_expectation(gen: GeneratorSet, phi: TestFunction | None = None,
                         c_schedule: Sequence[float] | None = None, tol: float = 1e-6) -> ExtendedResult:
    """``E~[phi(X)] = lim_c E^[(phi(X))^(c)]`` along ``c_schedule`` (default ``2^k, k=0..40``).

    Returns the first value at which two consecutive schedule points agree to
    ``tol``; ``converged`` is false if that never happens.
    """
    schedule = list(c_schedule) if c_schedule is not None else [2.0**k for k in range(41)]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("c_schedule must be increasing")
    base = phi.fn if phi is not None else (lambda x: x)
    base_bps = phi.breakpoints if phi is not None else ()
    history = []
    prev = None
    for c in schedule:
        tf = TestFunction(lambda x, c=c: truncate(base(x), c), "bounded-lipschitz", bound=c,
                          lip=math.inf, breakpoints=base_bps + _level_crossings(gen, phi, c))
        val = upper_expectation(gen, tf)
        history.append(val)
        if prev is not None and abs(val - prev) < tol:
            return ExtendedResult(val, True, c, tuple(history))
        prev = val
    return ExtendedResult(history[-1], False, schedule[-1], tuple(history))


def _level_crossings(gen, phi, c) -> tuple:
    if phi is None:
        return (-c, c)
    return ()
