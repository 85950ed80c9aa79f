"""Adaptive quadrature on finite intervals and on half-lines.

Finite pieces go through QUADPACK (adaptive Gauss-Kronrod) with user
breakpoints.  Half-lines are swept segment by segment on a geometric grid;
the sweep stops when a geometric extrapolation of the remaining tail falls
under the tolerance, and reports divergence when increments refuse to shrink
past ``t_cap``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

CONVERGED = "converged"
DIVERGING = "diverging"
TAIL_TRUNCATED = "tail-truncated"

#: consecutive non-shrinking increments past ``t_cap`` that flag divergence
DIVERGENCE_RUN = 4
#: increment ratio at or above which a segment counts as "not shrinking"
STALL_RATIO = 0.9


@dataclass(frozen=True)
class QuadResult:
    value: float
    abs_error: float
    status: str = CONVERGED

    @property
    def finite(self) -> bool:
        return self.status != DIVERGING and math.isfinite(self.value)


def integrate_interval(
    f: Callable[[float], float],
    a: float,
    b: float,
    points: Iterable[float] = (),
    tol: float = 1e-10,
    abs_floor: float = 1.0,
) -> tuple[float, float]:
    """Integrate ``f`` over ``[a, b]``, splitting at ``points`` inside it."""
    if b <= a:
        return 0.0, 0.0
    cuts = sorted({p for p in points if a < p < b})
    edges = [a, *cuts, b]
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e = integrate.quad(f, lo, hi, epsabs=tol * 1e-2 * abs_floor, epsrel=tol, limit=200)
        total += val
        err += e
    return total, err


def doubling_edges(start: float = 0.0, first: float = 1.0) -> Iterable[float]:
    """Edges ``start, start+first, start+2*first, start+4*first, ...``."""
    yield start
    w = first
    while math.isfinite(start + w):
        yield start + w
        w *= 2.0


def unit_edges(start: float = 0.0) -> Iterable[float]:
    k = start
    while True:
        yield k
        k += 1.0


def integrate_halfline(
    f: Callable[[float], float],
    start: float = 0.0,
    tol: float = 1e-8,
    t_cap: float = 1e6,
    breakpoints: Sequence[float] = (),
    edges: Iterable[float] | None = None,
    max_segments: int = 1100,
    abs_floor: float = 1.0,
) -> QuadResult:
    """Integrate ``f`` over ``[start, inf)``.

    ``tol`` is scaled by ``max(abs_floor, |running total|)``; ``abs_floor = 0``
    makes the tolerance purely relative.  Convergence needs the
    geometric tail estimate plus the accumulated quadrature error under that
    threshold, and the sweep must have passed every breakpoint.  Divergence:
    ``DIVERGENCE_RUN`` consecutive segments beyond ``t_cap`` whose increment
    exceeds the threshold and is not shrinking geometrically.
    """
    it = iter(edges if edges is not None else doubling_edges(start))
    lo = next(it)
    last_bp = max([b for b in breakpoints if b > start], default=start)
    total = 0.0
    err = 0.0
    prev_inc = None
    stalled = 0
    for i, hi in enumerate(it):
        if i >= max_segments:
            break
        val, e = integrate_interval(f, lo, hi, breakpoints, tol=min(tol, 1e-10), abs_floor=abs_floor)
        total += val
        err += e
        inc = abs(val)
        thresh = tol * max(abs_floor, abs(total))
        if prev_inc is None:
            ratio = math.inf if inc > 0 else 0.0
        elif prev_inc > 0:
            ratio = inc / prev_inc
        else:
            ratio = 0.0 if inc == 0 else math.inf
        if hi >= last_bp and prev_inc is not None:
            if ratio < 1.0:
                tail = inc * ratio / (1.0 - ratio)
            elif inc == 0.0:
                tail = 0.0
            else:
                tail = math.inf
            if tail + err <= thresh:
                return QuadResult(total, tail + err, CONVERGED)
        if lo >= t_cap and inc > thresh and ratio >= STALL_RATIO:
            stalled += 1
            if stalled >= DIVERGENCE_RUN:
                return QuadResult(math.copysign(math.inf, total), math.inf, DIVERGING)
        else:
            stalled = 0
        prev_inc = inc
        lo = hi
    return QuadResult(total, math.inf, TAIL_TRUNCATED)


GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def cumulative_integral(
    f: Callable[[np.ndarray], np.ndarray],
    x: np.ndarray,
    breakpoints: Sequence[float] = (),
) -> np.ndarray:
    """``F(x_i) = int_0^{x_i} f`` for sorted nonnegative ``x``; ``f`` vectorized.

    Each gap between consecutive grid points (breakpoints merged in) gets an
    8-point Gauss-Legendre rule, so ``f`` must be smooth between breakpoints.
    """
    x = np.asarray(x, dtype=float)
    bps = np.asarray([b for b in breakpoints if 0.0 < b < x[-1]], dtype=float)
    grid = np.unique(np.concatenate([[0.0], x, bps]))
    lo, hi = grid[:-1], grid[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * GL_NODES[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    pieces = half * (vals @ GL_WEIGHTS)
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    return cum[np.searchsorted(grid, x)]
