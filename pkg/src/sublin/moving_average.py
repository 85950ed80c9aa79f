"""Moving-average processes ``X_t = sum_j beta_j Y_{t-j}`` driven by sampled innovations.

Innovations are keyed by absolute time: ``Y_t`` for ``t >= 1`` is the
``t``-th draw of one stream and ``Y_t`` for ``t <= 0`` the ``(1 - t)``-th
draw of another, so runs that share a seed share every ``Y_t`` regardless
of coefficients, cutoff or path length.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import rng as rngmod
from .functionals import functional_report, normalizer
from .measures import GeneratorSet
from .paths import ConstantPolicy, Policy

ONE_SIDED = "one-sided"
BIDIRECTIONAL = "bi-directional"


@dataclass(frozen=True)
class Coefficients:
    """``beta_j``; ``finite``/``array`` hold ``values[i] = beta_{lo + i}``."""

    kind: str
    values: tuple = ()
    lo: int = 0
    rho: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.kind in ("finite", "array"):
            if not self.values:
                raise ValueError("coefficient array is empty")
            if not all(math.isfinite(v) for v in self.values):
                raise ValueError("coefficients must be finite")
        elif self.kind == "geometric":
            if not 0 < self.rho < 1:
                raise ValueError("geometric rho must lie in (0, 1)")
        else:
            raise ValueError(f"unknown coefficient kind {self.kind!r}")

    @classmethod
    def finite(cls, mapping: dict) -> "Coefficients":
        """From ``{j: beta_j}``."""
        lo, hi = min(mapping), max(mapping)
        return cls("finite", tuple(float(mapping.get(j, 0.0)) for j in range(lo, hi + 1)), lo)

    @classmethod
    def identity(cls) -> "Coefficients":
        return cls.finite({0: 1.0})

    @classmethod
    def geometric(cls, rho: float, scale: float = 1.0) -> "Coefficients":
        """``beta_j = scale * rho^{|j|}`` for all integers ``j``."""
        return cls("geometric", rho=float(rho), scale=float(scale))

    @classmethod
    def array(cls, values: Sequence[float], lo: int = 0) -> "Coefficients":
        return cls("array", tuple(float(v) for v in values), int(lo))

    def scaled(self, lam: float) -> "Coefficients":
        if self.kind == "geometric":
            return Coefficients("geometric", rho=self.rho, scale=self.scale * lam)
        return Coefficients(self.kind, tuple(lam * v for v in self.values), self.lo)

    @property
    def J(self) -> int:
        """Largest ``|j|`` with a stored coefficient (``inf`` for geometric)."""
        if self.kind == "geometric":
            return math.inf
        return max(abs(self.lo), abs(self.lo + len(self.values) - 1))

    @property
    def B(self) -> float:
        if self.kind == "geometric":
            return abs(self.scale) * (1 + self.rho) / (1 - self.rho)
        return math.fsum(abs(v) for v in self.values)

    @property
    def beta_sum(self) -> float:
        if self.kind == "geometric":
            return self.scale * (1 + self.rho) / (1 - self.rho)
        return math.fsum(self.values)

    def tail_abs(self, m: int) -> float:
        """``sum_{|j| > m} |beta_j|``."""
        if self.kind == "geometric":
            return 2.0 * abs(self.scale) * self.rho ** (m + 1) / (1 - self.rho)
        j = np.arange(self.lo, self.lo + len(self.values))
        v = np.abs(np.asarray(self.values))
        return math.fsum(v[np.abs(j) > m])

    def window(self, m: int) -> tuple[int, np.ndarray]:
        """``(lo, beta_lo..beta_hi)`` restricted to ``|j| <= m``."""
        if self.kind == "geometric":
            j = np.arange(-m, m + 1)
            return -m, self.scale * self.rho ** np.abs(j)
        j = np.arange(self.lo, self.lo + len(self.values))
        keep = np.abs(j) <= m
        if not keep.any():
            return 0, np.zeros(1)
        return int(j[keep][0]), np.asarray(self.values)[keep]

    def to_dict(self) -> dict:
        if self.kind == "geometric":
            return {"kind": "geometric", "rho": self.rho, "scale": self.scale}
        return {"kind": self.kind, "values": list(self.values), "lo": self.lo}

    @classmethod
    def from_dict(cls, d: dict) -> "Coefficients":
        d = dict(d)
        kind = d.pop("kind")
        if kind == "identity":
            return cls.identity()
        if kind == "geometric":
            return cls.geometric(d.pop("rho"), d.pop("scale", 1.0))
        if kind == "finite" and "beta" in d:
            return cls.finite({int(k): v for k, v in d.pop("beta").items()})
        return cls(kind, tuple(d.pop("values")), int(d.pop("lo", 0)))


def tail_cutoff(coeffs: Coefficients, mean_abs_Y: float, eps: float, x: float) -> int:
    """Smallest ``m`` with ``sum_{|j|>m} |beta_j| * mean_abs_Y <= eps * x``.

    By Markov's inequality the dropped tail then exceeds ``x`` with capacity
    at most ``eps``.  Finite windows are never cut and return ``J``.
    """
    if not (eps > 0 and x > 0):
        raise ValueError("eps and x must be positive")
    if not mean_abs_Y >= 0 or math.isinf(mean_abs_Y):
        raise ValueError("mean_abs_Y must be finite and nonnegative")
    if coeffs.kind == "finite":
        return coeffs.J
    budget = eps * x
    if mean_abs_Y == 0.0 or coeffs.B * mean_abs_Y <= budget:
        return 0
    if coeffs.kind == "geometric":
        # 2|s| rho^{m+1} / (1 - rho) <= budget / mean_abs_Y
        target = budget * (1 - coeffs.rho) / (2 * abs(coeffs.scale) * mean_abs_Y)
        m = max(0, math.ceil(math.log(target) / math.log(coeffs.rho) - 1))
        while m > 0 and coeffs.tail_abs(m - 1) * mean_abs_Y <= budget:
            m -= 1
        while coeffs.tail_abs(m) * mean_abs_Y > budget:
            m += 1
        return m
    for m in range(coeffs.J + 1):
        if coeffs.tail_abs(m) * mean_abs_Y <= budget:
            return m
    return coeffs.J


@dataclass
class MAPath:
    Y: np.ndarray
    X: np.ndarray
    T: np.ndarray
    m: int
    convention: str
    seed: int | None = None

    @property
    def N(self) -> int:
        return self.X.size


def ma_from_innovations(coeffs: Coefficients, Y: np.ndarray, m: int | None = None,
                        convention: str = ONE_SIDED, Y_before: np.ndarray | None = None,
                        Y_after: np.ndarray | None = None) -> MAPath:
    """Convolve given innovations ``Y_1..Y_N``.

    ``Y_after`` holds ``Y_{N+1}, ...`` (needed for ``j < 0``).  With
    ``convention = bi-directional`` ``Y_before`` holds ``Y_0, Y_{-1}, ...``;
    one-sided runs treat those as zero.  Missing entries are zero.
    """
    if convention not in (ONE_SIDED, BIDIRECTIONAL):
        raise ValueError(f"unknown convention {convention!r}")
    Y = np.asarray(Y, dtype=float)
    N = Y.size
    if m is None:
        m = coeffs.J if coeffs.kind != "geometric" else 0
    lo, beta = coeffs.window(m)
    hi = lo + beta.size - 1
    pre = max(hi, 0)
    post = max(-lo, 0)
    before = np.zeros(pre)
    if convention == BIDIRECTIONAL and Y_before is not None and pre:
        k = min(pre, len(Y_before))
        before[pre - k:] = np.asarray(Y_before[:k], dtype=float)[::-1]
    after = np.zeros(post)
    if Y_after is not None and post:
        k = min(post, len(Y_after))
        after[:k] = Y_after[:k]
    ext = np.concatenate([before, Y, after])
    # ext[i] is Y_{1 - pre + i}, so X_t sits at index t - lo - 1 + pre of the full convolution
    full = np.convolve(ext, beta, mode="full")
    X = full[pre - lo: pre - lo + N]
    return MAPath(Y, X, np.cumsum(X), m, convention)


def innovations(gen: GeneratorSet, N: int, seed: int, before: int = 0, after: int = 0,
                policy: Policy | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(Y_1..Y_N, [Y_0, Y_-1, ...], [Y_{N+1}, ...])`` for a static policy."""
    policy = policy or ConstantPolicy(0)
    if not policy.static:
        raise ValueError("moving-average innovations need a static policy")
    policy.validate(len(gen.measures))
    fwd = rngmod.stream(seed, "ma-forward").random(N + after)
    back = rngmod.stream(seed, "ma-backward").random(before)
    tiny = np.finfo(float).tiny
    th_f = policy.static_choices(N + after)
    Yf = np.empty(N + after)
    for th in np.unique(th_f):
        sel = th_f == th
        Yf[sel] = gen.measures[int(th)].ppf(np.maximum(fwd[sel], tiny))
    Yb = gen.measures[int(policy.static_choices(1)[0])].ppf(np.maximum(back, tiny)) if before else np.zeros(0)
    return Yf[:N], Yb, Yf[N:]


def mean_abs(gen: GeneratorSet) -> float:
    """Upper ``E|Y|``."""
    return max(m.expect(np.abs, breakpoints=(0.0,)).value for m in gen.measures)


def simulate_ma(coeffs: Coefficients, gen: GeneratorSet, N: int, seed: int, m: int | None = None,
                convention: str = ONE_SIDED, policy: Policy | None = None,
                eps: float = 1e-6, x: float = 1.0) -> MAPath:
    """``X_t = sum_{|j| <= m} beta_j Y_{t-j}`` for ``t = 1..N``.

    Without an explicit ``m`` the cutoff is ``tail_cutoff(coeffs, E|Y|, eps, x)``.
    """
    if m is None:
        m = tail_cutoff(coeffs, mean_abs(gen), eps, x)
    lo, beta = coeffs.window(m)
    hi = lo + beta.size - 1
    before = max(hi, 0) if convention == BIDIRECTIONAL else 0
    Y, Yb, Ya = innovations(gen, N, seed, before, max(-lo, 0), policy)
    path = ma_from_innovations(coeffs, Y, m, convention, Yb, Ya)
    path.seed = seed
    return path


def approx_residual(path: MAPath, coeffs: Coefficients, window: tuple[int, int] | None = None) -> float:
    """``max_{n0 <= n <= n1} |T_n - beta sum_{t<=n} Y_t| / a_n``."""
    n0, n1 = window or (1, path.N)
    if not 1 <= n0 <= n1 <= path.N:
        raise ValueError("window must satisfy 1 <= n0 <= n1 <= N")
    sl = slice(n0 - 1, n1)
    resid = path.T[sl] - coeffs.beta_sum * np.cumsum(path.Y)[sl]
    return float(np.max(np.abs(resid) / normalizer(np.arange(n0, n1 + 1))))


def window_max(path: MAPath, window: tuple[int, int]) -> float:
    n0, n1 = window
    sl = slice(n0 - 1, n1)
    return float(np.max(np.abs(path.T[sl]) / normalizer(np.arange(n0, n1 + 1))))


def default_window(N: int) -> tuple[int, int]:
    return max(1, math.isqrt(N)), N


@dataclass
class LILEstimate:
    per_seed: np.ndarray
    seeds: list
    target: float
    window: tuple
    premises_ok: bool
    residuals: np.ndarray | None = None

    @property
    def median(self) -> float:
        return float(np.median(self.per_seed))

    @property
    def ratio(self) -> float:
        return self.median / self.target if self.target > 0 else math.nan

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["seed", "max_over_window", "residual", "target"])
        res = self.residuals if self.residuals is not None else [math.nan] * len(self.seeds)
        for s, v, r in zip(self.seeds, self.per_seed, res):
            w.writerow([s, repr(float(v)), repr(float(r)), repr(self.target)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "median": self.median,
            "target": self.target,
            "window": list(self.window),
            "premises_ok": self.premises_ok,
            "per_seed": self.per_seed.tolist(),
            "seeds": list(self.seeds),
        }


def innovation_target(gen: GeneratorSet, coeffs: Coefficients) -> tuple[float, bool]:
    """``|beta| sigma_bar_Y`` and whether the mean, variance and varsigma premises hold."""
    rep = functional_report(gen, r=1.0)
    ok = (abs(rep.mean_upper) <= 1e-9 and abs(rep.mean_lower) <= 1e-9
          and math.isfinite(rep.sigma_bar_sq) and rep.varsigma.finite)
    return abs(coeffs.beta_sum) * math.sqrt(rep.sigma_bar_sq), ok


def lil_estimate(coeffs: Coefficients, gen: GeneratorSet, N: int, seeds: Sequence[int],
                 window: tuple[int, int] | None = None, m: int | None = None,
                 convention: str = ONE_SIDED, policy: Policy | None = None,
                 threads: int = 1) -> LILEstimate:
    """Per-seed ``max_{n in window} |T_n| / a_n`` against ``|beta| sigma_bar_Y``."""
    window = window or default_window(N)
    target, ok = innovation_target(gen, coeffs)
    if not ok:
        warnings.warn("innovation premises fail: need zero upper and lower mean, finite variance "
                      "and finite varsigma", RuntimeWarning, stacklevel=2)
    seeds = list(seeds)

    def task(idx: range) -> np.ndarray:
        out = np.empty((len(idx), 2))
        for row, i in enumerate(idx):
            path = simulate_ma(coeffs, gen, N, seeds[i], m, convention, policy)
            out[row] = window_max(path, window), approx_residual(path, coeffs, window)
        return out

    vals = rngmod.map_chunks(task, len(seeds), threads, chunk=1)
    return LILEstimate(vals[:, 0], seeds, target, window, ok, vals[:, 1])


@dataclass
class Coverage:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])

    @property
    def frequencies(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts / total if total else self.counts.astype(float)

    def interior_visited(self, frac: float = 0.8) -> bool:
        half = self.edges[-1]
        inner = np.abs(self.centers) <= frac * half
        return bool(np.all(self.counts[inner] > 0))


def cluster_coverage(paths: Sequence[MAPath], target: float, window: tuple[int, int],
                     bins: int = 20) -> Coverage:
    """Histogram of ``T_n / a_n`` over the window, binned on ``[-target, target]``.

    A zero target collapses to one bin at 0.
    """
    n0, n1 = window
    a = normalizer(np.arange(n0, n1 + 1))
    if target == 0:
        total = sum(int(np.sum(p.T[n0 - 1:n1] / a == 0)) for p in paths)
        return Coverage(np.array([0.0, 0.0]), np.array([total]))
    edges = np.linspace(-target, target, bins + 1)
    counts = np.zeros(bins, dtype=np.int64)
    for p in paths:
        c, _ = np.histogram(p.T[n0 - 1:n1] / a, bins=edges)
        counts += c
    return Coverage(edges, counts)
