"""Sequentially independent sequences: exact adversarial recursion and policy Monte Carlo.

Under sequential (Peng) independence the upper expectation of a path
payoff is a backward recursion in which an adversary picks a generator at
every step knowing the past.  For discrete generators :func:`solve_dp`
evaluates that recursion on the reachable state graph of a
:class:`PathFunctional`.  For long paths a :class:`Policy` fixes one adapted
selection rule, which turns the sequence into an ordinary random walk that
can be sampled; the best of several policies is a lower estimate of the
upper expectation.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import rng as rngmod
from .functionals import normalizer
from .measures import GeneratorSet

POSITIVE = "positive"
ABSOLUTE = "absolute"
MODES = (POSITIVE, ABSOLUTE)


class StateExplosionError(RuntimeError):
    pass


# -- path functionals -----------------------------------------------------------------


@dataclass(frozen=True)
class PathFunctional:
    """Deterministic automaton over path values.

    ``transition(state, k, x)`` consumes the ``k``-th value (``k`` starts at 1).
    States are tuples of floats.  ``vtransition`` is the same map on a
    ``(reps, dim)`` array and is needed only by policies that read the state.
    """

    initial: tuple
    transition: Callable[[tuple, int, float], tuple]
    payoff: Callable[[tuple], float]
    bounded: bool = False
    label: str = ""
    vtransition: Callable[[np.ndarray, int, np.ndarray], np.ndarray] | None = None

    def with_payoff(self, payoff: Callable[[tuple], float], label: str = "") -> "PathFunctional":
        return PathFunctional(self.initial, self.transition, payoff, self.bounded, label or self.label,
                              self.vtransition)

    def evaluate(self, path: Sequence[float]) -> float:
        s = self.initial
        for k, x in enumerate(path, start=1):
            s = self.transition(s, k, float(x))
        return float(self.payoff(s))


def partial_sum() -> PathFunctional:
    return PathFunctional(
        (0.0,), lambda s, k, x: (s[0] + x,), lambda s: s[0], label="S_n",
        vtransition=lambda s, k, x: s + x[:, None],
    )


def abs_partial_sum() -> PathFunctional:
    return partial_sum().with_payoff(lambda s: abs(s[0]), "|S_n|")


def _stat(s: float, mode: str) -> float:
    return max(s, 0.0) if mode == POSITIVE else abs(s)


def max_stat_functional(r: float = 1.0, mode: str = POSITIVE) -> PathFunctional:
    """Payoff ``max_{n <= N} (S_n^+ / a_n)^r`` (or with ``|S_n|``)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")

    def trans(s, k, x):
        t = s[0] + x
        return (t, max(s[1], (_stat(t, mode) / normalizer(k)) ** r))

    def vtrans(s, k, x):
        t = s[:, 0] + x
        v = np.maximum(t, 0.0) if mode == POSITIVE else np.abs(t)
        return np.column_stack([t, np.maximum(s[:, 1], (v / normalizer(k)) ** r)])

    return PathFunctional((0.0, 0.0), trans, lambda s: s[1], label=f"max_stat(r={r},{mode})",
                          vtransition=vtrans)


def hitting_functional(level: float, center: float = 0.0) -> PathFunctional:
    """Indicator of ``max_k sum_{i<=k} (X_i - center) >= level``."""

    def trans(s, k, x):
        t = s[0] + (x - center)
        return (t, 1.0 if (s[1] or t >= level) else 0.0)

    def vtrans(s, k, x):
        t = s[:, 0] + (x - center)
        return np.column_stack([t, np.where((s[:, 1] > 0) | (t >= level), 1.0, 0.0)])

    return PathFunctional((0.0, 0.0), trans, lambda s: s[1], bounded=True,
                          label=f"hit({level})", vtransition=vtrans)


def history_functional(fn: Callable[[tuple], float], label: str = "") -> PathFunctional:
    """State is the whole history; ``fn`` receives the tuple of values."""
    return PathFunctional((), lambda s, k, x: s + (x,), fn, label=label or "history")


# -- exact recursion --------------------------------------------------------------------


def _discrete_table(gen: GeneratorSet) -> tuple[np.ndarray, np.ndarray]:
    """Union support and a ``(generators, atoms)`` probability matrix."""
    if not gen.all_discrete:
        raise TypeError("exact recursion needs discrete generators")
    atoms = np.unique(np.concatenate([m.values for m in gen.measures]))
    P = np.zeros((len(gen.measures), atoms.size))
    for i, m in enumerate(gen.measures):
        P[i, np.searchsorted(atoms, m.values)] = m.probs
    return atoms, P


@dataclass
class DPResult:
    value: float
    n: int
    choices: list = field(repr=False, default_factory=list)
    n_states: int = 0

    def choice(self, k: int, state: tuple) -> int:
        return self.choices[k - 1][state]


def solve_dp(gen: GeneratorSet, f: PathFunctional, n: int, cap: int = 10**6) -> DPResult:
    """``v_n = payoff``; ``v_{k-1}(s) = max_theta sum_x p_theta(x) v_k(T(s, k, x))``.

    Ties go to the lowest generator index.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    atoms, P = _discrete_table(gen)
    xs = [float(a) for a in atoms]
    layers = [[f.initial]]
    kids = []
    total = 1
    for k in range(1, n + 1):
        seen = {}
        layer_kids = []
        for s in layers[-1]:
            row = tuple(f.transition(s, k, x) for x in xs)
            layer_kids.append(row)
            for c in row:
                seen.setdefault(c, None)
        total += len(seen)
        if total > cap:
            raise StateExplosionError(f"more than {cap} reachable states by step {k}")
        kids.append(layer_kids)
        layers.append(list(seen))

    values = {s: float(f.payoff(s)) for s in layers[-1]}
    choices = [None] * n
    for k in range(n, 0, -1):
        new = {}
        pick = {}
        for s, row in zip(layers[k - 1], kids[k - 1]):
            ev = P @ np.array([values[c] for c in row])
            j = int(np.argmax(ev))
            new[s] = float(ev[j])
            pick[s] = j
        values = new
        choices[k - 1] = pick
    return DPResult(values[f.initial], n, choices, total)


def exact_dp_upper(gen: GeneratorSet, f: PathFunctional, n: int, cap: int = 10**6) -> float:
    return solve_dp(gen, f, n, cap).value


def exact_dp_lower(gen: GeneratorSet, f: PathFunctional, n: int, cap: int = 10**6) -> float:
    """Conjugate value ``-E[-f]``."""
    neg = f.with_payoff(lambda s: -f.payoff(s))
    return -solve_dp(gen, neg, n, cap).value


BRUTE_MAX_N = 8
BRUTE_MAX_SUPPORT = 4
BRUTE_MAX_GEN = 3


def _brute_guard(gen: GeneratorSet, n: int) -> tuple[np.ndarray, np.ndarray]:
    atoms, P = _discrete_table(gen)
    if n > BRUTE_MAX_N or atoms.size > BRUTE_MAX_SUPPORT or len(gen.measures) > BRUTE_MAX_GEN:
        raise ValueError(
            f"brute force limited to n <= {BRUTE_MAX_N}, support <= {BRUTE_MAX_SUPPORT}, "
            f"generators <= {BRUTE_MAX_GEN}")
    return atoms, P


def brute_force_upper(gen: GeneratorSet, f: PathFunctional, n: int) -> float:
    """Sup over all adapted selection maps by recursion on the full history tree.

    No states are merged: every history is its own node, so the selection at
    a node may depend on the entire past.  The sup over maps factorizes into
    a max at every node.
    """
    atoms, P = _brute_guard(gen, n)
    xs = [float(a) for a in atoms]

    def node(history: tuple) -> float:
        if len(history) == n:
            return f.evaluate(history)
        vals = [node(history + (x,)) for x in xs]
        return max(math.fsum(p * v for p, v in zip(row, vals)) for row in P)

    return node(())


def enumerate_policies_upper(gen: GeneratorSet, f: PathFunctional, n: int, max_maps: int = 200_000) -> float:
    """Literal max over every selection map ``history -> generator``.

    Exponential in the tree size; only for tiny instances.
    """
    atoms, P = _brute_guard(gen, n)
    xs = [float(a) for a in atoms]
    nodes = [h for k in range(n) for h in itertools.product(range(len(xs)), repeat=k)]
    g = len(gen.measures)
    if g ** len(nodes) > max_maps:
        raise ValueError("too many selection maps to enumerate")
    index = {h: i for i, h in enumerate(nodes)}
    paths = list(itertools.product(range(len(xs)), repeat=n))
    payoffs = [f.evaluate([xs[i] for i in path]) for path in paths]
    best = -math.inf
    for sel in itertools.product(range(g), repeat=len(nodes)):
        total = []
        for path, pay in zip(paths, payoffs):
            w = 1.0
            for k in range(n):
                w *= P[sel[index[path[:k]]], path[k]]
                if w == 0.0:
                    break
            total.append(w * pay)
        best = max(best, math.fsum(total))
    return best


def static_policy_value(gen: GeneratorSet, f: PathFunctional, thetas: Sequence[int]) -> float:
    """Classical expectation when step ``k`` uses generator ``thetas[k-1]``."""
    atoms, P = _discrete_table(gen)
    xs = [float(a) for a in atoms]
    dist = {f.initial: 1.0}
    for k, th in enumerate(thetas, start=1):
        nxt = {}
        for s, w in dist.items():
            for x, p in zip(xs, P[th]):
                if p > 0:
                    c = f.transition(s, k, x)
                    nxt[c] = nxt.get(c, 0.0) + w * p
        dist = nxt
    return math.fsum(w * f.payoff(s) for s, w in dist.items())


# -- policies and scale sequences ---------------------------------------------------------


class Policy:
    """Adapted generator selection, vectorized over replications."""

    label = "policy"
    static = False

    def select(self, k: int, S: np.ndarray, M: np.ndarray, fstate: np.ndarray | None) -> np.ndarray:
        raise NotImplementedError

    def static_choices(self, N: int) -> np.ndarray:
        raise TypeError(f"{self.label} depends on the path")

    def validate(self, n_gen: int) -> None:
        pass

    def to_dict(self) -> dict:
        return {"label": self.label}


class ConstantPolicy(Policy):
    static = True

    def __init__(self, theta: int):
        self.theta = int(theta)
        self.label = f"constant({self.theta})"

    def static_choices(self, N):
        return np.full(N, self.theta, dtype=np.intp)

    def select(self, k, S, M, fstate):
        return np.full(S.shape[0], self.theta, dtype=np.intp)

    def validate(self, n_gen):
        if not 0 <= self.theta < n_gen:
            raise ValueError(f"{self.label} out of range for {n_gen} generators")

    def to_dict(self):
        return {"kind": "constant", "theta": self.theta}


class CyclicPolicy(Policy):
    static = True

    def __init__(self, sequence: Sequence[int]):
        self.sequence = tuple(int(t) for t in sequence)
        if not self.sequence:
            raise ValueError("cyclic policy needs a nonempty sequence")
        self.label = "cyclic(" + ",".join(map(str, self.sequence)) + ")"

    def static_choices(self, N):
        return np.resize(np.asarray(self.sequence, dtype=np.intp), N)

    def select(self, k, S, M, fstate):
        return np.full(S.shape[0], self.sequence[(k - 1) % len(self.sequence)], dtype=np.intp)

    def validate(self, n_gen):
        if any(not 0 <= t < n_gen for t in self.sequence):
            raise ValueError(f"{self.label} out of range for {n_gen} generators")

    def to_dict(self):
        return {"kind": "cyclic", "sequence": list(self.sequence)}


class FeedbackPolicy(Policy):
    """Selection from quantized ``(k, S_{k-1}, max_{0<=j<k} S_j)`` with ``S_0 = 0``.

    ``S`` is bucketed at ``s_res * a_k`` and the running max at ``m_res``;
    ``rule(k, s_bucket, m_bucket)`` returns the generator index.
    """

    def __init__(self, rule: Callable[[int, int, int], int], label: str = "feedback",
                 s_res: float = 0.01, m_res: float = 0.01, n_gen: int | None = None):
        self.rule = rule
        self.label = label
        self.s_res = s_res
        self.m_res = m_res
        self.n_gen = n_gen

    def select(self, k, S, M, fstate):
        sq = np.floor(S / (self.s_res * normalizer(k))).astype(np.int64)
        mq = np.floor(M / self.m_res).astype(np.int64)
        keys = np.column_stack([sq, mq])
        uniq, inv = np.unique(keys, axis=0, return_inverse=True)
        picks = np.array([self.rule(k, int(a), int(b)) for a, b in uniq], dtype=np.intp)
        out = picks[inv.ravel()]
        if self.n_gen is not None and (out.min() < 0 or out.max() >= self.n_gen):
            raise ValueError(f"{self.label} emitted an index out of range")
        return out

    def validate(self, n_gen):
        self.n_gen = n_gen

    def to_dict(self):
        return {"kind": "feedback", "label": self.label, "s_res": self.s_res, "m_res": self.m_res}


def mean_seeking_policy(gen: GeneratorSet, tol: float = 1e-10) -> FeedbackPolicy:
    """Largest next-step mean while ``S >= 0``, largest second moment otherwise."""
    means = []
    seconds = []
    for m in gen.measures:
        means.append(m.expect(lambda x: x, tol=tol).value)
        seconds.append(m.expect(lambda x: x * x, tol=tol).value)
    up = int(np.argmax(means))
    spread = int(np.argmax(seconds))

    def rule(k, s_bucket, m_bucket):
        return up if s_bucket >= 0 else spread

    return FeedbackPolicy(rule, label="mean-seeking")


def _row_keys(rows: np.ndarray) -> np.ndarray:
    """Byte keys for float rows; ``+ 0.0`` folds ``-0.0`` into ``0.0``."""
    rows = np.ascontiguousarray(rows + 0.0, dtype=float)
    return rows.view(np.dtype((np.void, rows.itemsize * rows.shape[1]))).ravel()


class DPPolicy(Policy):
    """Replays the maximizing choices of a solved recursion."""

    def __init__(self, dp: DPResult, functional: PathFunctional, label: str = "dp"):
        if functional.vtransition is None:
            raise TypeError("dp policy needs a functional with a vectorized transition")
        self.dp = dp
        self.functional = functional
        self.label = label
        self._tables = []
        for table in dp.choices:
            states = np.array(list(table.keys()), dtype=float).reshape(len(table), -1)
            keys = _row_keys(states)
            order = np.argsort(keys)
            picks = np.fromiter(table.values(), dtype=np.intp, count=len(table))
            self._tables.append((keys[order], picks[order]))

    def select(self, k, S, M, fstate):
        if k > self.dp.n:
            raise ValueError("path longer than the solved horizon")
        keys, picks = self._tables[k - 1]
        q = _row_keys(fstate)
        pos = np.minimum(np.searchsorted(keys, q), keys.size - 1)
        if np.any(keys[pos] != q):
            raise ValueError(f"step {k}: a sampled state was not reached by the recursion")
        return picks[pos]

    def to_dict(self):
        return {"kind": "dp", "label": self.label, "n": self.dp.n}


@dataclass(frozen=True)
class ScaleSequence:
    kind: str = "ones"
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in ("ones", "array", "periodic"):
            raise ValueError(f"unknown scale kind {self.kind!r}")
        if self.kind != "ones":
            if not self.values:
                raise ValueError("scale sequence needs values")
            if any(abs(v) > 1 for v in self.values):
                raise ValueError("scale values must satisfy |alpha_n| <= 1")

    @classmethod
    def ones(cls) -> "ScaleSequence":
        return cls()

    def get(self, N: int) -> np.ndarray:
        if self.kind == "ones":
            return np.ones(N)
        vals = np.asarray(self.values, dtype=float)
        if self.kind == "periodic":
            return np.resize(vals, N)
        if vals.size < N:
            raise ValueError(f"scale array has {vals.size} entries, need {N}")
        return vals[:N]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "values": list(self.values)}


# -- sampling -------------------------------------------------------------------------------


def _draw(gen: GeneratorSet, thetas: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    for th in np.unique(thetas):
        mask = thetas == th
        out[mask] = gen.measures[int(th)].ppf(u[mask])
    return out


def sample_paths(gen: GeneratorSet, policy: Policy, N: int, seed: int, indices: Sequence[int],
                 scale: ScaleSequence | None = None, label: str = "path",
                 u: np.ndarray | None = None) -> np.ndarray:
    """``(len(indices), N)`` array of ``X_n = alpha_n * draw``.

    Replication ``i`` reads its own uniform stream, so every policy sees the
    same uniforms (common random numbers) and rows never depend on chunking.
    Precomputed uniforms ``u`` (one row per index) skip the stream lookup.
    """
    if not gen.samplable:
        raise TypeError("every generator must be samplable")
    policy.validate(len(gen.measures))
    alpha = (scale or ScaleSequence.ones()).get(N)
    if u is None:
        u = rngmod.uniforms(seed, label, indices, N)
    if policy.static:
        thetas = policy.static_choices(N)
        x = np.empty_like(u)
        for th in np.unique(thetas):
            cols = thetas == th
            x[:, cols] = gen.measures[int(th)].ppf(u[:, cols])
        return x * alpha
    reps = len(indices)
    S = np.zeros(reps)
    M = np.zeros(reps)
    functional = getattr(policy, "functional", None)
    fstate = None
    if functional is not None:
        fstate = np.tile(np.asarray(functional.initial, dtype=float), (reps, 1))
    x = np.empty_like(u)
    for k in range(1, N + 1):
        th = policy.select(k, S, M, fstate)
        xk = _draw(gen, th, u[:, k - 1]) * alpha[k - 1]
        x[:, k - 1] = xk
        S = S + xk
        M = np.maximum(M, S)
        if functional is not None:
            fstate = functional.vtransition(fstate, k, xk)
    return x


def sample_path(gen: GeneratorSet, policy: Policy, N: int, seed: int, index: int = 0,
                scale: ScaleSequence | None = None) -> np.ndarray:
    return sample_paths(gen, policy, N, seed, [index], scale)[0]


def _stat_rows(paths: np.ndarray, mode: str) -> np.ndarray:
    S = np.cumsum(paths, axis=-1)
    return np.maximum(S, 0.0) if mode == POSITIVE else np.abs(S)


def max_stat(path, r: float = 1.0, mode: str = POSITIVE) -> float:
    """``max_n ((S_n^+ or |S_n|) / a_n)^r``."""
    path = np.asarray(path, dtype=float)
    if path.size == 0:
        raise ValueError("path must be nonempty")
    return float(max_stat_rows(path[None, :], r, mode)[0])


def max_stat_rows(paths: np.ndarray, r: float = 1.0, mode: str = POSITIVE) -> np.ndarray:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    a = normalizer(np.arange(1, paths.shape[-1] + 1))
    return np.max(_stat_rows(paths, mode) / a, axis=-1) ** r


def running_max_stat(paths: np.ndarray, checkpoints: Sequence[int], r: float = 1.0,
                     mode: str = POSITIVE) -> np.ndarray:
    """``max_{n <= N} (stat_n / a_n)^r`` for each ``N`` in ``checkpoints``."""
    a = normalizer(np.arange(1, paths.shape[-1] + 1))
    run = np.maximum.accumulate(_stat_rows(paths, mode) / a, axis=-1)
    return run[:, np.asarray(checkpoints) - 1] ** r


# -- Monte Carlo of the max-moment --------------------------------------------------------


@dataclass(frozen=True)
class MaxStatConfig:
    N: int
    r: float = 1.0
    mode: str = POSITIVE
    scale: ScaleSequence = field(default_factory=ScaleSequence)
    seed: int = 0
    replications: int = 100

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")
        if not self.r > 0:
            raise ValueError("r must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.replications < 1:
            raise ValueError("replications must be positive")


def chunk_size(N: int) -> int:
    """Replications per task; a function of ``N`` only, never of the thread count."""
    return max(1, min(256, (1 << 22) // max(N, 1)))


@dataclass
class PolicyEstimate:
    label: str
    mean: float
    se: float
    ci_lo: float
    ci_hi: float
    reps: int
    seed: int
    values: np.ndarray = field(repr=False, default=None)

    def survival_curve(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct values ``t`` and the empirical ``P(stat >= t)``."""
        v = np.sort(self.values)
        t, first = np.unique(v, return_index=True)
        return t, 1.0 - first / v.size

    def to_dict(self) -> dict:
        return {"policy": self.label, "mean": self.mean, "se": self.se, "ci_lo": self.ci_lo,
                "ci_hi": self.ci_hi, "reps": self.reps, "seed": self.seed}


@dataclass
class MaxMomentEstimate:
    estimates: list
    config: MaxStatConfig

    @property
    def envelope(self) -> PolicyEstimate:
        """Best policy; a lower estimate of the sub-linear moment."""
        return max(self.estimates, key=lambda e: e.mean)

    def to_dict(self) -> dict:
        env = self.envelope
        return {
            "semantics": "envelope is a lower estimate: max over the supplied policies only",
            "policies": [e.to_dict() for e in self.estimates],
            "envelope": {"policy": env.label, "mean": env.mean, "se": env.se},
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _ci(values: np.ndarray, level: float = 0.95) -> tuple[float, float, float, float]:
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.inf
    zq = float(stats.norm.ppf(0.5 + level / 2))
    return mean, se, mean - zq * se, mean + zq * se


def policy_values(gen: GeneratorSet, policy: Policy, cfg: MaxStatConfig, threads: int = 1) -> np.ndarray:
    """Per-replication max statistic under one policy, in replication order."""

    def task(idx: range) -> np.ndarray:
        paths = sample_paths(gen, policy, cfg.N, cfg.seed, idx, cfg.scale)
        return max_stat_rows(paths, cfg.r, cfg.mode)

    return rngmod.map_chunks(task, cfg.replications, threads, chunk_size(cfg.N))


def mc_choquet_max_moment(gen: GeneratorSet, policies: Sequence[Policy], cfg: MaxStatConfig,
                          threads: int = 1) -> MaxMomentEstimate:
    if cfg.replications < 2:
        raise ValueError("need at least 2 replications")
    out = []
    for pol in policies:
        vals = policy_values(gen, pol, cfg, threads)
        mean, se, lo, hi = _ci(vals)
        out.append(PolicyEstimate(pol.label, mean, se, lo, hi, cfg.replications, cfg.seed, vals))
    return MaxMomentEstimate(out, cfg)


# -- plateau / divergence probe -----------------------------------------------------------

PLATEAU = "plateau"
GROWING = "growing"
INCONCLUSIVE = "inconclusive"


@dataclass
class ProbeResult:
    verdict: str
    N_grid: list
    means: np.ndarray
    ses: np.ndarray
    plateau_rtol: float
    growth: float

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "N": list(self.N_grid), "mean": self.means.tolist(),
                "se": self.ses.tolist(), "plateau_rtol": self.plateau_rtol, "growth": self.growth}


def classify_curve(means: Sequence[float], plateau_rtol: float = 0.05, growth: float = 0.5) -> str:
    m = np.asarray(means, dtype=float)
    last, prev = m[-1], m[-2]
    if abs(last - prev) <= plateau_rtol * abs(last) or (last == 0 and prev == 0):
        return PLATEAU
    if last >= (1.0 + growth) * m[0]:
        return GROWING
    return INCONCLUSIVE


def plateau_divergence_probe(gen: GeneratorSet, r: float = 1.0, mode: str = ABSOLUTE,
                             N_grid: Sequence[int] | None = None, replications: int = 200,
                             seed: int = 0, policy: Policy | None = None, threads: int = 1,
                             plateau_rtol: float = 0.05, growth: float = 0.5) -> ProbeResult:
    """Mean max statistic along ``N_grid``, every ``N`` read off the same paths."""
    grid = list(N_grid or [2**k for k in range(10, 21)])
    policy = policy or ConstantPolicy(0)
    N = max(grid)

    def task(idx: range) -> np.ndarray:
        paths = sample_paths(gen, policy, N, seed, idx)
        return running_max_stat(paths, grid, r, mode)

    vals = rngmod.map_chunks(task, replications, threads, chunk_size(N))
    means = vals.mean(axis=0)
    ses = vals.std(axis=0, ddof=1) / math.sqrt(replications)
    return ProbeResult(classify_curve(means, plateau_rtol, growth), grid, means, ses, plateau_rtol, growth)

