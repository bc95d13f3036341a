"""Brute-force references for the metric engines and the propositions they rest on.

Nothing here reuses the sparse row-vector engines except where a checker is
explicitly about their output (the vanishing-fidelity check). Dense
matrices are filled edge by edge from the graph, powers are plain repeated
products, path counts come from exhaustive DFS and closed forms use exact
integer binomials.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import rng as _rng
from .errors import PreconditionFailed, SizeLimit
from .graph import FeedforwardGraph, validate
from .metrics import tau_row_diffusion

DENSE_MAX_N = 512
ENUM_MAX = 14


def dense_operator(g: FeedforwardGraph, operator: str) -> np.ndarray:
    """``A``, ``W`` or ``Δ`` as a dense matrix (row = receiver, column = sender)."""
    n = g.n
    out_deg = [0] * n
    in_deg = [0] * n
    pairs = list(g.edges())
    for a, b in pairs:
        out_deg[a] += 1
        in_deg[b] += 1
    m = np.zeros((n, n))
    for a, b in pairs:
        if operator == "A":
            m[b, a] = 1.0
        elif operator == "W":
            m[b, a] = 1.0 / out_deg[a]
        elif operator in ("D", "Delta", "Δ"):
            m[b, a] = 1.0 / in_deg[b]
        else:
            raise ValueError(f"unknown operator {operator!r}")
    return m


def dense_power(g: FeedforwardGraph, operator: str, t: int) -> np.ndarray:
    if g.n > DENSE_MAX_N:
        raise SizeLimit(f"dense_power limited to n <= {DENSE_MAX_N}")
    base = dense_operator(g, operator)
    out = np.eye(g.n)
    for _ in range(t):
        out = base @ out
    return out


def dense_powers(g: FeedforwardGraph, operator: str, t_max: int):
    """Yield ``M^0 .. M^t_max`` by repeated multiplication."""
    if g.n > DENSE_MAX_N:
        raise SizeLimit(f"dense_power limited to n <= {DENSE_MAX_N}")
    base = dense_operator(g, operator)
    cur = np.eye(g.n)
    yield cur
    for _ in range(t_max):
        cur = base @ cur
        yield cur


def dense_mixing_time(g: FeedforwardGraph, epsilon: float = 0.25, convention: str = "missmass",
                      horizon: int | None = None) -> int | None:
    """Mixing time from full matrix powers, with the literal L1 distance for ``l1``."""
    horizon = 8 * g.n if horizon is None else horizon
    n = g.n
    target = np.zeros((n, n))
    target[n - 1, :] = 1.0  # every column is 1_τ
    for t, wt in enumerate(dense_powers(g, "W", horizon)):
        if convention == "l1":
            value = np.abs(wt - target).sum() / n
        else:
            value = (1.0 - wt[n - 1, :]).sum() / n
        if value < epsilon:
            return t
    return None


# -- Monte Carlo --------------------------------------------------------------------

@dataclass
class WalkSample:
    """``steps_to_sink`` is None when the walk was censored at ``horizon``."""

    start: int
    steps_to_sink: int | None


@dataclass
class MonteCarloMixing:
    miss_curve: np.ndarray = field(repr=False)      # averaged over starts, t = 0..horizon
    stderr: np.ndarray = field(repr=False)
    per_start: np.ndarray = field(repr=False)       # (n, horizon + 1)
    hitting_times: np.ndarray = field(repr=False)   # (n, trials); -1 = censored
    trials_per_start: int
    horizon: int

    def mixing_time(self, epsilon: float = 0.25) -> int | None:
        below = np.flatnonzero(self.miss_curve < epsilon)
        return int(below[0]) if below.size else None

    def samples(self, start: int) -> list[WalkSample]:
        return [WalkSample(start, None if h < 0 else int(h)) for h in self.hitting_times[start]]

    def mean_steps(self, start: int) -> float:
        h = self.hitting_times[start]
        return float(h[h >= 0].mean())


def monte_carlo_mixing(g: FeedforwardGraph, trials_per_start: int, horizon: int, seed: int = 0) -> MonteCarloMixing:
    """Simulate the lazy walk (uniform out-edge each step) from every start node.

    Each start node draws from its own sub-stream of the Monte Carlo family.
    """
    if trials_per_start < 1:
        raise ValueError("trials_per_start must be >= 1")
    n, tau = g.n, g.n - 1
    indptr, dst = g.out_indptr, g.dst
    deg = np.diff(indptr)
    root = _rng.RngStream(int(seed)).child(_rng.MONTE_CARLO)
    hits = np.full((n, trials_per_start), -1, dtype=np.int64)
    for s in range(n):
        gen = root.child(s).generator()
        pos = np.full(trials_per_start, s, dtype=np.int64)
        hit = hits[s]
        hit[pos == tau] = 0
        for t in range(1, horizon + 1):
            live = np.flatnonzero(hit < 0)
            if live.size == 0:
                break
            p = pos[live]
            if np.any(deg[p] == 0):
                raise PreconditionFailed("walk reached a node with no outgoing edges")
            u = gen.random(live.size)
            pos[live] = dst[indptr[p] + np.minimum((u * deg[p]).astype(np.int64), deg[p] - 1)]
            arrived = live[pos[live] == tau]
            hit[arrived] = t
    # per_start[s, t] = fraction of walks from s not yet at τ after t steps
    censored = np.where(hits < 0, horizon + 1, hits)
    counts = np.zeros((n, horizon + 2))
    np.add.at(counts, (np.repeat(np.arange(n), trials_per_start), censored.ravel()), 1.0)
    per_start = 1.0 - np.cumsum(counts, axis=1)[:, : horizon + 1] / trials_per_start
    curve = per_start.mean(axis=0)
    var = (per_start * (1 - per_start)).sum(axis=0) / (n * n * trials_per_start)
    return MonteCarloMixing(curve, np.sqrt(var), per_start, hits, trials_per_start, horizon)


# -- path enumeration ---------------------------------------------------------------

def enumerate_paths(g: FeedforwardGraph, i: int, t: int) -> int:
    """Count oriented walks of exactly ``t`` edges from ``i`` to τ by exhaustive DFS.

    Self-loops count as steps, matching ``(A^t)[τ, i]``.
    """
    if g.n > ENUM_MAX or t > ENUM_MAX:
        raise SizeLimit(f"enumerate_paths limited to n, t <= {ENUM_MAX}")
    tau = g.n - 1
    succ = [list(map(int, g.out_neighbors(v))) for v in range(g.n)]

    def dfs(v: int, remaining: int) -> int:
        if remaining == 0:
            return 1 if v == tau else 0
        return sum(dfs(w, remaining - 1) for w in succ[v])

    return dfs(int(i), int(t))


# -- Proposition checkers -------------------------------------------------------------

@dataclass
class Prop42Result:
    mixing_time: int | None
    s: int | None
    average_path_count: float
    bound: float
    holds: bool

    def to_dict(self):
        return asdict(self)


def check_prop_4_2(g: FeedforwardGraph) -> Prop42Result:
    """Search ``s <= t`` with mean path count to τ of length s at least ``(3/(4t)) 2^s``.

    ``t`` is the miss-mass mixing time from dense matrix powers; path counts
    come from :func:`enumerate_paths`. Returns the smallest witnessing ``s``.
    """
    n = g.n
    if n > ENUM_MAX:
        raise SizeLimit(f"check_prop_4_2 limited to n <= {ENUM_MAX}")
    if n < 2:
        raise PreconditionFailed("needs at least two nodes")
    outdeg = g.out_degrees()
    low = [i for i in range(n - 1) if outdeg[i] < 2]
    if low:
        raise PreconditionFailed(f"non-sink nodes with out-degree < 2: {low}")
    t = dense_mixing_time(g, convention="missmass")
    if t is None:
        return Prop42Result(None, None, 0.0, math.inf, False)
    best = (None, 0.0, math.inf, -math.inf)
    for s in range(min(t, ENUM_MAX) + 1):
        avg = Fraction(sum(enumerate_paths(g, i, s) for i in range(n)), n)
        bound = Fraction(3 * 2 ** s, 4 * t)
        if avg >= bound:
            return Prop42Result(t, s, float(avg), float(bound), True)
        if avg / bound > best[3]:
            best = (s, float(avg), float(bound), avg / bound)
    if t > ENUM_MAX:
        raise SizeLimit(f"no witness with s <= {ENUM_MAX}; mixing time {t} exceeds the enumeration limit")
    return Prop42Result(t, best[0], best[1], best[2], False)


@dataclass
class LineFidelity:
    n: int
    paper_value: float
    exact_value: float | None

    def to_dict(self):
        return asdict(self)


def central_binomial_ratio(k: int) -> float:
    """``C(2k, k) / 4^k`` from exact integers."""
    return float(Fraction(math.comb(2 * k, k), 4 ** k))


def closed_form_line_fidelity(n: int) -> LineFidelity:
    """Line-graph minimax fidelity: the binomial-peak formula ``C(2(n-1), n-1)/4^(n-1)``
    and the value of the exact dynamics ``C(2(n-2), n-2)/4^(n-2)``.

    With self-edges node 0 only ever gains mass, so the minimizer is node 1,
    which needs ``n - 2`` moves; that shifts the index by one.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    exact = central_binomial_ratio(n - 2) if n >= 3 else None
    return LineFidelity(n, central_binomial_ratio(n - 1), exact)


@dataclass
class Prop51Result:
    decays: bool
    final_value: float
    horizon: int
    bound_applies: bool = False
    bound_holds: bool | None = None

    def to_dict(self):
        return asdict(self)


def check_prop_5_1(g: FeedforwardGraph, horizon: int = 256) -> Prop51Result:
    """Fidelity of node ``n-2`` at τ must vanish; also checks ``<= t/2^t`` when both
    ``n-2`` and τ have in-degree 2."""
    if horizon < 64:
        raise PreconditionFailed("horizon must be >= 64")
    if g.n < 2:
        raise PreconditionFailed("needs n > 1")
    rep = validate(g)
    if not rep.unique_sink:
        raise PreconditionFailed(f"sink is not unique: {rep.sinks[:10]}")
    if not rep.has_all_self_edges:
        raise PreconditionFailed("missing self-edges")
    indeg = g.in_degrees()
    if indeg[g.n - 2] <= 1:
        raise PreconditionFailed("node n-2 has no incoming edge besides its self-edge")
    trace = tau_row_diffusion(g, horizon)[:, g.n - 2]
    final = float(trace[-1])
    applies = bool(indeg[g.n - 2] == 2 and indeg[g.n - 1] == 2)
    holds = None
    if applies:
        t = np.arange(horizon + 1)
        holds = bool(np.all(trace <= t / 2.0 ** t + 1e-15))
    return Prop51Result(final < 1e-6, final, horizon, applies, holds)
