"""Averaged mixing time and minimax fidelity.

Both metrics only need one row of a matrix power, the sink's row, so they
iterate a row vector instead of forming ``W^t`` or ``Δ^t``:

* walk:      ``r_{t+1}[j] = sum_{k in out(j)} r_t[k] / outdeg(j)``  (``r_t = (W^t)[τ, :]``)
* diffusion: ``d_{t+1}[i] = sum_{j in out(i)} d_t[j] / indeg(j)``   (``d_t = (Δ^t)[τ, :]``)

Both are products with the same 0/1 matrix ``M = Aᵀ`` (row = sender), held
as a CSR matrix, so each step costs O(m).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .errors import SizeLimit, ZeroInDegree, ZeroOutDegree
from .graph import FeedforwardGraph

CONVENTIONS = ("missmass", "l1")
EARLY_STOPS = (None, "certified", "heuristic")
PATH_COUNT_MAX_N = 2048


def sender_matrix(g: FeedforwardGraph) -> sp.csr_matrix:
    """CSR of ``Aᵀ``: entry (j, k) is 1 iff (j, k) is an edge."""
    if "csr" not in g._cache:
        data = np.ones(g.num_edges)
        g._cache["csr"] = sp.csr_matrix((data, g.dst, g.out_indptr), shape=(g.n, g.n))
    return g._cache["csr"]


class WalkOperator:
    """Lazy random walk, ``w_ij = 1/outdeg(j)`` on edges (j, i). Column-stochastic."""

    def __init__(self, g: FeedforwardGraph):
        outdeg = g.out_degrees()
        if np.any(outdeg == 0):
            raise ZeroOutDegree(f"nodes with no outgoing edges: {np.flatnonzero(outdeg == 0)[:10].tolist()}")
        self.graph = g
        self.inv_outdeg = 1.0 / outdeg
        self._m = sender_matrix(g)

    def step_row(self, r: np.ndarray) -> np.ndarray:
        return (self._m @ r) * self.inv_outdeg

    def dense(self) -> np.ndarray:
        g = self.graph
        w = np.zeros((g.n, g.n))
        w[g.dst, g.src] = self.inv_outdeg[g.src]
        return w


class DiffusionOperator:
    """Neighbourhood averaging, ``Δ_ij = 1/indeg(i)`` on edges (j, i). Row-stochastic."""

    def __init__(self, g: FeedforwardGraph):
        indeg = g.in_degrees()
        if np.any(indeg == 0):
            raise ZeroInDegree(f"nodes with no incoming edges: {np.flatnonzero(indeg == 0)[:10].tolist()}")
        self.graph = g
        self.inv_indeg = 1.0 / indeg
        self._m = sender_matrix(g)

    def step_row(self, d: np.ndarray) -> np.ndarray:
        return self._m @ (d * self.inv_indeg)

    def dense(self) -> np.ndarray:
        g = self.graph
        a = np.zeros((g.n, g.n))
        a[g.dst, g.src] = self.inv_indeg[g.dst]
        return a


def _sink_indicator(n: int) -> np.ndarray:
    e = np.zeros(n)
    e[n - 1] = 1.0
    return e


def tau_row_walk(g: FeedforwardGraph, t_max: int) -> np.ndarray:
    """Rows ``(W^t)[τ, :]`` for ``t = 0..t_max``, shape ``(t_max + 1, n)``."""
    op = WalkOperator(g)
    out = np.empty((t_max + 1, g.n))
    out[0] = _sink_indicator(g.n)
    for t in range(t_max):
        out[t + 1] = op.step_row(out[t])
    return out


def tau_row_diffusion(g: FeedforwardGraph, t_max: int) -> np.ndarray:
    """Rows ``(Δ^t)[τ, :]`` for ``t = 0..t_max``, shape ``(t_max + 1, n)``."""
    op = DiffusionOperator(g)
    out = np.empty((t_max + 1, g.n))
    out[0] = _sink_indicator(g.n)
    for t in range(t_max):
        out[t + 1] = op.step_row(out[t])
    return out


# -- mixing time ----------------------------------------------------------------

@dataclass
class MixingReport:
    """``mixing_time`` is None when the threshold was never crossed within ``horizon``."""

    mixing_time: int | None
    convention: str
    epsilon: float
    horizon: int
    trace: np.ndarray = field(repr=False)

    @property
    def mixed(self) -> bool:
        return self.mixing_time is not None

    def to_dict(self, with_trace: bool = True) -> dict:
        d = {
            "mixing_time": -1 if self.mixing_time is None else int(self.mixing_time),
            "mixed": self.mixed,
            "convention": self.convention,
            "epsilon": self.epsilon,
            "horizon": self.horizon,
        }
        if with_trace:
            d["trace"] = [float(x) for x in self.trace]
        return d

    def trace_csv(self) -> str:
        return _trace_csv(self.trace)


def _trace_csv(values) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["step", "value"])
    for t, v in enumerate(values):
        w.writerow([t, repr(float(v))])
    return buf.getvalue()


def averaged_mixing_time(g: FeedforwardGraph, epsilon: float = 0.25, convention: str = "missmass",
                         horizon: int | None = None) -> MixingReport:
    """Smallest t whose start-averaged distance to ``1_τ`` drops below ``epsilon``.

    ``missmass`` averages ``1 - (W^t)[τ, i]``, the chance of not having
    reached the sink. ``l1`` averages ``||W^t e_i - 1_τ||_1``, which for a
    column-stochastic ``W`` equals exactly twice the miss mass, so it is read
    off the same sink row.
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    if horizon is None:
        horizon = 8 * g.n
    op = WalkOperator(g)
    scale = 2.0 if convention == "l1" else 1.0
    r = _sink_indicator(g.n)
    trace = []
    mixing = None
    for t in range(horizon + 1):
        value = scale * (1.0 - r.sum() / g.n)
        trace.append(value)
        if value < epsilon:
            mixing = t
            break
        if t < horizon:
            r = op.step_row(r)
    return MixingReport(mixing, convention, float(epsilon), int(horizon), np.asarray(trace))


# -- fidelity -----------------------------------------------------------------

@dataclass
class FidelityReport:
    phi: np.ndarray = field(repr=False)
    argmax_t: np.ndarray = field(repr=False)
    minimax: float
    argmin_node: int
    normalized_minimax: float
    horizon: int
    steps: int
    early_stop: str | None = None

    @property
    def phi_exact(self) -> bool:
        """False when iteration stopped early; ``phi`` entries are then lower bounds
        (the minimax value and its node are still exact under ``certified``)."""
        return self.steps >= self.horizon

    def to_dict(self, with_phi: bool = True) -> dict:
        d = {
            "minimax": float(self.minimax),
            "normalized_minimax": float(self.normalized_minimax),
            "argmin_node": int(self.argmin_node),
            "argmax_t": int(self.argmax_t[self.argmin_node]),
            "horizon": int(self.horizon),
            "steps": int(self.steps),
            "early_stop": self.early_stop,
            "phi_exact": self.phi_exact,
        }
        if with_phi:
            d["phi"] = [float(x) for x in self.phi]
            d["argmax_t_per_node"] = [int(x) for x in self.argmax_t]
        return d


def fidelity_report(g: FeedforwardGraph, horizon: int | None = None, early_stop: str | None = None,
                    heuristic_ratio: float = 1e-3, heuristic_patience: int = 16) -> FidelityReport:
    """Per-node max fidelity ``φ_i = max_{t <= horizon} (Δ^t)[τ, i]`` and its minimum.

    ``early_stop``:

    * ``None``: iterate the full horizon.
    * ``"certified"``: stop once the minimizing node provably cannot gain. The
      walk behind ``Δ`` only moves to lower indices, so node ``i`` can never
      again hold more than the mass now sitting on non-absorbing nodes at or
      above ``i`` (plus its own mass if it is absorbing). Every ``φ`` only
      grows, so once that bound is below the current minimum the minimax
      value, its node and its step are final.
    * ``"heuristic"``: stop when every non-absorbing node's current value is
      under ``heuristic_ratio`` of its running max for ``heuristic_patience``
      consecutive steps. No guarantee.
    """
    if early_stop not in EARLY_STOPS:
        raise ValueError(f"early_stop must be one of {EARLY_STOPS}")
    n = g.n
    if horizon is None:
        horizon = 4 * n
    op = DiffusionOperator(g)
    absorbing = (g.in_degrees() == 1) & g.self_edge_mask()
    transient = ~absorbing
    d = _sink_indicator(n)
    phi = d.copy()
    argmax_t = np.zeros(n, dtype=np.int64)
    quiet = 0
    steps = horizon
    for t in range(1, horizon + 1):
        d = op.step_row(d)
        better = d > phi
        phi[better] = d[better]
        argmax_t[better] = t
        if early_stop == "certified":
            i = int(np.argmin(phi))
            tail = np.cumsum((d * transient)[::-1])[::-1]
            bound = tail[i] + (d[i] if absorbing[i] else 0.0)
            if bound <= phi[i]:
                steps = t
                break
        elif early_stop == "heuristic":
            if np.all(d[transient] < heuristic_ratio * phi[transient]):
                quiet += 1
                if quiet >= heuristic_patience:
                    steps = t
                    break
            else:
                quiet = 0
    i = int(np.argmin(phi))
    return FidelityReport(phi=phi, argmax_t=argmax_t, minimax=float(phi[i]), argmin_node=i,
                          normalized_minimax=float(n * phi[i]), horizon=int(horizon), steps=int(steps),
                          early_stop=early_stop)


# -- spectrum and path counts ---------------------------------------------------------

def walk_spectrum(g: FeedforwardGraph) -> list[Fraction]:
    """Eigenvalues of ``W`` as a sorted multiset of exact fractions.

    ``W`` is triangular, so these are its diagonal entries: ``1/outdeg(j)``
    where ``j`` has a self-edge, ``0`` where it does not.
    """
    outdeg = g.out_degrees()
    if np.any(outdeg == 0):
        raise ZeroOutDegree("walk matrix undefined: some node has no outgoing edges")
    loops = g.self_edge_mask()
    return sorted(Fraction(1, int(k)) if s else Fraction(0) for k, s in zip(outdeg, loops))


def path_count(g: FeedforwardGraph, t: int) -> np.ndarray:
    """Exact ``A^t`` (``A[i, j] = 1`` iff (j, i) is an edge).

    Entry (i, j) counts oriented length-t walks from j to i. int64 while the
    largest row sum provably fits, Python integers (object dtype) beyond.
    """
    n = g.n
    if n > PATH_COUNT_MAX_N:
        raise SizeLimit(f"path_count is dense; n={n} exceeds {PATH_COUNT_MAX_N}")
    if t < 0:
        raise ValueError("t must be >= 0")
    a = sp.csr_matrix((np.ones(g.num_edges, dtype=np.int64), (g.dst, g.src)), shape=(n, n))
    # row sums of A^t bound every entry and every partial sum of the product
    rowsum = np.ones(n)
    for _ in range(t):
        rowsum = a @ rowsum
    if rowsum.max(initial=0.0) < 2.0 ** 60:
        p = np.eye(n, dtype=np.int64)
        for _ in range(t):
            p = np.asarray(a @ p, dtype=np.int64)
        return p
    p = np.eye(n, dtype=np.int64).astype(object)
    in_nbrs = g.in_adj
    for _ in range(t):
        nxt = np.zeros((n, n), dtype=object)
        for i in range(n):
            if in_nbrs[i].size:
                nxt[i] = p[in_nbrs[i]].sum(axis=0)
        p = nxt
    return p
