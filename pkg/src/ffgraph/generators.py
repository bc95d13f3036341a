"""Seeded constructors for the feedforward graph families.

All randomness flows through :class:`ffgraph.rng.RngStream` sub-streams keyed
by family and by the structural position being sampled (node, matching,
recursion level, block), so the same config always yields the same edges.
"""
from __future__ import annotations

import math
import re
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import rng as _rng
from .errors import InvalidDegree, ParseError
from .graph import FeedforwardGraph, build_graph, validate

FAMILIES = (
    "fully_connected",
    "locally_connected",
    "line",
    "star",
    "erdos_renyi",
    "oriented_expander",
    "poisson",
    "fs",
)

# sub-stream tags under rng.GENERATORS
_ER, _EXPANDER, _POISSON, _FS = 1, 2, 3, 4


def ceil_log2(n: int) -> int:
    """Exact ceil(log2 n) for n >= 1."""
    return (int(n) - 1).bit_length()


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


# -- in-degree schedules --------------------------------------------------------

_SCHEDULE_RE = re.compile(r"^\s*(constant|const|k_logn|logn|sqrt_n)\s*(?:[(:]\s*([0-9.eE+-]+)\s*\)?)?\s*$")


def parse_schedule(schedule) -> tuple[str, float]:
    """Normalize ``"k_logn(4)"``, ``"constant:3"``, ``"sqrt_n"``, ``("k_logn", 4)``."""
    if isinstance(schedule, (tuple, list)):
        kind, value = schedule[0], (schedule[1] if len(schedule) > 1 else None)
    else:
        m = _SCHEDULE_RE.match(str(schedule))
        if not m:
            raise ParseError(f"unknown in-degree schedule {schedule!r}", key="schedule")
        kind, value = m.group(1), m.group(2)
    kind = {"const": "constant", "logn": "k_logn"}.get(kind, kind)
    if kind == "sqrt_n":
        return kind, 1.0
    if kind not in ("constant", "k_logn"):
        raise ParseError(f"unknown in-degree schedule {schedule!r}", key="schedule")
    if value is None:
        if kind == "constant":
            raise ParseError("constant schedule needs a value", key="schedule")
        value = 1.0
    return kind, float(value)


def format_schedule(schedule) -> str:
    kind, value = parse_schedule(schedule)
    if kind == "sqrt_n":
        return "sqrt_n"
    return f"{kind}({value:g})"


def default_indegree(n: int, schedule) -> int:
    """Degree budget for ``n`` nodes: ``c``, ``ceil(k log2 n)`` or ``ceil(sqrt n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kind, value = parse_schedule(schedule)
    if kind == "constant":
        return int(value)
    if kind == "k_logn":
        return math.ceil(value * math.log2(n) - 1e-12) if n > 1 else 0
    return math.isqrt(n - 1) + 1 if n > 1 else 1


# -- config -------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratorConfig:
    """Family tag plus parameters. Fields a family does not use are ignored.

    ``None`` for a used degree parameter means "derive from n":
    ``kappa``, ``budget`` and the oriented expander's ``expander_degree``
    default to ``ceil(log2 n)``; the FS ``expander_degree`` defaults to
    ``ceil(4 log2 n)``. ``p`` has no default and is required for poisson.
    """

    family: str
    n: int
    kappa: int | None = None
    p: float | None = None
    budget: int | None = None
    expander_degree: int | None = None
    fs_decay_ratio: float = 0.5
    fs_base_threshold: int = 4
    seed: int = 0
    self_edges: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParseError(f"unknown family {self.family!r}", key="family")
        if int(self.n) < 1:
            raise ParseError(f"n must be >= 1, got {self.n}", key="n")
        if self.budget is not None and self.budget < 1:
            raise ParseError("budget must be >= 1", key="budget")
        if self.p is not None and not 0.0 <= self.p <= 1.0:
            raise ParseError("p must lie in [0, 1]", key="p")
        if not 0.0 < self.fs_decay_ratio < 1.0:
            raise ParseError("fs_decay_ratio must lie in (0, 1)", key="fs_decay_ratio")
        if not 0 <= int(self.seed) <= _rng.MASK64:
            raise ParseError("seed must be a 64-bit unsigned integer", key="seed")

    @classmethod
    def from_dict(cls, data: dict) -> "GeneratorConfig":
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ParseError(f"unknown configuration key {key!r}", key=key)
        if data.get("family") is not None and data["family"] not in FAMILIES:
            raise ParseError(f"unknown family {data['family']!r}", key="family")
        for key in ("family", "n"):
            if key not in data:
                raise ParseError(f"missing required key {key!r}", key=key)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ParseError(str(exc)) from None

    def to_dict(self) -> dict:
        return asdict(self)

    def degree_parameter(self) -> int | None:
        """The family's in-degree knob after defaults are applied."""
        r = self.resolved()
        return {
            "locally_connected": r.kappa,
            "line": 1,
            "erdos_renyi": r.budget,
            "poisson": r.budget,
            "oriented_expander": r.expander_degree,
            "fs": r.expander_degree,
        }.get(self.family)

    def resolved(self) -> "GeneratorConfig":
        logn = max(1, ceil_log2(self.n))
        changes = {}
        if self.family == "locally_connected" and self.kappa is None:
            changes["kappa"] = logn
        if self.family in ("erdos_renyi", "poisson") and self.budget is None:
            changes["budget"] = logn
        if self.family == "oriented_expander" and self.expander_degree is None:
            changes["expander_degree"] = logn
        if self.family == "fs" and self.expander_degree is None:
            changes["expander_degree"] = max(1, default_indegree(self.n, ("k_logn", 4)))
        if self.family == "poisson" and self.p is None:
            raise ParseError("poisson family requires p", key="p")
        return replace(self, **changes) if changes else self


def generate(config: GeneratorConfig) -> FeedforwardGraph:
    c = config.resolved()
    stream = _rng.RngStream(int(c.seed)).child(_rng.GENERATORS)
    if c.family == "fully_connected":
        g = gen_fully_connected(c.n)
    elif c.family == "locally_connected":
        g = gen_locally_connected(c.n, c.kappa)
    elif c.family == "line":
        g = gen_locally_connected(c.n, 1)
    elif c.family == "star":
        g = gen_star(c.n)
    elif c.family == "erdos_renyi":
        g = gen_erdos_renyi(c.n, c.budget, stream)
    elif c.family == "oriented_expander":
        g = gen_oriented_expander(c.n, c.expander_degree, stream)
    elif c.family == "poisson":
        g = gen_poisson(c.n, c.p, c.budget, stream)
    else:
        g = gen_fs(c.n, c.expander_degree, c.fs_decay_ratio, c.fs_base_threshold, stream)
    if not c.self_edges:
        keep = g.src != g.dst
        g = FeedforwardGraph(g.n, g.src[keep], g.dst[keep])
    return g


def _stream(seed) -> _rng.RngStream:
    if isinstance(seed, _rng.RngStream):
        return seed
    return _rng.RngStream(int(seed)).child(_rng.GENERATORS)


def _self_edges(n: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(n, dtype=np.int64)
    return idx, idx


def _assemble(n, parts) -> FeedforwardGraph:
    src = np.concatenate([p[0] for p in parts]) if parts else np.zeros(0, np.int64)
    dst = np.concatenate([p[1] for p in parts]) if parts else np.zeros(0, np.int64)
    return build_graph(n, (src, dst))


# -- deterministic families -----------------------------------------------------------

def _triangle(size: int, offset: int = 0) -> tuple[np.ndarray, np.ndarray]:
    a, b = np.triu_indices(size)
    return a.astype(np.int64) + offset, b.astype(np.int64) + offset


def gen_fully_connected(n: int) -> FeedforwardGraph:
    # triu_indices is already in (src, dst) lexicographic order
    a, b = _triangle(n)
    return FeedforwardGraph(n, a, b)


def gen_locally_connected(n: int, kappa: int) -> FeedforwardGraph:
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    src = np.repeat(np.arange(n, dtype=np.int64), min(kappa, n - 1) + 1)
    offs = np.tile(np.arange(min(kappa, n - 1) + 1, dtype=np.int64), n)
    dst = src + offs
    keep = dst < n
    return FeedforwardGraph(n, src[keep], dst[keep])


def gen_line(n: int) -> FeedforwardGraph:
    return gen_locally_connected(n, 1)


def gen_star(n: int) -> FeedforwardGraph:
    idx = np.arange(n - 1, dtype=np.int64)
    return _assemble(n, [_self_edges(n), (idx, np.full(n - 1, n - 1, dtype=np.int64))])


# -- random families -----------------------------------------------------------

def gen_erdos_renyi(n: int, budget: int, seed=0) -> FeedforwardGraph:
    """Self-edge plus ``min(budget - 1, i)`` uniform distinct predecessors per node."""
    if budget < 1:
        raise InvalidDegree("budget must be >= 1")
    stream = _stream(seed).child(_ER)
    parts = [_self_edges(n)]
    for i in range(1, n):
        k = min(budget - 1, i)
        if k == 0:
            continue
        if k >= i:
            preds = np.arange(i, dtype=np.int64)
        else:
            preds = _rng.sample_without_replacement(stream.child(i).generator(), i, k).astype(np.int64)
        parts.append((preds, np.full(preds.shape[0], i, dtype=np.int64)))
    return _assemble(n, parts)


def gen_oriented_expander(n: int, expander_degree: int, seed=0) -> FeedforwardGraph:
    """Union of ``expander_degree`` random matchings, randomly relabelled and
    oriented from lower to higher label. Odd ``n`` leaves one node out of each
    matching."""
    d = int(expander_degree)
    if d < 1:
        raise InvalidDegree(f"expander degree must be >= 1, got {d}")
    if n < 2:
        raise ValueError("oriented expander needs n >= 2")
    stream = _stream(seed).child(_EXPANDER)
    half = n // 2
    us, vs = [], []
    for m in range(d):
        perm = _rng.permutation(stream.child(0, m).generator(), n)[: 2 * half].reshape(half, 2)
        us.append(perm[:, 0])
        vs.append(perm[:, 1])
    label = _rng.permutation(stream.child(1).generator(), n).astype(np.int64)
    lu, lv = label[np.concatenate(us)], label[np.concatenate(vs)]
    return _assemble(n, [_self_edges(n), (np.minimum(lu, lv), np.maximum(lu, lv))])


def gen_poisson(n: int, p: float, budget: int, seed=0) -> FeedforwardGraph:
    """Right-to-left scan: predecessor j of node i is taken when a uniform draw
    exceeds ``p``, until ``budget`` in-edges (self-edge included) are placed."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if budget < 1:
        raise InvalidDegree("budget must be >= 1")
    stream = _stream(seed).child(_POISSON)
    parts = [_self_edges(n)]
    for i in range(1, n):
        need = budget - 1
        if need == 0:
            break
        gen = stream.child(i).generator()
        j = i - 1
        picked = []
        while need > 0 and j >= 0:
            # drawing a chunk consumes the same doubles a one-at-a-time loop would
            chunk = j + 1 if p >= 1.0 else min(j + 1, int(2 * need / (1.0 - p)) + 16)
            rho = gen.random(chunk)
            hits = np.flatnonzero(rho > p)[:need]
            picked.append(j - hits)
            need -= hits.shape[0]
            j -= chunk
        preds = np.concatenate(picked).astype(np.int64) if picked else np.zeros(0, np.int64)
        parts.append((preds, np.full(preds.shape[0], i, dtype=np.int64)))
    return _assemble(n, parts)


# -- FS -----------------------------------------------------------------------

def block_sizes(size: int, blocks: int) -> list[int]:
    """Contiguous near-equal split, larger blocks first."""
    base, extra = divmod(size, blocks)
    return [base + 1] * extra + [base] * (blocks - extra)


def bipartite_matching(gen: np.random.Generator, src_start: int, src_size: int,
                       dst_start: int, dst_size: int) -> tuple[np.ndarray, np.ndarray]:
    """One random matching between two blocks.

    Equal sizes give a perfect matching. Otherwise every node of the larger
    side is paired with one node of the smaller side, assigned cyclically
    through a random order of the smaller side, so both sides are covered.
    """
    large, small = max(src_size, dst_size), min(src_size, dst_size)
    perm_large = _rng.permutation(gen, large)
    perm_small = _rng.permutation(gen, small)[np.arange(large) % small]
    if src_size >= dst_size:
        return src_start + perm_large, dst_start + perm_small
    return src_start + perm_small, dst_start + perm_large


def _fs_parts(start, size, degree, ratio, threshold, stream, level, parts):
    blocks = ceil_log2(size)
    if size <= threshold or blocks < 2:
        parts.append(_triangle(size, start))
        return
    sizes = block_sizes(size, blocks)
    starts = start + np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
    for b in range(blocks - 1):
        k = min(degree, sizes[b + 1])
        for m in range(k):
            gen = stream.child(level, int(starts[b]), m).generator()
            parts.append(bipartite_matching(gen, int(starts[b]), sizes[b], int(starts[b + 1]), sizes[b + 1]))
    inner = max(1, _round_half_up(degree * ratio))
    for b in range(blocks):
        _fs_parts(int(starts[b]), sizes[b], inner, ratio, threshold, stream, level + 1, parts)


def gen_fs(n: int, expander_degree: int, fs_decay_ratio: float = 0.5,
           fs_base_threshold: int = 4, seed=0) -> FeedforwardGraph:
    """Recursive block-expander graph.

    Nodes are cut into ``ceil(log2 n)`` contiguous blocks; each consecutive
    block pair is joined by ``min(expander_degree, next block size)`` random
    matchings, and every block is filled by the same construction with the
    expander degree scaled by ``fs_decay_ratio``. Blocks of at most
    ``fs_base_threshold`` nodes are fully connected. A final pass gives any
    stranded non-final node an edge to its successor.
    """
    if expander_degree < 1:
        raise InvalidDegree("expander degree must be >= 1")
    if not 0.0 < fs_decay_ratio < 1.0:
        raise ValueError("fs_decay_ratio must lie in (0, 1)")
    stream = _stream(seed).child(_FS)
    parts = [_self_edges(n)]
    _fs_parts(0, n, int(expander_degree), fs_decay_ratio, int(fs_base_threshold), stream, 0, parts)
    g = _assemble(n, parts)
    stranded = [i for i in validate(g).sinks if i != n - 1]
    if stranded:
        extra = np.asarray(stranded, dtype=np.int64)
        g = _assemble(n, [(g.src, g.dst), (extra, extra + 1)])
    return g


def fs_top_level_blocks(n: int) -> list[tuple[int, int]]:
    """(start, size) of the top-level FS blocks for ``n`` nodes."""
    blocks = ceil_log2(n)
    if blocks < 2:
        return [(0, n)]
    out, start = [], 0
    for s in block_sizes(n, blocks):
        out.append((start, s))
        start += s
    return out
