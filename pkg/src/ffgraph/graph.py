"""Validated feedforward graphs over ordered nodes ``0..n-1``.

Edges are stored as two parallel int64 arrays sorted lexicographically by
``(src, dst)``. That order doubles as a CSR layout of the out-adjacency, so
per-step metric iteration is O(m) without a dense matrix. The in-adjacency
view is built lazily on first use.

Adjacency convention for dense views: ``A[i, j] == 1`` iff ``(j, i)`` is an
edge (row = receiver, column = sender), so every matrix derived from a
feedforward graph is lower triangular.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import BackwardEdge, OutOfRange, ParseError


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


class FeedforwardGraph:
    """Immutable feedforward graph. Build it with :func:`build_graph`."""

    __slots__ = ("n", "src", "dst", "_out_indptr", "_cache")

    def __init__(self, n: int, src: np.ndarray, dst: np.ndarray):
        # trusted constructor: src/dst already canonical (sorted, unique, forward)
        self.n = int(n)
        self.src = _readonly(np.asarray(src, dtype=np.int64))
        self.dst = _readonly(np.asarray(dst, dtype=np.int64))
        counts = np.bincount(self.src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        self._out_indptr = _readonly(indptr)
        self._cache = {}

    # -- sizes and degrees -------------------------------------------------

    @property
    def num_edges(self) -> int:
        return int(self.src.shape[0])

    @property
    def sink(self) -> int:
        return self.n - 1

    @property
    def out_indptr(self) -> np.ndarray:
        return self._out_indptr

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._out_indptr)

    def in_degrees(self) -> np.ndarray:
        if "indeg" not in self._cache:
            self._cache["indeg"] = _readonly(np.bincount(self.dst, minlength=self.n))
        return self._cache["indeg"]

    def _check(self, i: int) -> int:
        i = int(i)
        if not 0 <= i < self.n:
            raise OutOfRange(f"node {i} not in [0, {self.n})")
        return i

    def out_degree(self, i: int) -> int:
        i = self._check(i)
        return int(self._out_indptr[i + 1] - self._out_indptr[i])

    def in_degree(self, i: int) -> int:
        return int(self.in_degrees()[self._check(i)])

    # -- adjacency ---------------------------------------------------------

    def out_neighbors(self, i: int) -> np.ndarray:
        i = self._check(i)
        return self.dst[self._out_indptr[i]:self._out_indptr[i + 1]]

    def _in_csr(self):
        if "in_csr" not in self._cache:
            order = np.argsort(self.dst * self.n + self.src, kind="stable")
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(self.in_degrees(), out=indptr[1:])
            self._cache["in_csr"] = (_readonly(indptr), _readonly(self.src[order]))
        return self._cache["in_csr"]

    def in_neighbors(self, i: int) -> np.ndarray:
        i = self._check(i)
        indptr, srcs = self._in_csr()
        return srcs[indptr[i]:indptr[i + 1]]

    @property
    def out_adj(self) -> list[np.ndarray]:
        return [self.out_neighbors(i) for i in range(self.n)]

    @property
    def in_adj(self) -> list[np.ndarray]:
        return [self.in_neighbors(i) for i in range(self.n)]

    def self_edge_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.src[self.src == self.dst]] = True
        return mask

    def has_edge(self, a: int, b: int) -> bool:
        a, b = self._check(a), self._check(b)
        row = self.out_neighbors(a)
        k = np.searchsorted(row, b)
        return bool(k < row.shape[0] and row[k] == b)

    def edges(self) -> Iterator[tuple[int, int]]:
        return zip(self.src.tolist(), self.dst.tolist())

    def edge_set(self) -> set[tuple[int, int]]:
        return set(self.edges())

    def dense_adjacency(self) -> np.ndarray:
        """``A`` with ``A[i, j] = 1`` iff ``(j, i)`` is an edge."""
        a = np.zeros((self.n, self.n))
        a[self.dst, self.src] = 1.0
        return a

    # -- dunder ------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, FeedforwardGraph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst))

    def __hash__(self):
        return hash((self.n, self.src.tobytes(), self.dst.tobytes()))

    def __repr__(self):
        return f"FeedforwardGraph(n={self.n}, m={self.num_edges})"


def _as_arrays(edges) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(edges, tuple) and len(edges) == 2 and isinstance(edges[0], np.ndarray):
        return np.asarray(edges[0], dtype=np.int64), np.asarray(edges[1], dtype=np.int64)
    arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("edges must be a sequence of (src, dst) pairs")
    return arr[:, 0].copy(), arr[:, 1].copy()


def build_graph(n: int, edges: Iterable[tuple[int, int]] | np.ndarray | tuple) -> FeedforwardGraph:
    """Validate and canonicalize an edge list into a :class:`FeedforwardGraph`.

    ``edges`` may be an iterable of ``(src, dst)`` pairs, an ``(m, 2)`` array,
    or a ``(src_array, dst_array)`` tuple. Duplicates are dropped. Self-edges
    are neither added nor required; :func:`validate` reports on them.

    Raises :class:`OutOfRange` for indices outside ``[0, n)`` and
    :class:`BackwardEdge` for any pair with ``src > dst``.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    src, dst = _as_arrays(edges)
    if src.size:
        bad = (src < 0) | (src >= n) | (dst < 0) | (dst >= n)
        if bad.any():
            k = int(np.argmax(bad))
            raise OutOfRange(f"edge ({src[k]}, {dst[k]}) has an index outside [0, {n})")
        back = src > dst
        if back.any():
            k = int(np.argmax(back))
            raise BackwardEdge(src[k], dst[k])
        key = src * n + dst
        if key.shape[0] > 1 and not np.all(key[1:] > key[:-1]):
            key = np.unique(key)
            src, dst = key // n, key % n
    return FeedforwardGraph(n, src, dst)


def in_degree(g: FeedforwardGraph, i: int) -> int:
    return g.in_degree(i)


def out_degree(g: FeedforwardGraph, i: int) -> int:
    return g.out_degree(i)


@dataclass
class ValidationReport:
    is_feedforward: bool
    has_all_self_edges: bool
    sinks: list[int]
    unique_sink: bool
    zero_indegree_nodes: list[int]
    missing_self_edges: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def validate(g: FeedforwardGraph) -> ValidationReport:
    """Check the self-edge and unique-sink desiderata. Never raises."""
    has_self = g.self_edge_mask()
    # outgoing edges other than the self-edge
    proper_out = g.out_degrees() - has_self.astype(np.int64)
    sinks = np.flatnonzero(proper_out == 0).tolist()
    return ValidationReport(
        is_feedforward=bool(np.all(g.src <= g.dst)),
        has_all_self_edges=bool(has_self.all()),
        sinks=sinks,
        unique_sink=sinks == [g.n - 1],
        zero_indegree_nodes=np.flatnonzero(g.in_degrees() == 0).tolist(),
        missing_self_edges=np.flatnonzero(~has_self).tolist(),
    )


# -- text format --------------------------------------------------------------

def serialize(g: FeedforwardGraph) -> str:
    """``"n m"`` header, then one ``"src dst"`` line per edge in sorted order."""
    lines = [f"{g.n} {g.num_edges}"]
    lines.extend(f"{a} {b}" for a, b in g.edges())
    return "\n".join(lines) + "\n"


def _parse_ints(line: str, lineno: int, what: str) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise ParseError(f"expected two integers for {what}, got {line!r}", line=lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"non-integer {what}: {line!r}", line=lineno) from None


def deserialize(text: str) -> FeedforwardGraph:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input", line=1)
    n, m = _parse_ints(lines[0], 1, "header")
    if n < 1 or m < 0:
        raise ParseError(f"invalid header n={n} m={m}", line=1)
    body = lines[1:]
    # a single trailing blank line is tolerated, nothing else
    while body and not body[-1].strip():
        body.pop()
    if len(body) != m:
        raise ParseError(f"header declares {m} edges, found {len(body)}", line=len(body) + 2)
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    for k, line in enumerate(body):
        a, b = _parse_ints(line, k + 2, "edge")
        if not (0 <= a < n and 0 <= b < n):
            raise ParseError(f"OutOfRange: edge ({a}, {b}) outside [0, {n})", line=k + 2)
        if a > b:
            raise ParseError(f"BackwardEdge: ({a}, {b})", line=k + 2)
        src[k], dst[k] = a, b
    return build_graph(n, (src, dst))


def write_graph(g: FeedforwardGraph, path) -> None:
    Path(path).write_text(serialize(g))


def read_graph(path) -> FeedforwardGraph:
    return deserialize(Path(path).read_text())


# -- image export -------------------------------------------------------------

def adjacency_image(g: FeedforwardGraph) -> np.ndarray:
    """uint8 image, pixel (i, j) is 0 iff (j, i) is an edge, else 255."""
    img = np.full((g.n, g.n), 255, dtype=np.uint8)
    img[g.dst, g.src] = 0
    return img


def export_pgm(g: FeedforwardGraph) -> bytes:
    header = f"P5\n{g.n} {g.n}\n255\n".encode("ascii")
    return header + adjacency_image(g).tobytes()


def write_pgm(g: FeedforwardGraph, path) -> None:
    Path(path).write_bytes(export_pgm(g))
