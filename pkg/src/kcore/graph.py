"""Undirected simple graphs in compressed (CSR) layout, loaded from SNAP edge lists."""

from __future__ import annotations

import gzip
import io
import os
from dataclasses import dataclass
from typing import BinaryIO, Iterable

import numpy as np
import pandas as pd

NODE_DTYPE = np.int32
OFFSET_DTYPE = np.int64

_GZIP_MAGIC = b"\x1f\x8b"


class EdgeListError(ValueError):
    """Raised when an edge list contains a malformed line."""

    def __init__(self, lineno: int, line: str, reason: str):
        self.lineno = lineno
        self.line = line
        super().__init__(f"line {lineno}: {reason}: {line!r}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph.

    ``neighbors[offsets[u]:offsets[u+1]]`` is the strictly increasing neighbor
    list of node ``u``. ``labels[u]`` is the id ``u`` had in the source file.
    """

    offsets: np.ndarray
    neighbors: np.ndarray
    labels: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.offsets) - 1

    @property
    def edge_count(self) -> int:
        return len(self.neighbors) // 2

    def __len__(self) -> int:
        return self.node_count

    def __repr__(self) -> str:
        return f"Graph(nodes={self.node_count}, edges={self.edge_count})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            np.array_equal(self.offsets, other.offsets)
            and np.array_equal(self.neighbors, other.neighbors)
            and np.array_equal(self.labels, other.labels)
        )

    def _check(self, u: int) -> None:
        if not 0 <= u < self.node_count:
            raise IndexError(f"node {u} out of range [0, {self.node_count})")

    def degree(self, u: int) -> int:
        self._check(u)
        return int(self.offsets[u + 1] - self.offsets[u])

    def degrees(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.node_count else 0

    def neighbors_of(self, u: int) -> np.ndarray:
        """Read-only sorted view of the neighbors of ``u``."""
        self._check(u)
        return self.neighbors[self.offsets[u] : self.offsets[u + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        """Membership by binary search on the sorted neighbor slice."""
        nbrs = self.neighbors_of(u)
        i = np.searchsorted(nbrs, v)
        return bool(i < len(nbrs) and nbrs[i] == v)

    def edges(self) -> np.ndarray:
        """Each undirected edge once, as rows ``(u, v)`` with ``u < v``."""
        src = np.repeat(np.arange(self.node_count, dtype=NODE_DTYPE), self.degrees())
        keep = src < self.neighbors
        return np.column_stack((src[keep], self.neighbors[keep]))

    def check_invariants(self) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        n = self.node_count
        assert self.offsets[0] == 0
        assert self.offsets[-1] == len(self.neighbors)
        assert len(self.neighbors) % 2 == 0
        assert np.all(np.diff(self.offsets) >= 0)
        if n == 0:
            return
        src = np.repeat(np.arange(n, dtype=np.int64), self.degrees())
        dst = self.neighbors.astype(np.int64)
        assert np.all((dst >= 0) & (dst < n)), "neighbor id out of range"
        assert not np.any(src == dst), "self-loop"
        # strictly increasing within each slice: consecutive entries of the same
        # row must increase
        same_row = src[1:] == src[:-1]
        assert np.all(dst[1:][same_row] > dst[:-1][same_row]), "unsorted or duplicate neighbors"
        fwd = np.sort(src * n + dst)
        bwd = np.sort(dst * n + src)
        assert np.array_equal(fwd, bwd), "asymmetric adjacency"

    @classmethod
    def from_edges(cls, edges: Iterable, labels: Iterable | None = None) -> "Graph":
        """Build from ``(u, v)`` pairs of original ids.

        Self-loops and duplicate edges are dropped; direction is ignored. Ids
        that only occur in self-loops still become (isolated) nodes. When
        ``labels`` is given, those ids are nodes too even without edges.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        arr = arr.reshape(-1, 2)
        extra = None if labels is None else np.asarray(list(labels), dtype=np.int64)
        return _build(arr[:, 0], arr[:, 1], extra)

    @classmethod
    def empty(cls) -> "Graph":
        return _build(np.empty(0, np.int64), np.empty(0, np.int64))


def _build(src: np.ndarray, dst: np.ndarray, extra_labels: np.ndarray | None = None) -> Graph:
    ids = np.concatenate((src, dst)) if extra_labels is None else np.concatenate((src, dst, extra_labels))
    labels, inverse = np.unique(ids, return_inverse=True)
    n = len(labels)
    m_in = len(src)
    u = inverse[:m_in].astype(np.int64)
    v = inverse[m_in : 2 * m_in].astype(np.int64)

    loop = u == v
    u, v = u[~loop], v[~loop]
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    keys = np.unique(lo * n + hi)
    lo, hi = keys // n, keys % n

    rows = np.concatenate((lo, hi))
    cols = np.concatenate((hi, lo))
    order = np.argsort(rows * n + cols, kind="stable")
    neighbors = cols[order].astype(NODE_DTYPE)
    counts = np.bincount(rows, minlength=n)
    offsets = np.zeros(n + 1, dtype=OFFSET_DTYPE)
    np.cumsum(counts, out=offsets[1:])
    return Graph(_frozen(offsets), _frozen(neighbors), _frozen(labels.astype(np.int64)))


def _open_bytes(source) -> bytes:
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            data = fh.read()
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if data[:2] == _GZIP_MAGIC:
        data = gzip.decompress(data)
    return data


def _locate_error(data: bytes) -> EdgeListError:
    for lineno, raw in enumerate(data.decode("utf-8", errors="replace").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            return EdgeListError(lineno, raw, f"expected 2 ids, got {len(parts)} fields")
        for tok in parts:
            try:
                int(tok)
            except ValueError:
                return EdgeListError(lineno, raw, f"invalid node id {tok!r}")
    return EdgeListError(0, "", "unparseable edge list")


def parse_edge_pairs(source: str | os.PathLike | bytes | BinaryIO) -> np.ndarray:
    """Return the raw ``(src, dst)`` id pairs of an edge list as an ``(m, 2)`` array."""
    data = _open_bytes(source)
    if not data.strip():
        return np.empty((0, 2), dtype=np.int64)
    try:
        frame = pd.read_csv(
            io.BytesIO(data),
            sep=r"\s+",
            comment="#",
            header=None,
            dtype=np.int64,
            engine="c",
        )
    except pd.errors.EmptyDataError:
        return np.empty((0, 2), dtype=np.int64)
    except (ValueError, pd.errors.ParserError, OverflowError):
        raise _locate_error(data) from None
    if frame.shape[1] != 2:
        raise _locate_error(data)
    return frame.to_numpy(dtype=np.int64)


def load_edge_list(source: str | os.PathLike | bytes | BinaryIO) -> Graph:
    """Load a SNAP-style edge list (optionally gzipped) as an undirected simple graph.

    Lines starting with ``#`` are comments. Each other line holds two integer
    ids separated by whitespace. Original ids are densified in ascending
    order; ``Graph.labels`` maps back.
    """
    pairs = parse_edge_pairs(source)
    return _build(pairs[:, 0], pairs[:, 1])


def write_edge_list(g: Graph, dest: str | os.PathLike | BinaryIO) -> None:
    """Write ``g`` as a SNAP edge list using original ids, one line per undirected edge."""
    buf = io.BytesIO()
    buf.write(f"# Nodes: {g.node_count} Edges: {g.edge_count}\n".encode())
    np.savetxt(buf, g.labels[g.edges()], fmt="%d", delimiter="\t")
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "wb") as fh:
            fh.write(buf.getvalue())
    else:
        dest.write(buf.getvalue())


def degree(g: Graph, u: int) -> int:
    return g.degree(u)


def neighbors(g: Graph, u: int) -> np.ndarray:
    return g.neighbors_of(u)
