"""Weighted undirected graphs in G-set form, with exact cut/energy arithmetic.

Cut values and Ising energies are tied by the identity

    2 * cut_value(g, s) + ising_energy(g, s) == g.total_weight

which holds exactly because everything is integer arithmetic (int64
accumulators; G-set weights are small signed integers).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class GsetParseError(GraphError):
    """Malformed G-set text; carries the 1-based offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable weighted undirected graph.

    Adjacency is stored in CSR layout (``indptr``/``nbr_index``/``nbr_weight``)
    with every undirected edge present in both endpoint rows; the raw edge
    arrays keep u < v, 0-based. All arrays are marked read-only so a Graph
    can be shared freely across worker threads.
    """

    n: int
    m: int
    total_weight: int
    edge_u: np.ndarray
    edge_v: np.ndarray
    edge_w: np.ndarray
    indptr: np.ndarray
    nbr_index: np.ndarray
    nbr_weight: np.ndarray
    # largest per-node sum of |w|; bounds |delta_H| / 2 for any single flip
    max_abs_local: int = field(default=0)

    @staticmethod
    def from_edges(n: int, edges: Iterable[tuple[int, int, int]]) -> "Graph":
        """Build a graph from 0-based (u, v, w) triples.

        Rejects self-loops, duplicate undirected edges and out-of-range
        endpoints. Edge order is preserved (with u < v normalization).
        """
        if n < 1:
            raise GraphError(f"node count must be positive, got {n}")
        eu, ev, ew = [], [], []
        seen: set[int] = set()
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"endpoint out of range: ({u}, {v}) with n={n}")
            if u == v:
                raise GraphError(f"self-loop at node {u}")
            if u > v:
                u, v = v, u
            key = u * n + v
            if key in seen:
                raise GraphError(f"duplicate edge ({u}, {v})")
            seen.add(key)
            eu.append(u)
            ev.append(v)
            ew.append(int(w))
        m = len(eu)
        edge_u = np.asarray(eu, dtype=np.int32)
        edge_v = np.asarray(ev, dtype=np.int32)
        edge_w = np.asarray(ew, dtype=np.int64)

        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, edge_u, 1)
        np.add.at(deg, edge_v, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=indptr[1:])
        nbr_index = np.zeros(2 * m, dtype=np.int32)
        nbr_weight = np.zeros(2 * m, dtype=np.int64)
        cursor = indptr[:-1].copy()
        for u, v, w in zip(eu, ev, ew):
            nbr_index[cursor[u]] = v
            nbr_weight[cursor[u]] = w
            cursor[u] += 1
            nbr_index[cursor[v]] = u
            nbr_weight[cursor[v]] = w
            cursor[v] += 1

        abs_local = np.zeros(n, dtype=np.int64)
        np.add.at(abs_local, edge_u, np.abs(edge_w))
        np.add.at(abs_local, edge_v, np.abs(edge_w))

        for arr in (edge_u, edge_v, edge_w, indptr, nbr_index, nbr_weight):
            arr.setflags(write=False)
        return Graph(
            n=n,
            m=m,
            total_weight=int(edge_w.sum()),
            edge_u=edge_u,
            edge_v=edge_v,
            edge_w=edge_w,
            indptr=indptr,
            nbr_index=nbr_index,
            nbr_weight=nbr_weight,
            max_abs_local=int(abs_local.max()) if n else 0,
        )

    @property
    def edge_list(self) -> list[tuple[int, int, int]]:
        return [
            (int(u), int(v), int(w))
            for u, v, w in zip(self.edge_u, self.edge_v, self.edge_w)
        ]

    @property
    def adjacency(self) -> list[list[tuple[int, int]]]:
        """Per-node list of (neighbor, weight) pairs (materialized on demand)."""
        return [
            [
                (int(self.nbr_index[k]), int(self.nbr_weight[k]))
                for k in range(self.indptr[i], self.indptr[i + 1])
            ]
            for i in range(self.n)
        ]

    def degree(self, i: int) -> int:
        return int(self.indptr[i + 1] - self.indptr[i])


def parse_gset(text: str) -> Graph:
    """Parse G-set text: header ``n m``, then m lines ``u v w`` (1-based).

    Accepts LF or CRLF endings and blank lines; everything else is an error
    reported with its line number.
    """
    if not text or not text.strip():
        raise GsetParseError("empty input")
    lines = text.splitlines()
    header_idx = None
    for idx, raw in enumerate(lines):
        if raw.strip():
            header_idx = idx
            break
    assert header_idx is not None
    header = lines[header_idx].split()
    if len(header) != 2:
        raise GsetParseError(
            f"header must be two integers 'n m', got {lines[header_idx]!r}",
            line=header_idx + 1,
        )
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise GsetParseError(
            f"header must be two integers 'n m', got {lines[header_idx]!r}",
            line=header_idx + 1,
        ) from None
    if n < 1:
        raise GsetParseError(f"node count must be positive, got {n}", line=header_idx + 1)
    if m < 0:
        raise GsetParseError(f"edge count must be non-negative, got {m}", line=header_idx + 1)

    edges: list[tuple[int, int, int]] = []
    seen: set[int] = set()
    for idx in range(header_idx + 1, len(lines)):
        raw = lines[idx]
        if not raw.strip():
            continue
        lineno = idx + 1
        parts = raw.split()
        if len(parts) != 3:
            raise GsetParseError(f"expected 'u v w', got {raw!r}", line=lineno)
        try:
            u1, v1, w = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise GsetParseError(f"non-integer field in {raw!r}", line=lineno) from None
        if not (1 <= u1 <= n) or not (1 <= v1 <= n):
            raise GsetParseError(
                f"endpoint out of range [1, {n}]: ({u1}, {v1})", line=lineno
            )
        if u1 == v1:
            raise GsetParseError(f"self-loop at node {u1}", line=lineno)
        u, v = u1 - 1, v1 - 1
        if u > v:
            u, v = v, u
        key = u * n + v
        if key in seen:
            raise GsetParseError(f"duplicate edge ({u1}, {v1})", line=lineno)
        seen.add(key)
        edges.append((u, v, w))
        if len(edges) > m:
            raise GsetParseError(
                f"more than the declared {m} edge lines", line=lineno
            )
    if len(edges) != m:
        raise GsetParseError(f"header declares {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def serialize_gset(g: Graph) -> str:
    """Inverse of parse_gset (1-based endpoints, LF endings)."""
    out = [f"{g.n} {g.m}"]
    for u, v, w in zip(g.edge_u, g.edge_v, g.edge_w):
        out.append(f"{u + 1} {v + 1} {w}")
    return "\n".join(out) + "\n"


def as_spins(values: Sequence[int] | np.ndarray, n: int | None = None) -> np.ndarray:
    """Validate and convert to an int8 spin vector over {-1, +1}."""
    s = np.asarray(values, dtype=np.int8)
    if s.ndim != 1:
        raise GraphError(f"spin configuration must be 1-D, got shape {s.shape}")
    if n is not None and s.shape[0] != n:
        raise GraphError(f"expected {n} spins, got {s.shape[0]}")
    if not np.all(np.abs(s) == 1):
        bad = np.flatnonzero(np.abs(s) != 1)[0]
        raise GraphError(f"spin {bad} is {values[bad]}, must be -1 or +1")
    return s


def _check_length(g: Graph, s: np.ndarray) -> None:
    if s.shape[0] != g.n:
        raise GraphError(f"configuration has {s.shape[0]} spins, graph has {g.n} nodes")


def cut_value(g: Graph, s: np.ndarray) -> int:
    """Total weight of edges whose endpoints carry opposite spins."""
    _check_length(g, s)
    crossed = s[g.edge_u] != s[g.edge_v]
    return int(g.edge_w[crossed].sum())


def ising_energy(g: Graph, s: np.ndarray) -> int:
    """H(s) = sum over edges of w * s_u * s_v (exact integer)."""
    _check_length(g, s)
    return int((g.edge_w * (s[g.edge_u] * s[g.edge_v])).sum())


def flip_delta(g: Graph, s: np.ndarray, i: int) -> int:
    """Energy change from flipping spin i: -2 * s_i * sum_j w_ij * s_j."""
    _check_length(g, s)
    if not (0 <= i < g.n):
        raise GraphError(f"node index {i} out of range [0, {g.n})")
    lo, hi = g.indptr[i], g.indptr[i + 1]
    local = int(np.dot(g.nbr_weight[lo:hi], s[g.nbr_index[lo:hi]]))
    return -2 * int(s[i]) * local


def cut_from_energy(g: Graph, h: int) -> int:
    """Recover the cut from an Ising energy via cut = (W - H) / 2."""
    diff = g.total_weight - h
    if diff % 2 != 0:
        raise GraphError(
            f"parity violation: total_weight={g.total_weight} and H={h} "
            "cannot come from the same graph"
        )
    return diff // 2
