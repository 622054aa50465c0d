"""Undirected weighted factor graphs and their shift operators.

Vertices are 0-based in memory. File formats (see :mod:`prodgraph.io`) are
1-based and converted at the boundary.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidInputError, InvalidParameterError

SYMMETRY_TOL = 1e-12


class ShiftKind(str, enum.Enum):
    ADJACENCY = "adjacency"
    LAPLACIAN = "laplacian"


@dataclass(frozen=True)
class Graph:
    """Undirected graph with strictly positive edge weights.

    ``edges`` holds ``(i, j, w)`` triples with ``0 <= i < j < n``; each triple
    stands for both directions.
    """

    n: int
    edges: tuple[tuple[int, int, float], ...] = ()
    _lookup: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameterError(f"vertex count must be a positive integer, got {self.n}")
        lookup = {}
        clean = []
        for e in self.edges:
            i, j, w = int(e[0]), int(e[1]), float(e[2])
            if i == j:
                raise InvalidInputError(f"self-loop at vertex {i}")
            if i > j:
                i, j = j, i
            if i < 0 or j >= self.n:
                raise InvalidInputError(f"edge ({i}, {j}) out of range for n={self.n}")
            if not w > 0 or not np.isfinite(w):
                raise InvalidInputError(f"edge ({i}, {j}) has non-positive weight {w}")
            if (i, j) in lookup:
                raise InvalidInputError(f"duplicate edge ({i}, {j})")
            lookup[(i, j)] = w
            clean.append((i, j, w))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "edges", tuple(sorted(clean)))
        object.__setattr__(self, "_lookup", lookup)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def weight(self, i: int, j: int) -> float:
        """Edge weight between ``i`` and ``j`` (0.0 when not adjacent)."""
        if i > j:
            i, j = j, i
        return self._lookup.get((i, j), 0.0)

    def neighbors(self, i: int) -> list[int]:
        out = [b for a, b, _ in self.edges if a == i]
        out += [a for a, b, _ in self.edges if b == i]
        return sorted(out)


@dataclass(frozen=True, eq=False)
class ShiftOperator:
    """Dense symmetric graph-shift matrix tagged with its kind."""

    values: np.ndarray
    kind: ShiftKind

    def __post_init__(self):
        S = np.array(self.values, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise InvalidInputError(f"shift operator must be square, got shape {S.shape}")
        if not np.allclose(S, S.T, rtol=0.0, atol=SYMMETRY_TOL):
            raise InvalidInputError("shift operator is not symmetric")
        S.setflags(write=False)
        object.__setattr__(self, "values", S)
        object.__setattr__(self, "kind", ShiftKind(self.kind))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def adjacency(g: Graph) -> ShiftOperator:
    A = np.zeros((g.n, g.n))
    for i, j, w in g.edges:
        A[i, j] = A[j, i] = w
    return ShiftOperator(A, ShiftKind.ADJACENCY)


def degree_vector(g: Graph) -> np.ndarray:
    d = np.zeros(g.n)
    for i, j, w in g.edges:
        d[i] += w
        d[j] += w
    return d


def laplacian(g: Graph) -> ShiftOperator:
    """Combinatorial Laplacian ``D - A``."""
    A = adjacency(g).values
    return ShiftOperator(np.diag(A.sum(axis=1)) - A, ShiftKind.LAPLACIAN)


def shift_operator(g: Graph, kind) -> ShiftOperator:
    kind = ShiftKind(kind)
    return laplacian(g) if kind is ShiftKind.LAPLACIAN else adjacency(g)


def build_cycle_graph(n: int) -> Graph:
    if n < 3:
        raise InvalidParameterError(f"a cycle graph needs n >= 3, got {n}")
    edges = [(i, i + 1, 1.0) for i in range(n - 1)]
    edges.append((0, n - 1, 1.0))
    return Graph(n, tuple(edges))


def knn_indices(points, k: int, metric: str = "euclidean") -> np.ndarray:
    """Indices of the ``k`` nearest neighbours of every point.

    Equal distances are resolved in favour of the lowest candidate index.
    """
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.ndim != 2:
        raise InvalidInputError("points must be a list of equal-length feature vectors")
    m = P.shape[0]
    if k < 1 or k >= m:
        raise InvalidParameterError(f"need 1 <= k < m, got k={k}, m={m}")
    if metric == "cosine":
        norms = np.linalg.norm(P, axis=1)
        if np.any(norms == 0):
            bad = int(np.flatnonzero(norms == 0)[0])
            raise InvalidInputError(f"zero-norm feature vector at row {bad} under cosine metric")
    elif metric != "euclidean":
        raise InvalidParameterError(f"unknown metric {metric!r}")
    D = cdist(P, P, metric=metric)
    np.fill_diagonal(D, np.inf)
    # stable sort keeps the lowest index first among equal distances
    return np.argsort(D, axis=1, kind="stable")[:, :k]


def build_knn_graph(points, k: int, metric: str = "euclidean") -> Graph:
    """Unweighted k-NN graph, symmetrized by union."""
    nbrs = knn_indices(points, k, metric)
    pairs = set()
    for i, row in enumerate(nbrs):
        for j in row:
            j = int(j)
            pairs.add((min(i, j), max(i, j)))
    return Graph(len(nbrs), tuple((i, j, 1.0) for i, j in sorted(pairs)))
