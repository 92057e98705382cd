"""Weighted directed interaction graphs.

Convention: ``A[i, j] > 0`` means agent ``i`` receives the output of
agent ``j`` (information flows ``j -> i``). Edge lists use the same
orientation, ``[i, j, weight]`` with ``i`` the receiving node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

ZERO_EIG_RTOL = 1e-9
MAX_GENERATION_ATTEMPTS = 1000


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class DirectedGraph:
    adjacency: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.adjacency, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise GraphError(f"adjacency must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise GraphError("adjacency has non-finite entries")
        if np.any(a < 0):
            raise GraphError("adjacency weights must be nonnegative")
        if np.any(np.diag(a) != 0):
            raise GraphError("adjacency diagonal must be zero")
        a.setflags(write=False)
        object.__setattr__(self, "adjacency", a)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]]) -> "DirectedGraph":
        a = np.zeros((n, n))
        for edge in edges:
            if len(edge) != 3:
                raise GraphError(f"edge must be [i, j, weight], got {edge!r}")
            i, j, w = edge
            if int(i) != i or int(j) != j:
                raise GraphError(f"edge indices must be integers, got {edge!r}")
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise GraphError(f"edge {edge!r} out of range for n={n}")
            if i == j:
                raise GraphError(f"self loop on node {i}")
            a[i, j] = float(w)
        return cls(a)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def edges(self) -> list[list]:
        ii, jj = np.nonzero(self.adjacency)
        return [[int(i), int(j), float(self.adjacency[i, j])] for i, j in zip(ii, jj)]

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        """``(j, a_ij)`` pairs of agents that ``i`` listens to."""
        row = self.adjacency[i]
        return [(int(j), float(row[j])) for j in np.nonzero(row)[0]]

    def to_dict(self) -> dict:
        return {"n": self.n, "edges": self.edges()}

    @classmethod
    def from_dict(cls, data: dict) -> "DirectedGraph":
        try:
            n = data["n"]
            edges = data["edges"]
        except (KeyError, TypeError) as exc:
            raise GraphError(f"graph needs 'n' and 'edges': {exc}") from None
        if not isinstance(n, int) or n < 1:
            raise GraphError(f"graph 'n' must be a positive integer, got {n!r}")
        return cls.from_edges(n, edges)


def laplacian(g: DirectedGraph) -> np.ndarray:
    """``L = Delta - A`` with ``Delta_ii = sum_j a_ij``."""
    a = g.adjacency
    return np.diag(a.sum(axis=1)) - a


def zero_tolerance(lap: np.ndarray) -> float:
    return ZERO_EIG_RTOL * max(1.0, float(np.abs(lap).sum(axis=1).max(initial=0.0)))


def spanning_tree_spectrum(g: DirectedGraph) -> tuple[np.ndarray, bool]:
    """Laplacian eigenvalues and the spanning-tree verdict they imply."""
    lap = laplacian(g)
    eig = np.linalg.eigvals(lap)
    tol = zero_tolerance(lap)
    zero = np.abs(eig) < tol
    verdict = int(zero.sum()) == 1 and bool(np.all(eig.real[~zero] > tol))
    return eig, verdict


def has_directed_spanning_tree(g: DirectedGraph) -> bool:
    """One zero Laplacian eigenvalue, every other with positive real part."""
    return spanning_tree_spectrum(g)[1]


def tree_transform(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Matrices of ``z_i = y_1 - y_(i+1)`` and its inverse ``y = 1 y_1 + W z``."""
    if n < 2:
        raise GraphError("tree transform needs at least two nodes")
    u = np.zeros((n - 1, n), dtype=np.int64)
    u[:, 0] = 1
    u[:, 1:] = -np.eye(n - 1, dtype=np.int64)
    w = np.zeros((n, n - 1), dtype=np.int64)
    w[1:, :] = -np.eye(n - 1, dtype=np.int64)
    return u, w


def reduced_error_matrix(g: DirectedGraph) -> np.ndarray:
    """``U L W``; the disagreement ``z`` evolves as ``z_dot = -U L W z``."""
    u, w = tree_transform(g.n)
    return u @ laplacian(g) @ w


def random_spanning_tree_graph(n: int, seed: int | None = None,
                               rng: np.random.Generator | None = None) -> DirectedGraph:
    """Dense random weights in (0, 1), redrawn until the spectrum shows a spanning tree."""
    if n < 2:
        raise GraphError("need at least two nodes")
    if rng is None:
        rng = np.random.default_rng(seed)
    for _ in range(MAX_GENERATION_ATTEMPTS):
        # uniform on the open interval: reject exact zeros
        a = rng.random((n, n))
        a[a == 0.0] = 0.5
        np.fill_diagonal(a, 0.0)
        g = DirectedGraph(a)
        if has_directed_spanning_tree(g):
            return g
    raise GraphError(f"no spanning-tree graph after {MAX_GENERATION_ATTEMPTS} attempts")


def circle_topology() -> DirectedGraph:
    """Five nodes: 1<->4, 1->2, 2->3, 3->5, 4->5 (1-based), unit weights."""
    edges = [[3, 0, 1.0], [0, 3, 1.0], [1, 0, 1.0], [2, 1, 1.0], [4, 2, 1.0], [4, 3, 1.0]]
    return DirectedGraph.from_edges(5, edges)


def leader_box_topology(weight: float = 0.5) -> DirectedGraph:
    """Robots 1 <-> 2, leader 3 -> robot 1."""
    edges = [[0, 1, weight], [1, 0, weight], [0, 2, weight]]
    return DirectedGraph.from_edges(3, edges)
