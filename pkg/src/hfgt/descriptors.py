"""Network descriptors for capability graphs.

Every function accepts a square `BoolMatrix`, `RealMatrix` or 2-D array.
Distances and triangle counts treat the graph as unweighted; the spectral
measures use entry values.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .boolmat import BoolMatrix, DimensionError, RealMatrix


class ConvergenceError(RuntimeError):
    pass


@dataclass
class MetricReport:
    metric: str
    values: dict
    params: dict = field(default_factory=dict)
    scalar: Optional[float] = None

    @property
    def n_nodes(self) -> int:
        return len(next(iter(self.values.values()))) if self.values else 0


def _dense(A) -> np.ndarray:
    if isinstance(A, (BoolMatrix, RealMatrix)):
        a = A.to_dense().astype(float)
    else:
        a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"adjacency must be square, got shape {a.shape}")
    return a


def _pattern(A) -> np.ndarray:
    return (_dense(A) != 0).astype(np.int64)


def degree(A, direction: str = "both") -> MetricReport:
    """In-degree (column sums) and out-degree (row sums); self-loops count once each way."""
    a = _pattern(A)
    values = {}
    if direction in ("in", "both"):
        values["in_degree"] = a.sum(axis=0)
    if direction in ("out", "both"):
        values["out_degree"] = a.sum(axis=1)
    if not values:
        raise ValueError(f"unknown direction {direction!r}")
    return MetricReport("degree", values, {"direction": direction})


def bfs_distances(A) -> np.ndarray:
    """All-pairs hop distances along edge direction; -1 where unreachable."""
    a = _pattern(A)
    n = a.shape[0]
    succ = [np.flatnonzero(a[i]) for i in range(n)]
    dist = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        dist[s, s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in succ[u]:
                if dist[s, v] < 0:
                    dist[s, v] = dist[s, u] + 1
                    queue.append(v)
    return dist


def closeness(A, variant: str = "harmonic") -> MetricReport:
    """Out-closeness of every node.

    ``harmonic`` sums 1/d over reachable nodes. ``classic`` divides the
    number of reachable nodes by the sum of their distances. Nodes that
    reach nothing score 0 in both.
    """
    dist = bfs_distances(A)
    n = dist.shape[0]
    off = ~np.eye(n, dtype=bool)
    reach = (dist > 0) & off
    if variant == "harmonic":
        vals = np.where(reach, 1.0 / np.where(reach, dist, 1), 0.0).sum(axis=1)
    elif variant == "classic":
        total = np.where(reach, dist, 0).sum(axis=1)
        count = reach.sum(axis=1)
        vals = np.divide(count, total, out=np.zeros(n), where=total > 0)
    else:
        raise ValueError(f"unknown closeness variant {variant!r}")
    return MetricReport("closeness", {f"closeness_{variant}": vals}, {"variant": variant})


def _acyclic(a: np.ndarray) -> bool:
    """Kahn's algorithm on the nonzero pattern; self-loops count as cycles."""
    p = a != 0
    indeg = p.sum(axis=0)
    queue = deque(np.flatnonzero(indeg == 0).tolist())
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for v in np.flatnonzero(p[u]):
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return seen == a.shape[0]


def eigenvector_centrality(A, tol: float = 1e-13, max_iter: int = 20000) -> MetricReport:
    """Dominant left eigenvector: x_j proportional to sum_i A_ij x_i.

    Power iteration on A^T + sI, with s the largest entry magnitude, so
    periodic graphs still converge. The result is nonnegative with unit
    L2 norm.
    """
    a = _dense(A)
    n = a.shape[0]
    if n == 0:
        return MetricReport("eigenvector", {"eigenvector": np.zeros(0)}, {"tol": tol})
    if _acyclic(a):
        raise ConvergenceError("graph has no cycles, so every eigenvalue is 0 and the centrality is undefined")
    shift = float(np.abs(a).max())
    M = a.T + shift * np.eye(n)
    x = np.full(n, 1.0 / np.sqrt(n))
    for it in range(1, max_iter + 1):
        y = M @ x
        norm = np.linalg.norm(y)
        if norm == 0:
            raise ConvergenceError("iteration collapsed to the zero vector")
        y /= norm
        if np.abs(y - x).max() < tol:
            return MetricReport("eigenvector", {"eigenvector": y},
                                {"tol": tol, "max_iter": max_iter, "iterations": it})
        x = y
    raise ConvergenceError(f"no convergence within {max_iter} iterations")


def spectral_radius(A) -> float:
    a = _dense(A)
    return float(np.abs(np.linalg.eigvals(a)).max()) if a.size else 0.0


def katz_centrality(A, alpha: float = 0.1, beta: float = 1.0, direction: str = "out",
                    tol: float = 1e-13, max_iter: int = 20000) -> MetricReport:
    """Fixed point of x = alpha * B x + beta * 1.

    With ``direction="out"`` B = A, so a node is credited for the walks that
    leave it; ``"in"`` uses A^T. Requires alpha < 1 / spectral radius.
    """
    a = _dense(A)
    if direction == "out":
        B = a
    elif direction == "in":
        B = a.T
    else:
        raise ValueError(f"unknown direction {direction!r}")
    rho = spectral_radius(a)
    if alpha <= 0 or (rho > 0 and alpha * rho >= 1 - 1e-12):
        raise ValueError(f"alpha={alpha} must lie in (0, 1/{rho:.6g})")
    n = a.shape[0]
    x = np.zeros(n)
    for it in range(1, max_iter + 1):
        y = alpha * (B @ x) + beta
        if np.abs(y - x).max() < tol * max(1.0, np.abs(y).max()):
            return MetricReport("katz", {"katz": y},
                                {"alpha": alpha, "beta": beta, "direction": direction, "iterations": it})
        x = y
    raise ConvergenceError(f"no convergence within {max_iter} iterations")


def clustering_directed(A) -> MetricReport:
    """Directed clustering per triangle pattern; self-loops are ignored."""
    a = _pattern(A).astype(float)
    np.fill_diagonal(a, 0)
    at = a.T
    a2 = a @ a
    d_in, d_out = a.sum(axis=0), a.sum(axis=1)
    d_tot, d_bil = d_in + d_out, np.diag(a2)
    s = a + at
    counts = {
        "cycle": (np.diag(a2 @ a), d_in * d_out - d_bil),
        "middleman": (np.diag(a @ at @ a), d_in * d_out - d_bil),
        "in": (np.diag(at @ a2), d_in * (d_in - 1)),
        "out": (np.diag(a2 @ at), d_out * (d_out - 1)),
        "total": (np.diag(s @ s @ s), 2 * (d_tot * (d_tot - 1) - 2 * d_bil)),
    }
    values = {f"clustering_{k}": np.divide(num, den, out=np.zeros_like(num), where=den > 0)
              for k, (num, den) in counts.items()}
    return MetricReport("clustering", values)


def _check_partition(n: int, partition: Sequence) -> list:
    labels = list(partition)
    if len(labels) != n or any(p is None for p in labels):
        raise ValueError(f"partition must label all {n} nodes")
    return labels


@dataclass
class DSMReport:
    blocks: list
    order: np.ndarray
    matrix: np.ndarray
    block_edges: np.ndarray
    intra_edges: int
    inter_edges: int


def capability_dsm(A, partition: Sequence) -> DSMReport:
    """Reorder the adjacency by block and count edges between blocks."""
    a = _pattern(A)
    labels = _check_partition(a.shape[0], partition)
    blocks = sorted(set(labels), key=str)
    pos = {b: k for k, b in enumerate(blocks)}
    code = np.array([pos[p] for p in labels], dtype=np.int64)
    order = np.argsort(code, kind="stable")
    be = np.zeros((len(blocks), len(blocks)), dtype=np.int64)
    r, c = np.nonzero(a)
    np.add.at(be, (code[r], code[c]), 1)
    intra = int(np.trace(be))
    return DSMReport(blocks, order, a[np.ix_(order, order)], be, intra, int(be.sum()) - intra)


def modularity(A, partition: Sequence) -> float:
    """Directed modularity of a fixed partition under the out/in-degree null model; 0 without edges."""
    a = _pattern(A).astype(float)
    labels = _check_partition(a.shape[0], partition)
    m = a.sum()
    if m == 0:
        return 0.0
    same = np.equal.outer(np.array(labels, dtype=object), np.array(labels, dtype=object))
    expected = np.outer(a.sum(axis=1), a.sum(axis=0)) / m
    return float(((a - expected) * same).sum() / m)


METRICS = {
    "degree": degree,
    "closeness": closeness,
    "eigenvector": eigenvector_centrality,
    "katz": katz_centrality,
    "clustering": clustering_directed,
}
