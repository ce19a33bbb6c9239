"""Euclidean MST (Prim, O(n^2)) and its DFS-order Hamiltonian path."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DuplicatePoints
from .geometry import COINCIDENT_TOL, Point, Polyline, dist


@dataclass(frozen=True)
class PointCloud:
    """Finite point set in R^d with a distinguished root index."""

    points: tuple[Point, ...]
    root: int = 0

    def __post_init__(self):
        if not self.points:
            raise ValueError("empty point set")
        d = len(self.points[0])
        if d < 2:
            raise ValueError("dimension must be at least 2")
        if any(len(p) != d for p in self.points):
            raise ValueError("points have mixed dimensions")
        if not all(math.isfinite(c) for p in self.points for c in p):
            raise ValueError("coordinates must be finite")
        if not 0 <= self.root < len(self.points):
            raise ValueError(f"root index {self.root} out of range")
        dup = _duplicate_pairs(self.points)
        if dup:
            raise DuplicatePoints(dup)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return len(self.points[0])


def _duplicate_pairs(points, tol=COINCIDENT_TOL):
    """Index pairs of points that coincide within tol in every coordinate.

    Squared-distance prefilter via one Gram matrix, exact max-coordinate
    check only on the few candidate pairs.
    """
    arr = np.asarray(points, dtype=float)
    n, d = arr.shape
    pairs = []
    chunk = max(1, int(4e6 // max(n, 1)))
    sq = np.einsum("ij,ij->i", arr, arr)
    thresh = d * tol * tol
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        d2 = sq[lo:hi, None] + sq[None, :] - 2.0 * (arr[lo:hi] @ arr.T)
        ii, jj = np.nonzero(d2 < thresh)
        for i, j in zip(ii + lo, jj):
            if i < j and np.max(np.abs(arr[i] - arr[j])) < tol:
                pairs.append((int(i), int(j)))
    return pairs


@dataclass(frozen=True)
class Tree:
    """Rooted spanning tree: n vertices, n-1 weighted edges."""

    n: int
    edges: tuple[tuple[int, int, float], ...]
    root: int

    @property
    def weight(self) -> float:
        # fsum over sorted weights: equal edge multisets sum to equal floats.
        return math.fsum(sorted(w for _, _, w in self.edges))

    def adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v, _ in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


@dataclass(frozen=True)
class HamPath:
    """Vertex order starting at the root plus its geometric polyline."""

    order: tuple[int, ...]
    geometry: Polyline

    @property
    def weight(self) -> float:
        return self.geometry.total_length


def euclidean_mst(pts: PointCloud) -> Tree:
    """Minimum spanning tree of the complete Euclidean graph (Prim).

    Ties between equal-weight candidate edges are broken toward the
    lexicographically smallest (min index, max index) pair, so the edge
    set is deterministic.
    """
    n = pts.n
    if n == 1:
        return Tree(1, (), pts.root)
    coords = np.asarray(pts.points, dtype=float)
    root = pts.root
    dist_rows = None
    if n <= 1024:  # full distance matrix: one matmul, cheap row lookups
        sq = np.einsum("ij,ij->i", coords, coords)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (coords @ coords.T), 0.0)
        dist_rows = np.sqrt(d2)

    def row(v):
        if dist_rows is not None:
            return dist_rows[v]
        return np.linalg.norm(coords - coords[v], axis=1)

    in_tree = np.zeros(n, dtype=bool)
    best = np.full(n, np.inf)
    best_from = np.full(n, -1, dtype=int)
    in_tree[root] = True
    d = row(root)
    improve = d < best
    best[improve] = d[improve]
    best_from[improve] = root
    best[root] = np.inf
    edges = []
    for _ in range(n - 1):
        v = int(np.argmin(best))
        w = float(best[v])
        ties = np.nonzero(best == w)[0]
        if len(ties) > 1:
            v = min(
                (int(t) for t in ties),
                key=lambda t: (min(t, best_from[t]), max(t, best_from[t])),
            )
        u = int(best_from[v])
        # Store the canonical weight; the selection matrix may carry
        # matmul rounding that must not leak into the tree.
        edges.append((u, v, dist(pts.points[u], pts.points[v])))
        in_tree[v] = True
        best[v] = np.inf
        d = row(v)
        closer = (d < best) & ~in_tree
        best[closer] = d[closer]
        best_from[closer] = v
        # Equal-distance candidates may still prefer the new edge pair.
        equal = (d == best) & ~in_tree & ~closer
        for t in np.nonzero(equal)[0]:
            old = (min(int(t), int(best_from[t])), max(int(t), int(best_from[t])))
            new = (min(int(t), v), max(int(t), v))
            if new < old:
                best_from[t] = v
    return Tree(n, tuple(edges), root)


def dfs_hamiltonian(tree: Tree, pts: PointCloud) -> HamPath:
    """Preorder DFS of the tree, children visited in ascending index order."""
    if tree.root != pts.root or tree.n != pts.n:
        raise ValueError("tree does not match the point cloud")
    children: list[list[int]] = [[] for _ in range(tree.n)]
    for u, v, _ in tree.edges:
        children[u].append(v)
        children[v].append(u)
    order = []
    seen = [False] * tree.n
    stack = [tree.root]
    while stack:
        v = stack.pop()
        if seen[v]:
            continue
        seen[v] = True
        order.append(v)
        for c in sorted(children[v], reverse=True):
            if not seen[c]:
                stack.append(c)
    geometry = Polyline(tuple(pts.points[i] for i in order))
    return HamPath(tuple(order), geometry)
