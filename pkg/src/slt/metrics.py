"""Shortest-path and MST oracles plus root-stretch / lightness measurement."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import heappop, heappush

import numpy as np

from .errors import Disconnected, Unreachable
from .geometry import Point, dist
from .mst_path import PointCloud, Tree, euclidean_mst


def dijkstra(n: int, adj: list[list[tuple[int, float]]], source: int):
    """Nonnegative-weight shortest paths; ties broken by vertex index.

    Returns (dist array, parent array); unreachable vertices keep inf / -1.
    """
    dist_arr = [math.inf] * n
    parent = [-1] * n
    dist_arr[source] = 0.0
    heap = [(0.0, source)]
    done = [False] * n
    while heap:
        d, v = heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for u, w in adj[v]:
            nd = d + w
            if nd < dist_arr[u] or (nd == dist_arr[u] and not done[u] and v < parent[u]):
                dist_arr[u] = nd
                parent[u] = v
                heappush(heap, (nd, u))
    return dist_arr, parent


def oracle_spt(n: int, edges, source: int):
    """Dijkstra SPT over an undirected weighted edge list."""
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for u, v, w in edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist_arr, parent = dijkstra(n, adj, source)
    if any(math.isinf(d) for d in dist_arr):
        raise Disconnected("graph is not connected")
    return dist_arr, parent


def floyd_warshall(n: int, edges) -> np.ndarray:
    """All-pairs shortest distances; independent check for Dijkstra."""
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v, w in edges:
        if w < d[u, v]:
            d[u, v] = w
            d[v, u] = w
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return False
        self.parent[ry] = rx
        return True


def kruskal_mst(points: tuple[Point, ...], root: int = 0) -> Tree:
    """Independent MST oracle: sort all pairs, grow with union-find."""
    n = len(points)
    pairs = sorted(
        (dist(points[i], points[j]), i, j) for i in range(n) for j in range(i + 1, n)
    )
    uf = _UnionFind(n)
    edges = []
    for w, i, j in pairs:
        if uf.union(i, j):
            edges.append((i, j, w))
            if len(edges) == n - 1:
                break
    return Tree(n, tuple(edges), root)


def tree_distances(tree: Tree, source: int):
    """Exact path lengths from ``source`` within a tree."""
    adj: list[list[tuple[int, float]]] = [[] for _ in range(tree.n)]
    for u, v, w in tree.edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    dist_arr = [math.inf] * tree.n
    dist_arr[source] = 0.0
    stack = [source]
    while stack:
        v = stack.pop()
        for u, w in adj[v]:
            if math.isinf(dist_arr[u]):
                dist_arr[u] = dist_arr[v] + w
                stack.append(u)
    return dist_arr


def root_stretch(
    tree: Tree,
    coords: list[Point],
    source: int,
    input_vertices: list[int],
) -> list[float]:
    """Per-point ratio of tree distance to Euclidean distance from the root."""
    dist_arr = tree_distances(tree, source)
    out = []
    for v in input_vertices:
        if math.isinf(dist_arr[v]):
            raise Unreachable(f"vertex {v} not reachable from the root")
        if v == source:
            out.append(1.0)
            continue
        out.append(dist_arr[v] / dist(coords[source], coords[v]))
    return out


def lightness(tree_weight: float, input_points: tuple[Point, ...], root: int = 0) -> float:
    """Tree weight over the MST weight of the input points alone."""
    if len(input_points) < 2:
        raise ValueError("need at least two input points")
    mst = euclidean_mst(PointCloud(input_points, root))
    return tree_weight / mst.weight


@dataclass
class SltReport:
    """Measured quantities for one constructed tree."""

    n: int
    d: int
    eps: float
    gamma: float
    mst_weight: float
    tree_weight: float
    lightness: float
    per_point_stretch: list[float]
    max_stretch: float
    surface_angles: list[float]
    phase1_weight: float
    flags: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "eps": self.eps,
            "gamma": self.gamma,
            "mst_weight": self.mst_weight,
            "tree_weight": self.tree_weight,
            "lightness": self.lightness,
            "per_point_stretch": list(self.per_point_stretch),
            "max_stretch": self.max_stretch,
            "surface_angles": list(self.surface_angles),
            "phase1_weight": self.phase1_weight,
            "flags": dict(self.flags),
        }
