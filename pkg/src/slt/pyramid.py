"""Right-pyramid construction over hypercube bases in d dimensions.

The base cube sits in the hyperplane orthogonal to axis 0, scaled so the
apex is at unit distance from all base corners.  Each level subdivides
every base cube into 2^(d-1) congruent cubes and erects child pyramids
whose apex angles (measured over a base body diagonal) grow by a factor
lambda.  A 5/4-spanner over the input grid and the finest corner lattice
connects everything along the base.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from heapq import heappop, heappush

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as sparse_dijkstra

from .core2d import levels_for_eps
from .errors import AngleOverflow, DimensionTooSmall, EpsOutOfRange
from .geometry import Point, dist
from .metrics import SltReport
from .mst_path import PointCloud, Tree, euclidean_mst
from .pipeline import SteinerGraph

SPANNER_T = 1.25
_GREEDY_LIMIT = 150


@dataclass(frozen=True)
class GridSpec:
    """Point budget for the base grid: n points, per_axis^(d-1) cells."""

    n: int
    per_axis: int

    @classmethod
    def for_points(cls, n: int, d: int) -> "GridSpec":
        if n < 2:
            raise ValueError("grid needs at least 2 points")
        m = math.ceil(n ** (1.0 / (d - 1)) - 1e-9)
        return cls(n, m)

    @staticmethod
    def regime_min(d: int, eps: float) -> float:
        """Smallest n for which the constant-lightness claim is asserted."""
        return (2.0 * math.sqrt(d) * eps ** (0.66 - d / 2.0)) ** ((d - 1.0) / (d - 2.0))

    def satisfies_regime(self, d: int, eps: float) -> bool:
        return self.n >= self.regime_min(d, eps)


@dataclass(frozen=True)
class Pyramid:
    """Right pyramid: apex above the center of a (d-1)-cube base."""

    base_center: Point
    half_side: float
    apex: Point
    apex_angle: float
    axis: int = 0

    def corners(self):
        d = len(self.base_center)
        others = [i for i in range(d) if i != self.axis]
        for signs in itertools.product((-1.0, 1.0), repeat=len(others)):
            c = list(self.base_center)
            for i, sg in zip(others, signs):
                c[i] += sg * self.half_side
            yield tuple(c)

    def check(self, tol: float = 1e-9) -> bool:
        """Apex above the center, equidistant corners, matching apex angle."""
        corners = list(self.corners())
        dists = [dist(self.apex, c) for c in corners]
        if max(dists) - min(dists) > tol * max(dists):
            return False
        proj = tuple(
            self.apex[i] if i != self.axis else self.base_center[i]
            for i in range(len(self.apex))
        )
        if dist(proj, self.base_center) > tol:
            return False
        r = self.half_side * math.sqrt(len(self.base_center) - 1)
        h = abs(self.apex[self.axis] - self.base_center[self.axis])
        return abs(2.0 * math.atan2(r, h) - self.apex_angle) <= tol


def grid_points(d: int, eps: float, grid: GridSpec) -> tuple[Point, ...]:
    """Cell-center grid inside the base cube, lexicographic order."""
    alpha = math.sqrt(eps)
    side = 2.0 * math.sin(alpha / 2.0) / math.sqrt(d - 1)
    m = grid.per_axis
    pts = []
    for idx in itertools.product(range(m), repeat=d - 1):
        if len(pts) == grid.n:
            break
        coords = (0.0,) + tuple(-side / 2.0 + (i + 0.5) * side / m for i in idx)
        pts.append(coords)
    return tuple(pts)


def pyramid_mst_lower_bound(grid: GridSpec, d: int, eps: float) -> float:
    """Lower bound on the MST weight of the grid instance."""
    if grid.n < 2:
        raise ValueError("bound needs at least 2 grid points")
    return grid.n * math.sqrt(eps / d) / (2.0 * grid.n ** (1.0 / (d - 1)))


def greedy_spanner(pts: list[Point], t: float) -> list[tuple[int, int, float]]:
    """Classic greedy t-spanner: keep a pair iff the graph cannot match it.

    Quadratic pair enumeration with a bounded Dijkstra per pair; meant for
    desk-scale point counts.
    """
    if t <= 1.0:
        raise ValueError("t must exceed 1")
    n = len(pts)
    pairs = sorted(
        (dist(pts[i], pts[j]), i, j) for i in range(n) for j in range(i + 1, n)
    )
    adj: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    edges: list[tuple[int, int, float]] = []
    for w, i, j in pairs:
        if _bounded_dist(adj, i, j, t * w) <= t * w:
            continue
        adj[i].append((j, w))
        adj[j].append((i, w))
        edges.append((i, j, w))
    return edges


def _bounded_dist(adj, src, dst, cap):
    best = {src: 0.0}
    heap = [(0.0, src)]
    while heap:
        d0, v = heappop(heap)
        if v == dst:
            return d0
        if d0 > best.get(v, math.inf) or d0 > cap:
            continue
        for u, w in adj[v]:
            nd = d0 + w
            if nd <= cap and nd < best.get(u, math.inf):
                best[u] = nd
                heappush(heap, (nd, u))
    return math.inf


# --- Yao-style cone spanner -------------------------------------------------
#
# Correctness rests on the standard argument: if every point assigns each
# other point to a cone axis within theta_c of the connecting direction and
# keeps an edge to the nearest point per cone, the graph is a t-spanner for
# t = 1/(1 - 2 sin(theta_c)).  theta_c <= asin((1 - 1/t)/2) gives t <= 5/4.

_AXES_CACHE: dict[int, tuple[np.ndarray, float]] = {}


def _cone_axes(dim: int) -> tuple[np.ndarray, float]:
    """Unit axes covering the direction sphere, with a covering radius bound."""
    cached = _AXES_CACHE.get(dim)
    if cached is not None:
        return cached
    if dim == 2:
        count = 64
        ang = (np.arange(count) + 0.5) * (2.0 * math.pi / count)
        axes = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        radius = math.pi / count  # exact for evenly spaced directions
    elif dim == 3:
        axes = _fibonacci_sphere(768)
        for _ in range(6):  # Lloyd rounds shrink the covering radius
            axes = _lloyd_round(axes)
        radius = _sampled_covering_radius(axes)
    else:
        raise DimensionTooSmall(
            f"cone spanner supports base dimensions 2 and 3, got {dim}"
        )
    limit = math.asin((1.0 - 1.0 / SPANNER_T) / 2.0)
    if radius >= limit:
        raise AngleOverflow(
            f"cone covering radius {radius:.4f} exceeds the {limit:.4f} limit"
        )
    out = (np.ascontiguousarray(axes, dtype=np.float64), radius)
    _AXES_CACHE[dim] = out
    return out


def _fibonacci_sphere(count: int) -> np.ndarray:
    idx = np.arange(count) + 0.5
    phi = np.arccos(1.0 - 2.0 * idx / count)
    lam = math.pi * (1.0 + math.sqrt(5.0)) * idx
    return np.stack(
        [np.sin(phi) * np.cos(lam), np.sin(phi) * np.sin(lam), np.cos(phi)], axis=1
    )


def _lloyd_round(axes: np.ndarray, samples: int = 120_000) -> np.ndarray:
    """One centroidal update of the axes against a fixed direction sample."""
    sample = _fibonacci_sphere(samples)
    sums = np.zeros_like(axes)
    for lo in range(0, samples, 20_000):
        blk = sample[lo : lo + 20_000]
        cell = np.argmax(blk @ axes.T, axis=1)
        np.add.at(sums, cell, blk)
    norms = np.linalg.norm(sums, axis=1, keepdims=True)
    keep = norms[:, 0] > 0
    out = axes.copy()
    out[keep] = sums[keep] / norms[keep]
    return out


def _sampled_covering_radius(axes: np.ndarray, samples: int = 400_000) -> float:
    """Covering radius bound: dense-sample maximum plus the sample's own gap."""
    sample = _fibonacci_sphere(samples)
    worst = 0.0
    for lo in range(0, samples, 20_000):
        cos = sample[lo : lo + 20_000] @ axes.T
        worst = max(worst, float(np.arccos(np.clip(cos.max(axis=1), -1.0, 1.0)).max()))
    # Spiral samples of this density leave gaps below ~2.5/sqrt(samples).
    return worst + 2.5 / math.sqrt(samples)


def yao_spanner(points: np.ndarray) -> list[tuple[int, int, float]]:
    """Nearest-in-cone 5/4-spanner over points in a hyperplane slice.

    ``points`` must already be reduced to their base-hyperplane coordinates
    (shape (n, 2) or (n, 3)).  Each point scans the others in increasing
    distance and keeps the first hit per cone; the scan stops once every
    cone is filled.
    """
    n, dim = points.shape
    axes, _ = _cone_axes(dim)
    axes32 = np.ascontiguousarray(axes.T, dtype=np.float32)
    ncones = len(axes)
    pts = np.ascontiguousarray(points, dtype=np.float64)
    src_chunks: list[np.ndarray] = []
    dst_chunks: list[np.ndarray] = []
    chunk = 4096
    for u in range(n):
        diff = pts - pts[u]
        d2 = np.einsum("ij,ij->i", diff, diff)
        order = np.argsort(d2, kind="stable")[1:]  # drop u itself
        filled = np.zeros(ncones, dtype=bool)
        remaining = ncones
        picks = []
        for lo in range(0, n - 1, chunk):
            cand = order[lo : lo + chunk]
            # Cone assignment only needs the axis within the covering
            # radius, so single precision is more than enough here.
            cells = np.argmax(diff[cand].astype(np.float32) @ axes32, axis=1)
            fresh = ~filled[cells]
            if fresh.any():
                sub_cells = cells[fresh]
                sub_cand = cand[fresh]
                firsts = np.unique(sub_cells, return_index=True)[1]
                picks.append(sub_cand[firsts])
                filled[sub_cells[firsts]] = True
                remaining -= len(firsts)
            if remaining == 0:
                break
        if picks:
            vs = np.concatenate(picks)
            src_chunks.append(np.full(len(vs), u, dtype=np.int64))
            dst_chunks.append(vs.astype(np.int64))
    us = np.concatenate(src_chunks)
    vs = np.concatenate(dst_chunks)
    lo = np.minimum(us, vs)
    hi = np.maximum(us, vs)
    keys = np.unique(lo * n + hi)
    out = []
    for key in keys.tolist():
        u, v = divmod(key, n)
        out.append((u, v, dist(tuple(pts[u]), tuple(pts[v]))))
    return out


def base_spanner(
    points: list[Point], axis: int, method: str = "auto"
) -> tuple[list[tuple[int, int, float]], str]:
    """5/4-spanner over base points; greedy when small, cones at scale."""
    if method == "auto":
        method = "greedy" if len(points) <= _GREEDY_LIMIT else "yao"
    if method == "greedy":
        return greedy_spanner(points, SPANNER_T), "greedy"
    if method == "yao":
        arr = np.asarray(points, dtype=float)
        arr = np.delete(arr, axis, axis=1)
        return yao_spanner(arr), "yao"
    raise ValueError(f"unknown spanner method {method!r}")


def build_pyramid_core(
    d: int,
    eps: float,
    grid: GridSpec,
    lam: float = 1.25,
    spanner: str = "auto",
):
    """Assemble the pyramid graph and its shortest-path tree.

    Returns (graph, tree, report).  The tree is the full SPT from the
    apex; stretch is measured over the grid points.
    """
    if d < 3:
        raise DimensionTooSmall("pyramid construction needs d >= 3")
    if not 0.0 < eps < math.pi**2:
        raise EpsOutOfRange(f"eps={eps} outside (0, pi^2)")
    alpha = math.sqrt(eps)
    k = levels_for_eps(eps)
    if alpha * lam**k >= math.pi / 2.0:
        raise AngleOverflow("final apex angle reaches pi/2")

    side = 2.0 * math.sin(alpha / 2.0) / math.sqrt(d - 1)
    dim = d - 1
    heights = [
        (math.sin(alpha / 2.0) / (1 << i)) / math.tan(alpha * lam**i / 2.0)
        for i in range(k + 1)
    ]

    inputs = grid_points(d, eps, grid)
    apex = (heights[0],) + (0.0,) * dim

    G = SteinerGraph()
    apex_id = G.add_vertex(apex, "input")
    input_ids = [G.add_vertex(p, "input") for p in inputs]

    # Corner lattice of the level-k subdivision (the base Steiner grid);
    # integer congruences decide coincidences with grid cell centers.
    m = grid.per_axis
    two_k = 1 << k
    corner_coord = [-side / 2.0 + c * side / two_k for c in range(two_k + 1)]
    center_of = {}
    for j, p in enumerate(inputs):
        center_of[tuple(round((x + side / 2.0) / (side / m) - 0.5) for x in p[1:])] = j

    corner_ids: dict[tuple[int, ...], int] = {}
    for cvec in itertools.product(range(two_k + 1), repeat=dim):
        # Coincidence with a cell center: c/2^k == (i+0.5)/m for all axes.
        center_idx = []
        for c in cvec:
            num = 2 * c * m - two_k
            den = 2 * two_k
            if num >= 0 and num % den == 0:
                center_idx.append(num // den)
            else:
                center_idx = None
                break
        if center_idx is not None:
            j = center_of.get(tuple(center_idx))
            if j is not None:
                corner_ids[cvec] = input_ids[j]
                continue
        p = (0.0,) + tuple(corner_coord[c] for c in cvec)
        corner_ids[cvec] = G.add_vertex(p, "grid")

    # Apices per level and the binary (2^(d-1)-ary) tree between them.
    level_ids: list[dict[tuple[int, ...], int]] = [{(0,) * dim: apex_id}]
    chain = [0.0] * (k + 1)
    level_edge_totals = [0.0] * (k + 1)
    offsets = list(itertools.product((0, 1), repeat=dim))
    for i in range(1, k + 1):
        ids: dict[tuple[int, ...], int] = {}
        cells = 1 << i
        csize = side / cells
        for jvec in itertools.product(range(cells), repeat=dim):
            center = tuple(-side / 2.0 + (j + 0.5) * csize for j in jvec)
            ids[jvec] = G.add_vertex((heights[i],) + center, "core_apex")
        level_ids.append(ids)
        for jvec, child in ids.items():
            parent = level_ids[i - 1][tuple(j // 2 for j in jvec)]
            G.add_edge(parent, child)
            w = G.edges[-1][2]
            chain[i - 1] = max(chain[i - 1], w)
            level_edge_totals[i - 1] += w
    for jvec, aid in level_ids[k].items():
        for off in offsets:
            cid = corner_ids[tuple(j + o for j, o in zip(jvec, off))]
            G.add_edge(aid, cid)
            w = G.edges[-1][2]
            chain[k] = max(chain[k], w)
            level_edge_totals[k] += w

    base_points = list(inputs) + [
        G.coords[i] for c, i in corner_ids.items() if i > len(inputs)
    ]
    base_ids = input_ids + [i for c, i in corner_ids.items() if i > len(inputs)]
    span_edges, span_method = base_spanner(base_points, 0, spanner)
    for u, v, _ in span_edges:
        G.add_edge(base_ids[u], base_ids[v])

    dists, parents = _sparse_spt(G, apex_id)
    tree_edges = tuple(
        (int(parents[v]), v, dist(G.coords[int(parents[v])], G.coords[v]))
        for v in range(G.n)
        if v != apex_id
    )
    tree = Tree(G.n, tree_edges, apex_id)

    per_point = [dists[i] / dist(apex, p) for i, p in zip(input_ids, inputs)]
    mst = euclidean_mst(PointCloud((apex,) + inputs, 0))
    report = SltReport(
        n=grid.n + 1,
        d=d,
        eps=eps,
        gamma=1.0,
        mst_weight=mst.weight,
        tree_weight=tree.weight,
        lightness=tree.weight / mst.weight,
        per_point_stretch=per_point,
        max_stretch=max(per_point),
        surface_angles=[alpha * lam**i for i in range(k + 1)],
        phase1_weight=0.0,
        flags={
            "levels": k,
            "spanner": span_method,
            "spanner_edges": len(span_edges),
            "level_edge_totals": level_edge_totals,
            "chain": chain,
            "regime": grid.satisfies_regime(d, eps),
            "corner_count": len(corner_ids),
        },
    )
    return G, tree, report


def _sparse_spt(G: SteinerGraph, source: int):
    n = G.n
    us = np.fromiter((e[0] for e in G.edges), dtype=np.int32, count=len(G.edges))
    vs = np.fromiter((e[1] for e in G.edges), dtype=np.int32, count=len(G.edges))
    ws = np.fromiter((e[2] for e in G.edges), dtype=np.float64, count=len(G.edges))
    mat = csr_matrix(
        (np.concatenate([ws, ws]), (np.concatenate([us, vs]), np.concatenate([vs, us]))),
        shape=(n, n),
    )
    dists, parents = sparse_dijkstra(
        mat, directed=False, indices=source, return_predecessors=True
    )
    return dists, parents
