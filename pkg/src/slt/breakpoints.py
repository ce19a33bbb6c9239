"""Break point selection on the Hamiltonian path and its subdivision.

Starting from the root, consecutive break points satisfy

    arc(b_i, b_{i+1}) = sqrt(eps) * dist(s, b_{i+1})

where arc() is measured along the path.  The left-hand side grows with
unit speed and the right-hand side is sqrt(eps)-Lipschitz, so the gap
function has exactly one zero crossing; it is found per segment with a
closed-form quadratic solve, falling back to monotone bisection where the
quadratic form is too ill-conditioned to certify the root.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EpsOutOfRange
from .geometry import ArcPosition, Point, Polyline
from .mst_path import HamPath

_RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class BreakpointSet:
    """Ordered break points on H; the last one may be truncated."""

    positions: tuple[ArcPosition, ...]
    points: tuple[Point, ...]
    eps: float
    truncated: bool

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class PathSegment:
    """One sub-path of the subdivided path, between consecutive break points."""

    start_bp: int
    end_bp: int
    vstart: int
    vend: int  # inclusive vertex range into hstar


@dataclass(frozen=True)
class SubdividedPath:
    hstar: Polyline
    segments: tuple[PathSegment, ...]
    #: original input index per hstar vertex, or -1 for a Steiner vertex
    input_index: tuple[int, ...]
    truncated: bool


def select_breakpoints(H: HamPath, eps: float) -> BreakpointSet:
    """Place break points on H for the given eps in (0, 1).

    The first break point is the root; the second is the far endpoint of
    the first path edge (from the root the defining equation has no
    solution, and the first edge spans a zero-angle surface on its own).
    If the equation has no further root before the path ends, the final
    vertex becomes a truncated break point.
    """
    if not 0.0 < eps < 1.0:
        raise EpsOutOfRange(f"eps={eps} outside (0, 1)")
    path = H.geometry
    s = path.vertices[0]
    total = path.total_length
    sq = math.sqrt(eps)

    positions = [ArcPosition(0, 0.0, 0.0)]
    if len(path.vertices) == 1:
        return BreakpointSet(tuple(positions), (s,), eps, False)

    positions.append(_vertex_position(path, 1))
    truncated = False
    guard = 1e-12 * max(total, 1.0)
    geom = _SegmentData(path, s)
    while positions[-1].arc_len < total - 1e-12 * max(total, 1.0):
        cur = positions[-1]
        nxt = _next_root(path, geom, cur, sq)
        if nxt is None:
            positions.append(_vertex_position(path, len(path.vertices) - 1))
            truncated = True
            break
        if nxt.arc_len - cur.arc_len < guard:
            raise ValueError(
                "degenerate break point spacing: path passes through the root"
            )
        positions.append(nxt)
    points = tuple(path.point_at(p) for p in positions)
    return BreakpointSet(tuple(positions), points, eps, truncated)


class _SegmentData:
    """Per-segment scalars for the root solve: direction dot and distance."""

    def __init__(self, path: Polyline, s: Point):
        verts = np.asarray(path.vertices, dtype=float)
        rel = verts - np.asarray(s, dtype=float)
        seg = np.diff(verts, axis=0)
        lens = np.array(path.cum_len[1:]) - np.array(path.cum_len[:-1])
        safe = np.where(lens == 0.0, 1.0, lens)
        u = seg / safe[:, None]
        self.seg_len = lens.tolist()
        self.b = np.einsum("ij,ij->i", u, rel[:-1]).tolist()
        self.c = np.einsum("ij,ij->i", rel[:-1], rel[:-1]).tolist()


def _vertex_position(path: Polyline, j: int) -> ArcPosition:
    if j == len(path.vertices) - 1 and j > 0:
        seg = j - 1
        return ArcPosition(seg, path.cum_len[j] - path.cum_len[seg], path.cum_len[j])
    return ArcPosition(j, 0.0, path.cum_len[j])


def _next_root(path: Polyline, geom: _SegmentData, cur: ArcPosition, sq: float):
    """First point after ``cur`` where arc(cur, q) = sq * dist(s, q)."""
    eps = sq * sq
    s = path.vertices[0]
    nseg = len(path.vertices) - 1
    for j in range(cur.segment_index, nseg):
        seg_len = geom.seg_len[j]
        if seg_len == 0.0:
            continue
        t0 = cur.t if j == cur.segment_index else 0.0
        if t0 >= seg_len:
            continue
        a = path.cum_len[j] - cur.arc_len  # arc from cur to segment start
        b = geom.b[j]
        c = geom.c[j]

        # Cheap no-root screen on the quadratic form, with a margin wide
        # enough to absorb its cancellation error near the closest approach.
        L = seg_len
        dd_cheap = math.sqrt(max(L * L + 2.0 * b * L + c, 0.0))
        margin = 1e-7 * sq * (abs(a) + L + math.sqrt(c) + 1.0)
        if (a + L) - sq * dd_cheap < -margin:
            continue  # g is increasing: no crossing before the segment end

        # Evaluation through point coordinates: the quadratic form
        # t^2 + 2bt + c cancels catastrophically near the closest approach.
        p0 = path.vertices[j]
        p1 = path.vertices[j + 1]

        def geval(tv):
            f = tv / seg_len
            q = tuple(x + f * (y - x) for x, y in zip(p0, p1))
            dd = math.dist(s, q)
            return (a + tv) - sq * dd, dd

        ghi, _ = geval(seg_len)
        if ghi < 0.0:
            continue  # confirmed: no crossing in this segment
        t = _solve_on_segment(a, b, c, eps, t0, seg_len)
        if t is not None:
            g, dd = geval(t)
            if abs(g) > _RESIDUAL_TOL * max(sq * dd, 1e-300):
                t = None
        if t is None:
            lo, hi = t0, seg_len
            glo, _ = geval(lo)
            if glo >= 0.0:
                t = t0  # crossing collapsed onto the interval start
            else:
                for _ in range(100):
                    mid = 0.5 * (lo + hi)
                    gm, _ = geval(mid)
                    if gm < 0.0:
                        lo = mid
                    else:
                        hi = mid
                    if hi - lo <= 1e-16 * max(seg_len, 1.0):
                        break
                t = hi
        arc = path.cum_len[j] + t
        if t >= seg_len - 1e-15 * max(path.total_length, 1.0):
            return _vertex_position(path, j + 1)
        return ArcPosition(j, t, arc)
    return None


def _solve_on_segment(a, b, c, eps, t0, seg_len):
    """Smallest t in [t0, seg_len] with (a+t)^2 = eps*(t^2+2bt+c), a+t >= 0."""
    qa = 1.0 - eps
    qb = 2.0 * (a - eps * b)
    qc = a * a - eps * c
    if abs(qa) < 1e-14:
        # Linear fallback; cannot occur for eps < 1 but kept for safety.
        if qb == 0.0:
            return None
        roots = [-qc / qb]
    else:
        disc = qb * qb - 4.0 * qa * qc
        if disc < 0.0:
            return None
        sd = math.sqrt(disc)
        roots = sorted([(-qb - sd) / (2.0 * qa), (-qb + sd) / (2.0 * qa)])
    lo = max(t0, -a)
    for t in roots:
        if lo - 1e-12 * max(seg_len, 1.0) <= t <= seg_len + 1e-12 * max(seg_len, 1.0):
            return min(max(t, lo), seg_len)
    return None


def subdivide(H: HamPath, B: BreakpointSet) -> SubdividedPath:
    """Insert the break points as vertices of H, preserving length."""
    path = H.geometry
    total = path.total_length
    tol = 1e-12 * max(total, 1.0)

    verts: list[Point] = []
    input_index: list[int] = []
    bp_vertex: list[int] = []  # hstar vertex index of each break point

    bi = 0
    for j, v in enumerate(path.vertices):
        arc_v = path.cum_len[j]
        # Break points strictly inside the previous edge.
        while bi < len(B.positions) and B.positions[bi].arc_len < arc_v - tol:
            verts.append(B.points[bi])
            input_index.append(-1)
            bp_vertex.append(len(verts) - 1)
            bi += 1
        verts.append(v)
        input_index.append(H.order[j])
        if bi < len(B.positions) and abs(B.positions[bi].arc_len - arc_v) <= tol:
            bp_vertex.append(len(verts) - 1)
            bi += 1
    while bi < len(B.positions):  # safety: trailing break points
        verts.append(B.points[bi])
        input_index.append(-1)
        bp_vertex.append(len(verts) - 1)
        bi += 1

    segments = tuple(
        PathSegment(i, i + 1, bp_vertex[i], bp_vertex[i + 1])
        for i in range(len(bp_vertex) - 1)
    )
    return SubdividedPath(
        Polyline(tuple(verts)), segments, tuple(input_index), B.truncated
    )
