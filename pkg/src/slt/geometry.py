"""Dimension-generic vector, segment and polyline primitives.

Points are plain tuples of floats; everything here is a pure function or a
frozen dataclass, so values can be shared freely between threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import AngleOutOfRange, DegenerateRay, DimensionMismatch

Point = tuple[float, ...]
PlanePoint = tuple[float, float]

#: Two points closer than this in every coordinate are considered coincident.
COINCIDENT_TOL = 1e-12


def sub(p: Point, q: Point) -> Point:
    if len(p) != len(q):
        raise DimensionMismatch(f"dimensions {len(p)} and {len(q)} differ")
    return tuple(a - b for a, b in zip(p, q))


def add(p: Point, q: Point) -> Point:
    return tuple(a + b for a, b in zip(p, q))


def scale(p: Point, c: float) -> Point:
    return tuple(c * a for a in p)


def dot(p: Point, q: Point) -> float:
    return sum(a * b for a, b in zip(p, q))


def norm(p: Point) -> float:
    return math.sqrt(sum(a * a for a in p))


def dist(p: Point, q: Point) -> float:
    """Euclidean distance between two points of equal dimension."""
    if len(p) != len(q):
        raise DimensionMismatch(f"dimensions {len(p)} and {len(q)} differ")
    return math.dist(p, q)


def points_close(p: Point, q: Point, tol: float = COINCIDENT_TOL) -> bool:
    """Coincidence test: max coordinate difference below ``tol``."""
    return len(p) == len(q) and max(abs(a - b) for a, b in zip(p, q)) < tol


def angle_at_apex(s: Point, u: Point, v: Point) -> float:
    """Angle in [0, pi] between the rays s->u and s->v.

    Uses the half-angle chord form 2*atan2(|a-b|, |a+b|) on the unit
    directions, which stays accurate near both 0 and pi.
    """
    a = sub(u, s)
    b = sub(v, s)
    na = norm(a)
    nb = norm(b)
    if na < COINCIDENT_TOL or nb < COINCIDENT_TOL:
        raise DegenerateRay("ray endpoint coincides with apex")
    a = scale(a, 1.0 / na)
    b = scale(b, 1.0 / nb)
    chord = math.dist(a, b)
    cochord = norm(add(a, b))
    return 2.0 * math.atan2(chord, cochord)


def rotate_in_span(s: Point, u: Point, v: Point, theta: float, r: float) -> Point:
    """Point at polar coordinates (r, theta) in the 2-plane through s.

    The plane is spanned by the directions u-s and v-s; theta is measured
    from the ray s->u toward the v side.  Requires 0 <= theta <= angle
    between the rays and r >= 0.
    """
    if r < 0.0:
        raise ValueError("radius must be nonnegative")
    a = sub(u, s)
    na = norm(a)
    if na < COINCIDENT_TOL:
        raise DegenerateRay("first ray endpoint coincides with apex")
    e1 = scale(a, 1.0 / na)
    b = sub(v, s)
    nb = norm(b)
    if nb < COINCIDENT_TOL:
        raise DegenerateRay("second ray endpoint coincides with apex")
    w = tuple(bi - dot(b, e1) * e1i for bi, e1i in zip(b, e1))
    nw = norm(w)
    if nw < COINCIDENT_TOL * nb:
        # Collinear rays: the span is a single line.
        if dot(b, e1) < 0.0:
            raise DegenerateRay("rays are antiparallel")
        if not -1e-9 <= theta <= 1e-9:
            raise AngleOutOfRange(f"theta={theta} outside degenerate cone")
        return add(s, scale(e1, r))
    span = angle_at_apex(s, u, v)
    if not -1e-9 <= theta <= span + 1e-9:
        raise AngleOutOfRange(f"theta={theta} outside [0, {span}]")
    e2 = scale(w, 1.0 / nw)
    c = r * math.cos(theta)
    d = r * math.sin(theta)
    return tuple(si + c * e1i + d * e2i for si, e1i, e2i in zip(s, e1, e2))


@dataclass(frozen=True)
class ArcPosition:
    """A location on a polyline: segment index, offset within it, arc length."""

    segment_index: int
    t: float
    arc_len: float


@dataclass(frozen=True)
class Polyline:
    """Ordered vertices with cached prefix sums of segment lengths."""

    vertices: tuple[Point, ...]
    cum_len: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if not self.cum_len:
            acc = [0.0]
            for a, b in zip(self.vertices, self.vertices[1:]):
                acc.append(acc[-1] + dist(a, b))
            object.__setattr__(self, "cum_len", tuple(acc))

    @property
    def total_length(self) -> float:
        return self.cum_len[-1]

    def locate(self, arc: float) -> ArcPosition:
        """ArcPosition of arc-length ``arc`` along the polyline."""
        if not -1e-12 <= arc <= self.total_length + 1e-12:
            raise ValueError(f"arc length {arc} outside [0, {self.total_length}]")
        arc = min(max(arc, 0.0), self.total_length)
        lo, hi = 0, len(self.cum_len) - 1
        while lo + 1 < hi:
            mid = (lo + hi) // 2
            if self.cum_len[mid] <= arc:
                lo = mid
            else:
                hi = mid
        return ArcPosition(lo, arc - self.cum_len[lo], arc)

    def point_at(self, pos: ArcPosition) -> Point:
        j = pos.segment_index
        a = self.vertices[j]
        if j + 1 >= len(self.vertices):
            return a
        b = self.vertices[j + 1]
        seg = self.cum_len[j + 1] - self.cum_len[j]
        if seg == 0.0:
            return a
        f = pos.t / seg
        return tuple(ai + f * (bi - ai) for ai, bi in zip(a, b))


def point_at_arc(path: Polyline, arc: float) -> Point:
    """Linear interpolation of the polyline at the given arc length."""
    return path.point_at(path.locate(arc))
