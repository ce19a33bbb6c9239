"""End-to-end assembly of the Steiner shallow-light tree in R^d.

Per surface: secondary break points along the sub-path, a cross line
through the input point closest to the root, Steiner points on that line,
a recursive triangle tree feeding them, and connector edges back to the
path.  All planar pieces are lifted onto the surface, the union over all
surfaces forms one graph, and the final tree is the union of shortest
paths from the root to the input points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .breakpoints import select_breakpoints, subdivide
from .core2d import CoreGraph, CoreInstance, build_core, core_spt
from .errors import EmptySurface, EpsOutOfRange, Unreachable
from .geometry import PlanePoint, Point, Polyline, dist
from .metrics import SltReport, dijkstra
from .mst_path import PointCloud, Tree, dfs_hamiltonian, euclidean_mst
from .unfolding import FoldedSurface, build_surfaces, lift, lift_segment, unfold_vertex

_KIND_RANK = {
    "input": 0,
    "break": 1,
    "secondary_break": 2,
    "ell_steiner": 3,
    "grid": 4,
    "core_apex": 5,
    "bend": 6,
}


class SteinerGraph:
    """Weighted geometric graph over input and Steiner vertices."""

    def __init__(self):
        self.coords: list[Point] = []
        self.kinds: list[str] = []
        self.edges: list[tuple[int, int, float]] = []
        self._index: dict[Point, int] = {}
        self._edge_set: set[tuple[int, int]] = set()

    @property
    def n(self) -> int:
        return len(self.coords)

    def add_vertex(self, p: Point, kind: str) -> int:
        i = self._index.get(p)
        if i is not None:
            if _KIND_RANK[kind] < _KIND_RANK[self.kinds[i]]:
                self.kinds[i] = kind
            return i
        i = len(self.coords)
        self.coords.append(p)
        self.kinds.append(kind)
        self._index[p] = i
        return i

    def add_edge(self, u: int, v: int) -> None:
        if u == v:
            return
        key = (u, v) if u < v else (v, u)
        if key in self._edge_set:
            return
        self._edge_set.add(key)
        self.edges.append((u, v, dist(self.coords[u], self.coords[v])))

    def adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    @property
    def weight(self) -> float:
        return math.fsum(sorted(w for _, _, w in self.edges))


@dataclass(frozen=True)
class SecondaryBp:
    """A secondary break point on the sub-path of one surface."""

    arc: float
    edge: int  # sub-path edge index
    frac: float  # position within the edge
    point: Point
    plane: PlanePoint
    at_vertex: int  # local vertex index if it coincides with one, else -1
    steiner: int  # index of the nearest Steiner point on the cross line


@dataclass
class SurfaceGadget:
    """Planar construction data for one folded surface."""

    surface: FoldedSurface
    degenerate: bool
    input_locals: list[int] = field(default_factory=list)
    vertex_images: list[PlanePoint] = field(default_factory=list)
    secondary: list[SecondaryBp] = field(default_factory=list)
    ell_a: PlanePoint | None = None
    ell_b: PlanePoint | None = None
    ell_steiner: list[PlanePoint] = field(default_factory=list)
    r_local: int = -1
    assignments: dict[int, tuple[PlanePoint, int]] = field(default_factory=dict)
    core: CoreGraph | None = None
    core_tree: Tree | None = None


def _nearest_steiner(steiner: list[PlanePoint], q: PlanePoint) -> int:
    return min(range(len(steiner)), key=lambda i: (dist(steiner[i], q), i))


def _line_hit(radius_dir: float, c: float, phi: float) -> float:
    """Radius where the ray at angle ``radius_dir`` meets the cross line."""
    return c / math.cos(radius_dir - phi)


def build_gadget(
    surf: FoldedSurface, input_locals: list[int], eps_int: float, lam: float = 1.25
) -> SurfaceGadget:
    """Planar gadget for one surface.

    ``input_locals`` lists the sub-path vertex indices holding input
    points (the root excluded).  Without any the gadget degenerates to
    the direct spoke plus the sub-path, mirroring the phase-1 graph.
    """
    if len(surf.verts) < 2:
        raise EmptySurface(f"surface {surf.index} has no edges")
    if not 0.0 < eps_int <= 0.25:
        raise EpsOutOfRange(f"eps_int={eps_int} outside (0, 1/4]")
    imgs = [unfold_vertex(surf, j) for j in range(len(surf.verts))]
    if not input_locals:
        return SurfaceGadget(surf, True, [], imgs)

    subpath = Polyline(surf.verts)
    total_len = subpath.total_length
    theta_count = math.ceil(math.sqrt(1.0 / eps_int))

    # Secondary break points at arc q*W/theta for q = 1..theta.
    secondary: list[SecondaryBp] = []
    vtol = 1e-12 * max(total_len, 1.0)
    for q in range(1, theta_count + 1):
        arc = q * total_len / theta_count
        pos = subpath.locate(arc)
        j, t = pos.segment_index, pos.t
        seg_len = subpath.cum_len[j + 1] - subpath.cum_len[j]
        at_vertex = -1
        frac = t / seg_len if seg_len > 0 else 0.0
        if t <= vtol:
            at_vertex, frac = j, 0.0
        elif t >= seg_len - vtol:
            at_vertex, frac = j + 1, 1.0
        if at_vertex >= 0:
            point = surf.verts[at_vertex]
            plane = imgs[at_vertex]
        else:
            point = subpath.point_at(pos)
            a, b = imgs[j], imgs[j + 1]
            plane = (a[0] + frac * (b[0] - a[0]), a[1] + frac * (b[1] - a[1]))
        secondary.append(SecondaryBp(arc, j, frac, point, plane, at_vertex, -1))

    r_local = min(input_locals, key=lambda j: (surf.vertex_radius(j), j))
    r_img = imgs[r_local]
    r_rad = surf.vertex_radius(r_local)
    total_angle = surf.total_angle

    if total_angle < 1e-9:
        ell_a = ell_b = (r_rad, 0.0)
        steiner = [ell_a]
    else:
        phi = 0.5 * total_angle
        c = r_img[0] * math.cos(phi) + r_img[1] * math.sin(phi)
        t_ell = c / math.cos(phi)
        ell_a = (t_ell, 0.0)
        ell_b = (t_ell * math.cos(total_angle), t_ell * math.sin(total_angle))
        steiner = [
            (
                ell_a[0] + (ell_b[0] - ell_a[0]) * q / (theta_count - 1),
                ell_a[1] + (ell_b[1] - ell_a[1]) * q / (theta_count - 1),
            )
            for q in range(theta_count)
        ] if theta_count > 1 else [ell_a]
        phi_c = (phi, c)

    def project(q: PlanePoint) -> PlanePoint:
        # Intersection of line(root, q) with the cross line.
        if total_angle < 1e-9:
            return (r_rad, 0.0)
        ang = math.atan2(q[1], q[0])
        rr = _line_hit(ang, phi_c[1], phi_c[0])
        return (rr * math.cos(ang), rr * math.sin(ang))

    secondary = [
        SecondaryBp(
            sb.arc,
            sb.edge,
            sb.frac,
            sb.point,
            sb.plane,
            sb.at_vertex,
            _nearest_steiner(steiner, project(sb.plane)),
        )
        for sb in secondary
    ]
    assignments = {
        j: (project(imgs[j]), _nearest_steiner(steiner, project(imgs[j])))
        for j in input_locals
    }

    gadget = SurfaceGadget(
        surf,
        False,
        list(input_locals),
        imgs,
        secondary,
        ell_a,
        ell_b,
        steiner,
        r_local,
        assignments,
    )
    _attach_core(gadget, eps_int, lam)
    return gadget


def _attach_core(gadget: SurfaceGadget, eps_int: float, lam: float) -> None:
    """Build the recursive triangle tree over the cross line."""
    a, b = gadget.ell_a, gadget.ell_b
    if dist(a, b) < 1e-12 * max(1.0, a[0]):
        return  # zero-width triangle; realized as a single spoke edge
    total = gadget.surface.total_angle
    eps_core = max(eps_int, total * total)
    inst = CoreInstance((0.0, 0.0), a, b, tuple(gadget.ell_steiner), eps_core, lam)
    core = build_core(inst)
    tree, _ = core_spt(core)
    gadget.core = core
    gadget.core_tree = tree


def assemble_slt(
    pts: PointCloud,
    eps: float,
    gamma: float = 8.0,
    lam: float = 1.25,
    chord_shortcut: bool = False,
):
    """Build the Steiner SLT: returns (graph, tree, report).

    The tree is the union of shortest paths from the root to the input
    points inside the assembled graph; unused Steiner vertices are
    pruned.  Stretch is controlled by running the folding machinery at
    the internal parameter eps/gamma.
    """
    if pts.n < 2:
        raise ValueError("need at least two points")
    if not 0.0 < eps <= 0.25:
        raise EpsOutOfRange(f"eps={eps} outside (0, 1/4]")
    if gamma < 1.0:
        raise ValueError("gamma must be at least 1")
    eps_int = eps / gamma

    mst = euclidean_mst(pts)
    ham = dfs_hamiltonian(mst, pts)
    bps = select_breakpoints(ham, eps_int)
    sub = subdivide(ham, bps)
    s = pts.points[pts.root]
    surfaces = build_surfaces(sub, s)

    G = SteinerGraph()
    input_ids = [G.add_vertex(p, "input") for p in pts.points]
    root_id = input_ids[pts.root]

    for surf in surfaces:
        vids = [G.add_vertex(v, "break") for v in surf.verts]
        input_locals = [
            j for j, vid in enumerate(vids) if vid < pts.n and vid != root_id
        ]
        is_root_surface = vids[0] == root_id
        gadget = build_gadget(
            surf, [] if is_root_surface else input_locals, eps_int, lam
        )
        _realize(G, gadget, vids, root_id, chord_shortcut)

    adj = G.adjacency()
    dists, parent = dijkstra(G.n, adj, root_id)
    for i in input_ids:
        if math.isinf(dists[i]):
            raise Unreachable(f"input point {i} not reachable")

    tree_graph, tree, old_to_new = _prune(G, parent, input_ids, root_id)

    per_point = []
    for i, p in enumerate(pts.points):
        if i == pts.root:
            per_point.append(1.0)
        else:
            per_point.append(dists[input_ids[i]] / dist(s, p))
    hw = sub.hstar.total_length
    phase1 = hw + math.fsum(dist(s, q) for q in bps.points[1:])
    report = SltReport(
        n=pts.n,
        d=pts.dim,
        eps=eps,
        gamma=gamma,
        mst_weight=mst.weight,
        tree_weight=tree.weight,
        lightness=tree.weight / mst.weight,
        per_point_stretch=per_point,
        max_stretch=max(per_point),
        surface_angles=[f.total_angle for f in surfaces],
        phase1_weight=phase1,
        flags={
            "truncated_surfaces": sum(1 for f in surfaces if f.truncated),
            "surfaces": len(surfaces),
            "graph_vertices": G.n,
            "graph_edges": len(G.edges),
            "pruned_vertices": G.n - tree_graph.n,
            "chord_shortcut": chord_shortcut,
        },
    )
    return tree_graph, tree, report


def _realize(
    G: SteinerGraph,
    gadget: SurfaceGadget,
    vids: list[int],
    root_id: int,
    chord_shortcut: bool,
) -> None:
    """Lift the gadget into R^d and add its edges to the graph."""
    surf = gadget.surface

    # Sub-path edges, with secondary break points inserted as vertices.
    sec_ids: list[int] = []
    per_edge: dict[int, list[tuple[float, int]]] = {}
    for sb in gadget.secondary:
        if sb.at_vertex >= 0:
            sec_ids.append(vids[sb.at_vertex])
            continue
        vid = G.add_vertex(sb.point, "secondary_break")
        sec_ids.append(vid)
        per_edge.setdefault(sb.edge, []).append((sb.frac, vid))
    for j in range(len(surf.verts) - 1):
        chain = [vids[j]]
        chain.extend(v for _, v in sorted(per_edge.get(j, ())))
        chain.append(vids[j + 1])
        for u, v in zip(chain, chain[1:]):
            G.add_edge(u, v)

    if gadget.degenerate:
        if vids[0] != root_id:
            G.add_edge(root_id, vids[0])  # phase-1 spoke
        return

    plane_ids: dict[PlanePoint, int] = {}
    for img, vid in zip(gadget.vertex_images, vids):
        plane_ids.setdefault(img, vid)
    for sb, vid in zip(gadget.secondary, sec_ids):
        plane_ids.setdefault(sb.plane, vid)

    def register(q: PlanePoint, kind: str) -> int:
        known = plane_ids.get(q)
        if known is not None:
            return known
        if math.hypot(q[0], q[1]) < 1e-15:
            vid = root_id
        else:
            vid = G.add_vertex(lift(surf, q), kind)
        plane_ids[q] = vid
        return vid

    def add_planar_edge(q1: PlanePoint, q2: PlanePoint, kind1: str, kind2: str) -> None:
        u = register(q1, kind1)
        v = register(q2, kind2)
        if u == v:
            return
        if chord_shortcut:
            G.add_edge(u, v)
            return
        poly = lift_segment(surf, q1, q2)
        chain = [u]
        for p in poly.vertices[1:-1]:
            chain.append(G.add_vertex(p, "bend"))
        chain.append(v)
        for x, y in zip(chain, chain[1:]):
            G.add_edge(x, y)

    steiner = gadget.ell_steiner
    if gadget.core is None:
        # Zero-width triangle: single spoke from the root to the line point.
        add_planar_edge((0.0, 0.0), steiner[0], "bend", "ell_steiner")
    else:
        core = gadget.core
        plane_of_core = [core.plane_coords(i) for i in range(core.n)]
        # The core root is the surface apex; its input vertices are the
        # Steiner points on the cross line, registered with their original
        # planar coordinates so shared vertices deduplicate exactly.
        overrides: dict[int, PlanePoint] = {core.root: (0.0, 0.0)}
        for cid, q in zip(core.input_ids, steiner):
            overrides[cid] = q
        kinds = {
            "root": "bend",
            "apex": "core_apex",
            "grid": "ell_steiner",
            "input": "ell_steiner",
        }
        for u, v, _ in gadget.core_tree.edges:
            qu = overrides.get(u, plane_of_core[u])
            qv = overrides.get(v, plane_of_core[v])
            add_planar_edge(qu, qv, kinds[core.kinds[u]], kinds[core.kinds[v]])

    for sb, vid in zip(gadget.secondary, sec_ids):
        b_prime = steiner[sb.steiner]
        u = register(b_prime, "ell_steiner")
        if u == vid:
            continue
        if chord_shortcut:
            G.add_edge(u, vid)
            continue
        poly = lift_segment(surf, b_prime, sb.plane)
        chain = [u]
        for p in poly.vertices[1:-1]:
            chain.append(G.add_vertex(p, "bend"))
        chain.append(vid)
        for x, y in zip(chain, chain[1:]):
            G.add_edge(x, y)


def _prune(G: SteinerGraph, parent: list[int], targets: list[int], root_id: int):
    """Union of root paths to the targets, compacted to a fresh graph."""
    used: list[int] = []
    seen = [False] * G.n
    for t in targets:
        v = t
        while v != -1 and not seen[v]:
            seen[v] = True
            used.append(v)
            v = parent[v]
    used.sort()
    old_to_new = {old: new for new, old in enumerate(used)}
    sub = SteinerGraph()
    for old in used:
        sub.add_vertex(G.coords[old], G.kinds[old])
    edges = []
    for old in used:
        p = parent[old]
        if old == root_id or p == -1:
            continue
        u, v = old_to_new[p], old_to_new[old]
        w = dist(G.coords[p], G.coords[old])
        edges.append((u, v, w))
        sub.add_edge(u, v)
    tree = Tree(len(used), tuple(edges), old_to_new[root_id])
    return sub, tree, old_to_new
