"""Command-line front end: instance generators, JSON files, SVG rendering.

All files are canonical JSON (sorted keys, shortest round-trip floats) so
repeated runs with the same seed produce byte-identical output.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys

from .breakpoints import select_breakpoints, subdivide
from .core2d import CoreInstance, build_core, core_metrics, core_spt
from .errors import SltError
from .geometry import dist
from .metrics import SltReport, tree_distances
from .mst_path import PointCloud, Tree, dfs_hamiltonian, euclidean_mst
from .pipeline import SteinerGraph, assemble_slt, build_gadget
from .pyramid import GridSpec, build_pyramid_core, grid_points
from .unfolding import build_surfaces, unfold_vertex


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(", ", ": ")) + "\n"


def write_points(path, points, root):
    data = {
        "dim": len(points[0]),
        "points": [list(p) for p in points],
        "root": root,
    }
    with open(path, "w") as fh:
        fh.write(canonical_dumps(data))


def parse_points(path) -> PointCloud:
    with open(path) as fh:
        data = json.load(fh)
    dim = data["dim"]
    pts = tuple(tuple(float(c) for c in p) for p in data["points"])
    if any(len(p) != dim for p in pts):
        raise SltError("point with wrong dimension")
    return PointCloud(pts, int(data["root"]))


def write_tree(path, graph: SteinerGraph, tree: Tree):
    data = {
        "vertices": [
            {"id": i, "coords": list(graph.coords[i]), "kind": graph.kinds[i]}
            for i in range(graph.n)
        ],
        "edges": sorted([min(u, v), max(u, v)] for u, v, _ in tree.edges),
        "root": tree.root,
    }
    with open(path, "w") as fh:
        fh.write(canonical_dumps(data))


def parse_tree(path):
    with open(path) as fh:
        data = json.load(fh)
    verts = sorted(data["vertices"], key=lambda v: v["id"])
    coords = [tuple(float(c) for c in v["coords"]) for v in verts]
    kinds = [v["kind"] for v in verts]
    edges = [(int(u), int(v)) for u, v in data["edges"]]
    return coords, kinds, edges, int(data["root"])


# --- generators --------------------------------------------------------------


def gen_circle(eps: float):
    m = math.ceil(math.sqrt(1.0 / eps))
    pts = tuple(
        (math.cos(2.0 * math.pi * j / m), math.sin(2.0 * math.pi * j / m))
        for j in range(m)
    )
    return pts, 0


def gen_grid(d: int, n: int, eps: float):
    spec = GridSpec.for_points(n, d)
    base = grid_points(d, eps, spec)
    apex = (math.cos(math.sqrt(eps) / 2.0),) + (0.0,) * (d - 1)
    return (apex,) + base, 0


def gen_random(n: int, d: int, seed: int):
    rng = random.Random(seed)
    pts = tuple(tuple(rng.random() for _ in range(d)) for _ in range(n))
    return pts, 0


def gen_core(eps: float, n: int):
    inst = CoreInstance.canonical(eps, n)
    pts = (inst.apex, inst.base_a, inst.base_b) + inst.base_points
    return pts, 0


# --- build methods ------------------------------------------------------------


def _build_core2d(pc: PointCloud, eps: float, lam: float):
    if pc.dim != 2:
        raise SltError("core2d method needs 2-dimensional input")
    apex = pc.points[pc.root]
    base = [p for i, p in enumerate(pc.points) if i != pc.root]
    ax = [p[0] for p in base]
    lo = base[min(range(len(base)), key=lambda i: ax[i])]
    hi = base[max(range(len(base)), key=lambda i: ax[i])]
    inst = CoreInstance(apex, lo, hi, tuple(base), eps, lam)
    g = build_core(inst)
    tree, dists = core_spt(g)
    rep = core_metrics(g, tree, dists)
    graph = SteinerGraph()
    for i in range(g.n):
        x, y = g.plane_coords(i)
        kind = {"root": "input", "apex": "core_apex", "grid": "grid", "input": "input"}[
            g.kinds[i]
        ]
        graph.add_vertex((x, y), kind)
    for u, v, _ in tree.edges:
        graph.add_edge(u, v)
    report = SltReport(
        n=pc.n,
        d=2,
        eps=eps,
        gamma=1.0,
        mst_weight=rep.mst_weight,
        tree_weight=rep.tree_weight,
        lightness=rep.lightness,
        per_point_stretch=rep.per_point_stretch,
        max_stretch=rep.max_stretch,
        surface_angles=[g.alpha * g.lam**i for i in range(g.k + 1)],
        phase1_weight=0.0,
        flags={"levels": g.k, "chain_total": rep.chain_total},
    )
    scaled_tree = Tree(
        graph.n,
        tuple((u, v, dist(graph.coords[u], graph.coords[v])) for u, v, _ in tree.edges),
        tree.root,
    )
    return graph, scaled_tree, report


def _build_pyramid(pc: PointCloud, eps: float, lam: float):
    d = pc.dim
    n = pc.n - 1
    expected, root = gen_grid(d, n, eps)
    if root != pc.root or len(expected) != pc.n:
        raise SltError("input is not a pyramid grid instance")
    scale = max(dist(expected[0], expected[1]), 1.0)
    for p, q in zip(expected, pc.points):
        if dist(p, q) > 1e-9 * scale:
            raise SltError(
                "input does not match the pyramid grid layout for this eps"
            )
    return build_pyramid_core(d, eps, GridSpec.for_points(n, d), lam)


# --- svg ----------------------------------------------------------------------


def _svg_header(width, height):
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.0f} {height:.0f}">\n'
    )


class _Canvas:
    """Collects primitives in world coordinates, emits pixel-space SVG.

    The y axis is flipped at render time so larger y draws upward.
    """

    def __init__(self, size=760.0, margin=30.0):
        self.size = size
        self.margin = margin
        self.lines: list[tuple] = []
        self.dots: list[tuple] = []
        self.bounds = [math.inf, math.inf, -math.inf, -math.inf]

    def _touch(self, x, y):
        b = self.bounds
        b[0], b[1] = min(b[0], x), min(b[1], y)
        b[2], b[3] = max(b[2], x), max(b[3], y)

    def line(self, p, q, stroke="black", dashed=False):
        self._touch(*p)
        self._touch(*q)
        self.lines.append((p, q, stroke, dashed))

    def dot(self, p, fill="black", r=2.5):
        self._touch(*p)
        self.dots.append((p, fill, r))

    def render(self) -> str:
        x0, y0, x1, y1 = self.bounds
        if not math.isfinite(x0):
            x0 = y0 = 0.0
            x1 = y1 = 1.0
        span = max(x1 - x0, y1 - y0, 1e-12)
        s = (self.size - 2 * self.margin) / span

        def px(p):
            return (
                self.margin + (p[0] - x0) * s,
                self.margin + (y1 - p[1]) * s,
            )

        out = [_svg_header(self.size, self.size)]
        for p, q, stroke, dashed in self.lines:
            (xa, ya), (xb, yb) = px(p), px(q)
            dash = ' stroke-dasharray="4 3"' if dashed else ""
            out.append(
                f'<line x1="{xa:.2f}" y1="{ya:.2f}" x2="{xb:.2f}" y2="{yb:.2f}" '
                f'stroke="{stroke}" stroke-width="1"{dash}/>'
            )
        for p, fill, r in self.dots:
            (cx, cy) = px(p)
            out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r}" fill="{fill}"/>')
        out.append("</svg>")
        return "\n".join(out)


_KIND_FILL = {
    "input": "black",
    "break": "#8888aa",
    "secondary_break": "#999999",
    "ell_steiner": "#777777",
    "grid": "#aaaaaa",
    "core_apex": "#666666",
    "bend": "#bbbbbb",
}


def render_tree_svg(coords, kinds, edges, path):
    cv = _Canvas()
    for u, v in edges:
        cv.line(coords[u][:2], coords[v][:2], stroke="black")
    for p, k in zip(coords, kinds):
        cv.dot(p[:2], fill=_KIND_FILL.get(k, "gray"), r=3.0 if k == "input" else 1.6)
    with open(path, "w") as fh:
        fh.write(cv.render())


def render_surfaces_svg(pc: PointCloud, eps: float, gamma: float, path):
    """Unfolded planar gadget of every surface, laid out side by side."""
    eps_int = eps / gamma
    mst = euclidean_mst(pc)
    ham = dfs_hamiltonian(mst, pc)
    bps = select_breakpoints(ham, eps_int)
    sub = subdivide(ham, bps)
    s = pc.points[pc.root]
    surfaces = build_surfaces(sub, s)
    cv = _Canvas(size=1200.0)
    offset = 0.0
    for surf in surfaces:
        imgs = [unfold_vertex(surf, j) for j in range(len(surf.verts))]
        rmax = max(surf.vertex_radius(j) for j in range(len(surf.verts)))
        shift = lambda q: (q[0] + offset, q[1])  # noqa: E731
        origin = shift((0.0, 0.0))
        cv.line(origin, shift(imgs[0]), stroke="#444444", dashed=True)
        cv.line(origin, shift(imgs[-1]), stroke="#444444", dashed=True)
        for a, b in zip(imgs, imgs[1:]):
            cv.line(shift(a), shift(b), stroke="black")
        for q in imgs:
            cv.dot(shift(q), fill="black", r=2.0)
        cv.dot(origin, fill="black", r=2.5)
        input_locals = [
            j
            for j in range(len(surf.verts))
            if any(
                surf.verts[j] == pc.points[i] for i in range(pc.n) if i != pc.root
            )
        ]
        gadget = build_gadget(surf, input_locals, eps_int)
        if not gadget.degenerate:
            cv.line(shift(gadget.ell_a), shift(gadget.ell_b), stroke="#888888")
            for q in gadget.ell_steiner:
                cv.dot(shift(q), fill="#777777", r=1.5)
            if gadget.core_tree is not None:
                for u, v, _ in gadget.core_tree.edges:
                    cv.line(
                        shift(gadget.core.plane_coords(u)),
                        shift(gadget.core.plane_coords(v)),
                        stroke="#aaaaaa",
                    )
        offset += 1.25 * rmax
    with open(path, "w") as fh:
        fh.write(cv.render())


# --- commands -----------------------------------------------------------------


def _cmd_gen(args) -> int:
    if args.kind == "circle":
        pts, root = gen_circle(args.eps)
    elif args.kind == "grid":
        pts, root = gen_grid(args.dim, args.n, args.eps)
    elif args.kind == "random":
        seed = args.seed if args.seed is not None else int(os.environ.get("SLT_SEED", "0"))
        pts, root = gen_random(args.n, args.dim, seed)
    elif args.kind == "core":
        pts, root = gen_core(args.eps, args.n)
    else:
        raise SltError(f"unknown generator kind {args.kind!r}")
    write_points(args.output, pts, root)
    return 0


def _cmd_build(args) -> int:
    pc = parse_points(args.input)
    if args.method == "folding":
        graph, tree, report = assemble_slt(
            pc, args.eps, gamma=args.gamma, lam=args.lam, chord_shortcut=args.chord_shortcut
        )
    elif args.method == "core2d":
        graph, tree, report = _build_core2d(pc, args.eps, args.lam)
    elif args.method == "pyramid":
        graph, tree, report = _build_pyramid(pc, args.eps, args.lam)
    else:
        raise SltError(f"unknown method {args.method!r}")
    if args.output:
        write_tree(args.output, graph, tree)
    sys.stdout.write(canonical_dumps(report.as_dict()))
    return 0


def _cmd_verify(args) -> int:
    pc = parse_points(args.input)
    coords, kinds, edges, root = parse_tree(args.tree)
    index = {}
    for i, (c, k) in enumerate(zip(coords, kinds)):
        if k == "input":
            index[c] = i
    vertex_of = []
    for p in pc.points:
        i = index.get(p)
        if i is None:
            raise SltError(f"tree does not contain input point {p}")
        vertex_of.append(i)
    if vertex_of[pc.root] != root:
        raise SltError("tree root does not match the input root")
    tree = Tree(
        len(coords),
        tuple((u, v, dist(coords[u], coords[v])) for u, v in edges),
        root,
    )
    dists = tree_distances(tree, root)
    s = pc.points[pc.root]
    per_point = []
    for i, p in zip(vertex_of, pc.points):
        if math.isinf(dists[i]):
            raise SltError("input point disconnected in tree")
        per_point.append(1.0 if p == s else dists[i] / dist(s, p))
    mst = euclidean_mst(pc)
    report = SltReport(
        n=pc.n,
        d=pc.dim,
        eps=args.eps,
        gamma=0.0,
        mst_weight=mst.weight,
        tree_weight=tree.weight,
        lightness=tree.weight / mst.weight,
        per_point_stretch=per_point,
        max_stretch=max(per_point),
        surface_angles=[],
        phase1_weight=0.0,
        flags={"verified": True},
    )
    out = canonical_dumps(report.as_dict())
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0 if report.max_stretch <= 1.0 + args.eps + 1e-12 else 1


def _cmd_render(args) -> int:
    if args.tree:
        coords, kinds, edges, _ = parse_tree(args.tree)
        if len(coords[0]) == 2:
            render_tree_svg(coords, kinds, edges, args.output)
            return 0
    pc = parse_points(args.input)
    if pc.dim == 2 and not args.surfaces and args.tree is None:
        render_tree_svg(list(pc.points), ["input"] * pc.n, [], args.output)
        return 0
    render_surfaces_svg(pc, args.eps, args.gamma, args.output)
    return 0


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slt", description="Steiner shallow-light trees")
    sp = ap.add_subparsers(dest="cmd", required=True)

    g = sp.add_parser("gen", help="generate a points file")
    g.add_argument("kind", choices=["circle", "grid", "random", "core"])
    g.add_argument("--eps", type=float, default=0.04)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--output", required=True)
    g.set_defaults(func=_cmd_gen)

    b = sp.add_parser("build", help="build a tree from a points file")
    b.add_argument("--method", choices=["folding", "core2d", "pyramid"], default="folding")
    b.add_argument("--eps", type=float, required=True)
    b.add_argument("--gamma", type=float, default=8.0)
    b.add_argument("--lambda", dest="lam", type=float, default=1.25)
    b.add_argument("--chord-shortcut", action="store_true")
    b.add_argument("--input", required=True)
    b.add_argument("--output")
    b.set_defaults(func=_cmd_build)

    v = sp.add_parser("verify", help="measure stretch and lightness of a tree file")
    v.add_argument("--input", required=True)
    v.add_argument("--tree", required=True)
    v.add_argument("--eps", type=float, required=True)
    v.add_argument("--output")
    v.set_defaults(func=_cmd_verify)

    r = sp.add_parser("render", help="render points/tree or unfolded surfaces to SVG")
    r.add_argument("--input", required=True)
    r.add_argument("--tree")
    r.add_argument("--eps", type=float, default=0.04)
    r.add_argument("--gamma", type=float, default=8.0)
    r.add_argument("--surfaces", action="store_true")
    r.add_argument("--output", required=True)
    r.set_defaults(func=_cmd_render)
    return ap


def run_cli(argv=None) -> int:
    ap = make_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except (SltError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())
