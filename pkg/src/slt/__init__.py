"""Euclidean Steiner shallow-light trees.

Builds trees over finite point sets in R^d whose root-to-point distances
stay within a 1+eps factor of Euclidean distance while the total weight
stays within O(sqrt(1/eps)) of the minimum spanning tree.
"""

from .errors import (
    AngleOutOfRange,
    AngleOverflow,
    DegenerateRay,
    DimensionMismatch,
    DimensionTooSmall,
    Disconnected,
    DuplicatePoints,
    EmptySurface,
    EpsOutOfRange,
    SltError,
    Unreachable,
)
from .geometry import (
    ArcPosition,
    Point,
    Polyline,
    angle_at_apex,
    dist,
    point_at_arc,
    rotate_in_span,
)
from .mst_path import HamPath, PointCloud, Tree, dfs_hamiltonian, euclidean_mst
from .breakpoints import BreakpointSet, SubdividedPath, select_breakpoints, subdivide
from .unfolding import (
    Cone,
    FoldedSurface,
    build_surfaces,
    lift,
    lift_segment,
    unfold,
    unfold_vertex,
)
from .core2d import CoreGraph, CoreInstance, build_core, core_metrics, core_spt
from .pipeline import SteinerGraph, SurfaceGadget, assemble_slt, build_gadget
from .pyramid import (
    GridSpec,
    Pyramid,
    build_pyramid_core,
    greedy_spanner,
    pyramid_mst_lower_bound,
    yao_spanner,
)
from .metrics import (
    SltReport,
    floyd_warshall,
    kruskal_mst,
    lightness,
    oracle_spt,
    root_stretch,
)

__version__ = "0.1.0"
