"""Boolean model: nerves of placed grains, a raster oracle for the union's
topology in the plane, and grain configuration files."""
from __future__ import annotations

import itertools
import json
import math
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components as _cc

from .complex import SimplicialComplex, build_complex
from .errors import CapabilityError, RejectedInputError
from .grains import Grain, PlacedGrain, grains_intersect, unit_ball_volume
from .kernels import grain_intersection
from .pointprocess import PointConfiguration, Window, from_points


def build_nerve(config: PointConfiguration, alpha: int, *, direct: bool = False) -> SimplicialComplex:
    """alpha-skeleton of the nerve of the grains carried as marks by ``config``.

    Above d+1 vertices the common-point test is inferred from the faces
    (Helly) unless ``direct`` is set.
    """
    for m in config.marks:
        if not isinstance(m, Grain):
            raise RejectedInputError(f"nerve construction needs Grain marks, got {type(m).__name__}")
    return build_complex(config, grain_intersection(alpha), direct=direct)


def grains_to_config(grains: Sequence[PlacedGrain], *, master_seed: int = 0) -> PointConfiguration:
    """Wrap explicit placed grains into a configuration whose window covers
    every centre."""
    if not grains:
        return from_points(Window(2, 1.0), [], [], master_seed=master_seed)
    centers = np.array([g.center for g in grains], dtype=float)
    lo, hi = centers.min(axis=0), centers.max(axis=0)
    side = float((hi - lo).max()) + 2.0
    window = Window(centers.shape[1], side, tuple((lo + hi) / 2))
    return from_points(window, centers, [g.grain for g in grains], master_seed=master_seed)


def config_to_grains(config: PointConfiguration) -> list[PlacedGrain]:
    return [PlacedGrain(tuple(p), m) for p, m in zip(config.positions, config.marks)]


def nerve_of_grains(grains: Sequence[PlacedGrain], alpha: int, *, direct: bool = False) -> SimplicialComplex:
    """Nerve with vertex ids 0..n-1 in the order of ``grains``."""
    return build_nerve(grains_to_config(grains), alpha, direct=direct)


def intersection_graph_components(grains: Sequence[PlacedGrain]) -> int:
    """Number of components of the pairwise-intersection graph."""
    n = len(grains)
    if n == 0:
        return 0
    rows, cols = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if grains_intersect([grains[i], grains[j]]):
                rows.append(i)
                cols.append(j)
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return int(_cc(graph, directed=False)[0])


def _line_intervals(grains: Sequence[PlacedGrain], axis: int, value: float) -> list[tuple[float, float]]:
    """Closed intervals cut from the line ``coordinate[axis] == value`` by the
    grains, in the other coordinate."""
    other = 1 - axis
    out = []
    for g in grains:
        off = value - g.center[axis]
        if g.grain.kind == "ball":
            h2 = g.grain.radius**2 - off * off
            if h2 >= 0:
                h = math.sqrt(h2)
                out.append((g.center[other] - h, g.center[other] + h))
        elif abs(off) <= g.grain.half_widths[axis]:
            hw = g.grain.half_widths[other]
            out.append((g.center[other] - hw, g.center[other] + hw))
    return sorted(out)


def _boundary_vertices(grains: Sequence[PlacedGrain]) -> np.ndarray:
    """Corners of the union's boundary: circle-circle crossings for balls,
    box corners and edge crossings for boxes."""
    pts = []
    for a, b in itertools.combinations(grains, 2):
        if a.grain.kind == "ball" and b.grain.kind == "ball":
            ca, cb = np.asarray(a.center), np.asarray(b.center)
            ra, rb = a.grain.radius, b.grain.radius
            d = float(np.linalg.norm(cb - ca))
            if d == 0 or d > ra + rb or d < abs(ra - rb):
                continue
            t = (d * d + ra * ra - rb * rb) / (2 * d)
            h = math.sqrt(max(ra * ra - t * t, 0.0))
            u = (cb - ca) / d
            mid = ca + t * u
            pts += [mid + h * np.array([-u[1], u[0]]), mid - h * np.array([-u[1], u[0]])]
        elif a.grain.kind == "box" and b.grain.kind == "box":
            for p, q in ((a, b), (b, a)):
                for sx, sy in itertools.product((-1, 1), repeat=2):
                    pts.append((p.center[0] + sx * p.grain.half_widths[0], q.center[1] + sy * q.grain.half_widths[1]))
    for g in grains:
        if g.grain.kind == "box":
            for sx, sy in itertools.product((-1, 1), repeat=2):
                pts.append((g.center[0] + sx * g.grain.half_widths[0], g.center[1] + sy * g.grain.half_widths[1]))
    return np.array(pts, dtype=float).reshape(-1, 2)


def _strictly_inside_any(grains: Sequence[PlacedGrain], pts: np.ndarray, tol: float) -> np.ndarray:
    inside = np.zeros(len(pts), dtype=bool)
    for g in grains:
        diff = pts - np.asarray(g.center)
        if g.grain.kind == "ball":
            inside |= np.linalg.norm(diff, axis=1) < g.grain.radius - tol
        else:
            inside |= np.all(np.abs(diff) < np.asarray(g.grain.half_widths) - tol, axis=1)
    return inside


def rasterize(grains: Sequence[PlacedGrain], resolution: int, margin: float = 0.0):
    """Pixel grid of the union: a pixel is occupied iff its closed square lies
    inside the union.

    Equivalently a pixel is empty iff its square meets the complement, which
    it does iff some stretch of its boundary edges lies outside every grain
    or some corner of the union's boundary falls inside it. Every connected
    piece of the complement therefore maps to an 8-connected set of empty
    pixels, however thin it is (the cusps where two circles cross at a
    shallow angle are the case that centre sampling gets wrong).

    Returns (grid, origin) where ``grid[i, j]`` is the square
    ``origin + [j, j + 1] x [i, i + 1] / resolution``.
    """
    if any(g.dim != 2 for g in grains):
        raise RejectedInputError("rasterisation is only available in the plane")
    if len({g.grain.kind for g in grains}) > 1:
        raise CapabilityError("rasterisation of mixed balls and boxes is not supported")
    reach = np.array([g.grain.circumradius for g in grains])
    centers = np.array([g.center for g in grains], dtype=float)
    lo = (centers - reach[:, None]).min(axis=0) - 2.0 / resolution - margin
    hi = (centers + reach[:, None]).max(axis=0) + 2.0 / resolution + margin
    nx, ny = (np.ceil((hi - lo) * resolution).astype(int))
    empty = np.zeros((ny, nx), dtype=bool)
    # horizontal grid lines bound rows i-1 and i; vertical lines columns j-1 and j
    for axis, n_lines, n_cells in ((1, ny + 1, nx), (0, nx + 1, ny)):
        view = empty if axis == 1 else empty.T
        other = 1 - axis
        for i in range(n_lines):
            edge, end = lo[other], lo[other] + n_cells / resolution
            gaps = []
            for a, b in _line_intervals(grains, axis, lo[axis] + i / resolution):
                if a > edge:
                    gaps.append((edge, a))
                edge = max(edge, b)
            if edge < end:
                gaps.append((edge, end))
            for a, b in gaps:
                k0 = max(int(math.floor((a - lo[other]) * resolution)), 0)
                k1 = min(int(math.ceil((b - lo[other]) * resolution)), n_cells)
                view[max(i - 1, 0):min(i + 1, n_lines - 1), k0:k1] = True
    verts = _boundary_vertices(grains)
    if len(verts):
        free = verts[~_strictly_inside_any(grains, verts, 1e-12 * max(1.0, float(np.abs(verts).max())))]
        ij = np.floor((free - lo) * resolution).astype(int)
        ok = (ij[:, 0] >= 0) & (ij[:, 0] < nx) & (ij[:, 1] >= 0) & (ij[:, 1] < ny)
        empty[ij[ok, 1], ij[ok, 0]] = True
    return ~empty, lo


def raster_betti_2d(grains: Sequence[PlacedGrain], resolution: int) -> tuple[int, int]:
    """(beta_0, beta_1) of the union of planar grains from a pixel grid.

    Occupied pixels are vertices, 4-adjacent occupied pairs edges and fully
    occupied 2x2 blocks squares; beta_0 comes from 4-connected labelling and
    beta_1 = beta_0 - (V - E + F).
    """
    if resolution < 64:
        raise RejectedInputError("resolution must be at least 64 pixels per unit")
    if not grains:
        return 0, 0
    grid, _ = rasterize(grains, int(resolution))
    v = int(grid.sum())
    e = int((grid[:, 1:] & grid[:, :-1]).sum() + (grid[1:, :] & grid[:-1, :]).sum())
    f = int((grid[1:, 1:] & grid[1:, :-1] & grid[:-1, 1:] & grid[:-1, :-1]).sum())
    _, b0 = ndimage.label(grid)  # default structure is 4-connectivity
    return int(b0), int(b0 - (v - e + f))


def mixing_parameter_bound(gamma: float, radius: float, d: int = 2) -> float:
    """Almost-sure bound gamma (2R)^d vol(B(0,1)) on the mixing parameter
    when every grain lies in B(0, R)."""
    if radius <= 0 or gamma < 0:
        raise RejectedInputError("need R > 0 and gamma >= 0")
    return float(gamma) * (2.0 * radius) ** d * unit_ball_volume(d)


# ---------------------------------------------------------------------------
# files


def grains_to_json(grains: Sequence[PlacedGrain]) -> dict:
    return {"schema": 1, "grains": [g.to_json() for g in grains]}


def grains_from_json(obj) -> list[PlacedGrain]:
    """Accepts ``{"grains": [...]}`` or a bare list of grain records."""
    records = obj["grains"] if isinstance(obj, dict) else obj
    if not isinstance(records, list):
        raise RejectedInputError("grain file must hold a list of grains")
    return [PlacedGrain.from_json(r) for r in records]


def load_grains(path) -> list[PlacedGrain]:
    with open(path) as fh:
        return grains_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# hand-built configurations


def disk_ring(n: int, ring_radius: float, center=(0.0, 0.0), radius: float = 1.0) -> list[PlacedGrain]:
    """n equal disks evenly spaced on a circle."""
    g = Grain.ball(radius)
    return [
        PlacedGrain((center[0] + ring_radius * math.cos(2 * math.pi * k / n),
                     center[1] + ring_radius * math.sin(2 * math.pi * k / n)), g)
        for k in range(n)
    ]


def ring6() -> list[PlacedGrain]:
    """Six unit disks on a circle of radius 1.8: neighbours overlap, the rest
    do not, leaving a hole in the middle."""
    return disk_ring(6, 1.8)


def fig2_like() -> list[PlacedGrain]:
    """29 unit disks with six components, one of which carries three holes.

    Three six-disk rings centred at x = 0, 10, 20 are joined by straight
    chains of three disks; five isolated disks sit below.
    """
    unit = Grain.ball(1.0)
    grains: list[PlacedGrain] = []
    for cx in (0.0, 10.0, 20.0):
        grains += disk_ring(6, 1.8, (cx, 0.0))
    for cx in (0.0, 10.0):
        grains += [PlacedGrain((cx + x, 0.0), unit) for x in (3.4, 5.0, 6.6)]
    grains += [PlacedGrain((-2.0 + 6.0 * k, -6.0), unit) for k in range(5)]
    return grains
