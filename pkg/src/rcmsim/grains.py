"""Convex grains (balls and boxes) and their k-wise intersection predicates."""
from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import nnls

from .errors import CapabilityError, RejectedInputError

EPS_TOL = 1e-9


class Overlap(enum.Enum):
    """Outcome of an intersection test."""

    DISJOINT = 0
    INTERSECT = 1
    NEAR_TANGENT = 2

    def __bool__(self) -> bool:  # near-tangent collapses to "intersect"
        return self is not Overlap.DISJOINT


@dataclass(frozen=True)
class Grain:
    """A ball of given radius or an axis-aligned box with given half-widths,
    both centred at the origin."""

    kind: str
    radius: float | None = None
    half_widths: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "ball":
            r = self.radius
            if r is None or not math.isfinite(r) or r <= 0:
                raise RejectedInputError(f"ball radius must be positive and finite, got {r!r}")
        elif self.kind == "box":
            hw = self.half_widths
            if not hw or any((not math.isfinite(h)) or h <= 0 for h in hw):
                raise RejectedInputError(f"box half-widths must be positive and finite, got {hw!r}")
        else:
            raise RejectedInputError(f"unknown grain kind {self.kind!r}")

    @classmethod
    def ball(cls, radius: float) -> "Grain":
        return cls("ball", radius=float(radius))

    @classmethod
    def box(cls, half_widths: Sequence[float]) -> "Grain":
        return cls("box", half_widths=tuple(float(h) for h in half_widths))

    @property
    def circumradius(self) -> float:
        """Radius of the smallest origin-centred ball containing the grain."""
        if self.kind == "ball":
            return self.radius
        return math.sqrt(sum(h * h for h in self.half_widths))

    def volume(self, d: int) -> float:
        if self.kind == "ball":
            return unit_ball_volume(d) * self.radius**d
        return math.prod(2 * h for h in self.half_widths)

    def to_json(self) -> dict:
        if self.kind == "ball":
            return {"ball": {"r": self.radius}}
        return {"box": {"hw": list(self.half_widths)}}

    @classmethod
    def from_json(cls, obj: dict) -> "Grain":
        if "ball" in obj:
            return cls.ball(obj["ball"]["r"])
        if "box" in obj:
            return cls.box(obj["box"]["hw"])
        raise RejectedInputError(f"not a grain record: {obj!r}")


@dataclass(frozen=True)
class PlacedGrain:
    """The translate ``center + grain``."""

    center: tuple[float, ...]
    grain: Grain

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if self.grain.kind == "box" and len(self.grain.half_widths) != len(self.center):
            raise RejectedInputError("box half-widths and center differ in dimension")

    @property
    def dim(self) -> int:
        return len(self.center)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Vectorised closed membership test for an (m, d) array of points."""
        diff = np.asarray(pts, dtype=float) - np.asarray(self.center)
        if self.grain.kind == "ball":
            return np.einsum("ij,ij->i", diff, diff) <= self.grain.radius**2
        return np.all(np.abs(diff) <= np.asarray(self.grain.half_widths), axis=1)

    def to_json(self) -> dict:
        return {"center": list(self.center), **self.grain.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "PlacedGrain":
        return cls(tuple(obj["center"]), Grain.from_json(obj))


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


# ---------------------------------------------------------------------------
# smallest enclosing ball (Welzl)


def _ball_from_support(support: list[np.ndarray]) -> tuple[np.ndarray, float]:
    if not support:
        return np.zeros(0), -1.0
    q0 = support[0]
    if len(support) == 1:
        return q0.copy(), 0.0
    a = np.array([q - q0 for q in support[1:]])
    m = 2.0 * a @ a.T
    b = np.einsum("ij,ij->i", a, a)
    lam = np.linalg.lstsq(m, b, rcond=None)[0]
    center = q0 + lam @ a
    radius = max(float(np.linalg.norm(center - q)) for q in support)
    return center, radius


def _inside(p: np.ndarray, center: np.ndarray, radius: float) -> bool:
    if radius < 0:
        return False
    return float(np.linalg.norm(p - center)) <= radius * (1 + 1e-12) + 1e-15


def smallest_enclosing_ball(points: Sequence[Sequence[float]], seed: int = 0) -> tuple[np.ndarray, float]:
    """Minimum enclosing ball of a point set via Welzl's algorithm.

    Points are shuffled with a fixed seed so the result is deterministic.
    """
    pts = [np.asarray(p, dtype=float) for p in points]
    if not pts:
        raise RejectedInputError("need at least one point")
    d = len(pts[0])
    order = list(range(len(pts)))
    random.Random(seed).shuffle(order)
    pts = [pts[i] for i in order]

    def welzl(n: int, support: list[np.ndarray]) -> tuple[np.ndarray, float]:
        if n == 0 or len(support) == d + 1:
            return _ball_from_support(support)
        p = pts[n - 1]
        center, radius = welzl(n - 1, support)
        if _inside(p, center, radius):
            return center, radius
        return welzl(n - 1, support + [p])

    return welzl(len(pts), [])


# ---------------------------------------------------------------------------
# k-wise intersection


def _boxes_overlap(grains: Sequence[PlacedGrain]) -> Overlap:
    c = np.array([g.center for g in grains])
    hw = np.array([g.grain.half_widths for g in grains])
    lo = (c - hw).max(axis=0)
    hi = (c + hw).min(axis=0)
    return Overlap.INTERSECT if np.all(lo <= hi) else Overlap.DISJOINT


def _equal_balls_overlap(grains: Sequence[PlacedGrain], seed: int, tol: float) -> Overlap:
    r = grains[0].grain.radius
    _, meb = smallest_enclosing_ball([g.center for g in grains], seed=seed)
    if abs(meb - r) <= tol:
        return Overlap.NEAR_TANGENT
    return Overlap.INTERSECT if meb < r else Overlap.DISJOINT


def _lower_bound(x: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> float:
    """Certified lower bound on min_y max_i (|y - c_i| - r_i).

    Uses g_i(y) >= g_i(x) + u_i.(y - x) for the unit vectors u_i at ``x``; any
    convex combination of these affine minorants, restricted to the convex
    hull of the centres (which contains a minimiser), bounds the minimum.
    """
    diff = x - centers
    dist = np.linalg.norm(diff, axis=1)
    g = dist - radii
    units = np.divide(diff, dist[:, None], out=np.zeros_like(diff), where=dist[:, None] > 0)
    reach = float(dist.max())
    best = -math.inf
    gmax = float(g.max())
    for delta in (0.0, 1e-9, 1e-6, 1e-4, 1e-3, 1e-2, 1e-1, math.inf):
        active = np.flatnonzero(g >= gmax - delta)
        u = units[active]
        big = 1e3
        a = np.vstack([u.T, big * np.ones(len(active))])
        b = np.concatenate([np.zeros(u.shape[1]), [big]])
        lam, _ = nnls(a, b)
        s = lam.sum()
        if s <= 0:
            continue
        lam = lam / s
        v = lam @ u
        best = max(best, float(lam @ g[active]) - float(np.linalg.norm(v)) * reach)
    return best


def _balls_overlap(grains: Sequence[PlacedGrain], tol: float, max_iter: int) -> Overlap:
    centers = np.array([g.center for g in grains], dtype=float)
    radii = np.array([g.grain.radius for g in grains], dtype=float)
    n = len(grains)
    if n == 1:
        return Overlap.INTERSECT
    # every pair must meet; pairs are decided in closed form
    for i in range(n):
        for j in range(i + 1, n):
            gap = float(np.linalg.norm(centers[i] - centers[j])) - radii[i] - radii[j]
            if gap > tol:
                return Overlap.DISJOINT
    if n == 2:
        gap = float(np.linalg.norm(centers[0] - centers[1])) - radii.sum()
        return Overlap.NEAR_TANGENT if abs(gap) <= tol else Overlap.INTERSECT

    def value(x):
        return np.linalg.norm(x - centers, axis=1) - radii

    # start from the radius-weighted centroid
    x = (centers * radii[:, None]).sum(axis=0) / radii.sum()
    gx = value(x)
    best_x, best = x, float(gx.max())
    scale = float(np.ptp(centers, axis=0).max() + radii.max())
    for k in range(max_iter):
        if best <= -tol:
            return Overlap.INTERSECT
        i = int(np.argmax(gx))
        d = x - centers[i]
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            # inside the deepest ball's center: g is minimised along this direction
            break
        x = x - (scale / math.sqrt(k + 1.0)) * 0.5 * d / norm
        gx = value(x)
        if gx.max() < best:
            best, best_x = float(gx.max()), x
        if k % 64 == 63 and _lower_bound(best_x, centers, radii) >= tol:
            return Overlap.DISJOINT
    if best <= -tol:
        return Overlap.INTERSECT
    if _lower_bound(best_x, centers, radii) >= tol:
        return Overlap.DISJOINT
    return Overlap.NEAR_TANGENT


def grains_intersect(
    grains: Sequence[PlacedGrain],
    *,
    tol: float = EPS_TOL,
    seed: int = 0,
    max_iter: int = 4000,
) -> Overlap:
    """Decide whether the placed grains have a common point.

    Boxes and equal-radius balls are decided exactly; balls of differing radii
    go through subgradient descent on ``max_i(|x - c_i| - r_i)`` with certified
    upper/lower bounds, returning ``Overlap.NEAR_TANGENT`` when neither bound
    clears ``tol``.
    """
    if not grains:
        raise RejectedInputError("grains_intersect needs at least one grain")
    dims = {g.dim for g in grains}
    if len(dims) != 1:
        raise RejectedInputError(f"grains of mixed dimension {sorted(dims)}")
    kinds = {g.grain.kind for g in grains}
    if len(kinds) != 1:
        raise CapabilityError("mixing balls and boxes is not supported")
    if len(grains) == 1:
        return Overlap.INTERSECT
    if kinds == {"box"}:
        return _boxes_overlap(grains)
    radii = {g.grain.radius for g in grains}
    if len(radii) == 1:
        return _equal_balls_overlap(grains, seed, tol)
    return _balls_overlap(grains, tol, max_iter)
