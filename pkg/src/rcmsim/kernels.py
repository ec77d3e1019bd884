"""Connection kernels phi_1..phi_alpha.

A level-j evaluator receives a batch of candidate simplices: positions as an
(m, j+1, d) array and marks as a list of m tuples of length j+1, vertices in
ascending id order. It returns an (m,) array of retention probabilities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import CapabilityError, ModelDefinitionError, RejectedInputError
from .grains import EPS_TOL, Grain, PlacedGrain, grains_intersect, unit_ball_volume

Evaluator = Callable[[np.ndarray, Sequence[tuple]], np.ndarray]


def _const(c: float) -> Evaluator:
    def phi(x, marks):
        return np.full(x.shape[0], c, dtype=float)

    return phi


def _disk(r: float) -> Evaluator:
    def phi(x, marks):
        d = x[:, 0, :] - x[:, 1, :]
        return (np.einsum("ij,ij->i", d, d) <= r * r).astype(float)

    return phi


def _exp_distance(rate: float) -> Evaluator:
    def phi(x, marks):
        return np.exp(-rate * np.linalg.norm(x[:, 0, :] - x[:, 1, :], axis=1))

    return phi


def simplex_volumes(x: np.ndarray) -> np.ndarray:
    """j-dimensional volumes of simplices given as an (m, j+1, d) array."""
    edges = x[:, 1:, :] - x[:, :1, :]
    j = edges.shape[1]
    if j > edges.shape[2]:
        return np.zeros(x.shape[0])
    # QR of the edge matrix avoids the square root of a cancelling Gram determinant
    r = np.linalg.qr(np.swapaxes(edges, 1, 2), mode="r")
    return np.abs(np.prod(np.diagonal(r, axis1=1, axis2=2), axis=1)) / math.factorial(j)


def _exp_volume(theta: float) -> Evaluator:
    def phi(x, marks):
        return np.exp(-theta * simplex_volumes(x))

    return phi


def _grain_intersection(x: np.ndarray, marks: Sequence[tuple]) -> np.ndarray:
    out = np.empty(x.shape[0])
    for k in range(x.shape[0]):
        placed = [PlacedGrain(tuple(x[k, i]), g) for i, g in enumerate(marks[k])]
        out[k] = 1.0 if grains_intersect(placed) else 0.0
    return out


def _grain_pairs(x: np.ndarray, marks: Sequence[tuple]) -> np.ndarray:
    # balls are by far the common case; decide them without building objects.
    # Same tolerance as grains_intersect, with near-tangent counted as a hit.
    if all(a.kind == "ball" and b.kind == "ball" for a, b in marks):
        ra = np.array([a.radius for a, _ in marks])
        rb = np.array([b.radius for _, b in marks])
        gap = np.linalg.norm(x[:, 0, :] - x[:, 1, :], axis=1) - ra - rb
        tol = np.where(ra == rb, 2 * EPS_TOL, EPS_TOL)
        return (gap <= tol).astype(float)
    return _grain_intersection(x, marks)


@dataclass
class ConnectionKernel:
    """The family phi_1..phi_alpha.

    ``levels[j-1]`` is phi_j. Levels beyond those provided evaluate to 0, or to
    1 when ``pad_with_one`` is set. ``cutoff(marks)`` optionally bounds the
    distance beyond which phi_1 vanishes for any pair drawn from ``marks``;
    ``helly`` marks an intersection kernel for which simplices of more than
    d+1 vertices are implied by their faces.
    """

    alpha: int
    levels: list[Evaluator]
    name: str = "custom"
    params: dict = field(default_factory=dict)
    pad_with_one: bool = False
    cutoff: Callable[[Sequence[Any]], float] | None = None
    helly: bool = False

    def __post_init__(self):
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise RejectedInputError(f"alpha must be a positive integer, got {self.alpha!r}")

    def evaluate(self, level: int, x: np.ndarray, marks: Sequence[tuple]) -> np.ndarray:
        """Batch evaluation of phi_level with range checking."""
        if level < 1 or level > self.alpha:
            raise RejectedInputError(f"level {level} outside 1..{self.alpha}")
        if level > len(self.levels):
            return np.full(x.shape[0], 1.0 if self.pad_with_one else 0.0)
        vals = np.asarray(self.levels[level - 1](x, marks), dtype=float).reshape(x.shape[0])
        bad = ~((vals >= 0.0) & (vals <= 1.0))
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise ModelDefinitionError(
                f"kernel {self.name!r} level {level} returned {vals[k]!r} outside [0, 1]"
            )
        return vals

    def __call__(self, positions: Sequence[Sequence[float]], marks: Sequence[Any] | None = None) -> float:
        """phi_j of a single simplex given its j+1 vertex positions and marks."""
        x = np.asarray(positions, dtype=float)[None, :, :]
        marks = tuple(marks) if marks is not None else (None,) * x.shape[1]
        return float(self.evaluate(x.shape[1] - 1, x, [marks])[0])

    def describe(self) -> dict:
        return {"name": self.name, "alpha": self.alpha, "params": dict(self.params)}


# ---------------------------------------------------------------------------
# builtins


def constant(c: float, alpha: int = 1) -> ConnectionKernel:
    """phi_j == c at every level."""
    c = float(c)
    return ConnectionKernel(alpha, [_const(c)] * alpha, "constant", {"c": c},
                            cutoff=(lambda marks: 0.0) if c == 0.0 else None)


def geometric(r: float, alpha: int = 1) -> ConnectionKernel:
    """phi_1 = 1{|x - y| <= r}; higher levels vanish unless padded."""
    r = float(r)
    return ConnectionKernel(alpha, [_disk(r)], "geometric", {"r": r}, cutoff=lambda marks: r)


def geometric_plus_p(r: float, p: float, alpha: int = 2) -> ConnectionKernel:
    """phi_1 = 1{|x - y| <= r}, phi_2 == p."""
    r, p = float(r), float(p)
    return ConnectionKernel(alpha, [_disk(r), _const(p)], "geometric-plus-p", {"r": r, "p": p},
                            cutoff=lambda marks: r)


def exponential(rate: float, theta: float, alpha: int = 2) -> ConnectionKernel:
    """phi_1 = exp(-rate |x - y|), phi_2 = exp(-theta * area)."""
    rate, theta = float(rate), float(theta)
    return ConnectionKernel(alpha, [_exp_distance(rate), _exp_volume(theta)], "exponential",
                            {"rate": rate, "theta": theta})


def vietoris_rips(r: float, alpha: int = 2) -> ConnectionKernel:
    """Geometric edges with every clique filled up to dimension alpha."""
    r = float(r)
    return ConnectionKernel(alpha, [_disk(r)], "vietoris-rips", {"r": r}, pad_with_one=True,
                            cutoff=lambda marks: r)


def _grain_cutoff(marks: Sequence[Any]) -> float:
    reach = [m.circumradius for m in marks if isinstance(m, Grain)]
    return 2.0 * max(reach) if reach else 0.0


def grain_intersection(alpha: int = 2) -> ConnectionKernel:
    """phi_j = 1{the j+1 placed grains have a common point}; marks are Grains."""
    levels: list[Evaluator] = [_grain_pairs] + [_grain_intersection] * (alpha - 1)
    return ConnectionKernel(alpha, levels, "indicator-grain-intersection", {},
                            cutoff=_grain_cutoff, helly=True)


_KERNELS: dict[str, Callable[..., ConnectionKernel]] = {
    "constant": constant,
    "geometric": geometric,
    "geometric-plus-p": geometric_plus_p,
    "exponential": exponential,
    "vietoris-rips": vietoris_rips,
    "indicator-grain-intersection": grain_intersection,
}


def register_kernel(name: str, factory: Callable[..., ConnectionKernel]) -> None:
    """Make ``factory(**params, alpha=...)`` available to configs under ``name``."""
    _KERNELS[name] = factory


def make_kernel(name: str, alpha: int | None = None, **params) -> ConnectionKernel:
    try:
        factory = _KERNELS[name]
    except KeyError:
        raise RejectedInputError(f"unknown kernel {name!r}; known: {sorted(_KERNELS)}") from None
    if alpha is not None:
        params["alpha"] = alpha
    return factory(**params)


def kernel_from_json(obj: dict) -> ConnectionKernel:
    return make_kernel(obj["name"], obj.get("alpha"), **obj.get("params", {}))


def pair_integral(kernel: ConnectionKernel, d: int) -> float | None:
    """Closed form of the integral of phi_1((0, a), (y, b)) over y, when the
    kernel ignores marks; None if no closed form is known."""
    if kernel.name in ("geometric", "geometric-plus-p", "vietoris-rips"):
        return unit_ball_volume(d) * kernel.params["r"] ** d
    if kernel.name == "constant":
        if kernel.params["c"] == 0.0:
            return 0.0
        raise CapabilityError("a nonzero constant edge kernel is not integrable over R^d")
    if kernel.name == "exponential":
        # integral of exp(-c|y|) over R^d = d * vol(B_1) * Gamma(d) / c^d
        return d * unit_ball_volume(d) * math.gamma(d) / kernel.params["rate"] ** d
    return None
