"""Marked Poisson point configurations in half-open cubic windows."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from scipy.special import pdtr

from ._hashing import EXTRA_KEY, hash_words, point_seed, point_seeds_np
from .errors import RejectedInputError
from .grains import Grain


@dataclass(frozen=True)
class Window:
    """The half-open cube prod_i [center_i - side/2, center_i + side/2)."""

    dim: int
    side: float
    center: tuple[float, ...] = ()

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise RejectedInputError(f"dimension must be a positive integer, got {self.dim!r}")
        if not math.isfinite(self.side) or self.side <= 0:
            raise RejectedInputError(f"window side must be positive and finite, got {self.side!r}")
        center = tuple(float(c) for c in self.center) if self.center else (0.0,) * self.dim
        if len(center) != self.dim or not all(math.isfinite(c) for c in center):
            raise RejectedInputError(f"bad window center {self.center!r} for d={self.dim}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "side", float(self.side))

    @classmethod
    def centered(cls, dim: int, side: float) -> "Window":
        return cls(dim, side)

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.center) - self.side / 2

    @property
    def upper(self) -> np.ndarray:
        return np.asarray(self.center) + self.side / 2

    def volume(self) -> float:
        return self.side**self.dim

    def contains(self, positions: np.ndarray) -> np.ndarray:
        pos = np.asarray(positions, dtype=float).reshape(-1, self.dim)
        return np.all((pos >= self.lower) & (pos < self.upper), axis=1)

    def is_inside(self, other: "Window") -> bool:
        """True if this window is a subset of ``other``."""
        return bool(np.all(self.lower >= other.lower) and np.all(self.upper <= other.upper))

    def to_json(self) -> dict:
        return {"dim": self.dim, "side": self.side, "center": list(self.center)}

    @classmethod
    def from_json(cls, obj: dict) -> "Window":
        return cls(int(obj["dim"]), float(obj["side"]), tuple(obj.get("center", ())))


@dataclass(frozen=True)
class MarkedPoint:
    id: int
    position: tuple[float, ...]
    mark: Any
    seed: int


# ---------------------------------------------------------------------------
# mark samplers


@dataclass(frozen=True)
class MarkSampler:
    """A named mark distribution. ``draw(rng, n)`` returns a list of n marks."""

    name: str
    params: dict = field(default_factory=dict)

    def draw(self, rng: np.random.Generator, n: int, dim: int) -> list:
        try:
            factory = _MARK_SAMPLERS[self.name]
        except KeyError:
            raise RejectedInputError(f"unknown mark sampler {self.name!r}") from None
        return factory(rng, n, dim, **self.params)

    def to_json(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}

    @classmethod
    def from_json(cls, obj: dict | None) -> "MarkSampler":
        if obj is None:
            return cls("constant")
        return cls(obj["name"], dict(obj.get("params", {})))


def _constant(rng, n, dim, value=None):
    return [value] * n


def _uniform_radius(rng, n, dim, low, high):
    return [Grain.ball(r) for r in rng.uniform(low, high, size=n)]


def _fixed_ball(rng, n, dim, radius):
    g = Grain.ball(radius)
    return [g] * n


def _uniform_box(rng, n, dim, low, high):
    lo = np.broadcast_to(np.asarray(low, dtype=float), (dim,))
    hi = np.broadcast_to(np.asarray(high, dtype=float), (dim,))
    hw = rng.uniform(lo, hi, size=(n, dim))
    return [Grain.box(row) for row in hw]


def _categorical(rng, n, dim, values, probs=None):
    # grain records such as {"ball": {"r": 0.5}} become grains
    values = [Grain.from_json(v) if isinstance(v, dict) and ({"ball", "box"} & set(v)) else v for v in values]
    idx = rng.choice(len(values), size=n, p=probs)
    return [values[i] for i in idx]


_MARK_SAMPLERS: dict[str, Callable[..., list]] = {
    "constant": _constant,
    "uniform-radius": _uniform_radius,
    "fixed-ball": _fixed_ball,
    "uniform-box": _uniform_box,
    "categorical": _categorical,
}


def register_mark_sampler(name: str, factory: Callable[..., list]) -> None:
    """Register ``factory(rng, n, dim, **params) -> list`` under ``name``."""
    _MARK_SAMPLERS[name] = factory


def mark_to_json(mark: Any) -> dict:
    if mark is None:
        return {}
    if isinstance(mark, Grain):
        return mark.to_json()
    return {"value": mark}


def mark_from_json(obj: dict) -> Any:
    if not obj:
        return None
    if "ball" in obj or "box" in obj:
        return Grain.from_json(obj)
    return obj["value"]


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    """Columnar storage of the points of one realisation.

    ``ids`` and ``seeds`` are uint64 arrays, ``positions`` an (n, d) float
    array and ``marks`` a tuple of opaque mark objects.
    """

    window: Window
    ids: np.ndarray
    positions: np.ndarray
    marks: tuple
    seeds: np.ndarray
    intensity: float = 0.0
    mark_sampler: MarkSampler = field(default_factory=lambda: MarkSampler("constant"))
    master_seed: int = 0
    replication: int = 0

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.uint64).reshape(-1)
        pos = np.asarray(self.positions, dtype=float).reshape(len(ids), self.window.dim)
        seeds = np.asarray(self.seeds, dtype=np.uint64).reshape(-1)
        if len(self.marks) != len(ids) or len(seeds) != len(ids):
            raise RejectedInputError("ids, positions, marks and seeds must have equal length")
        if len(np.unique(ids)) != len(ids):
            raise RejectedInputError("point ids must be unique")
        for name, arr in (("ids", ids), ("positions", pos), ("seeds", seeds)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "marks", tuple(self.marks))

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def dim(self) -> int:
        return self.window.dim

    @property
    def points(self) -> list[MarkedPoint]:
        return [
            MarkedPoint(int(i), tuple(float(x) for x in p), m, int(s))
            for i, p, m, s in zip(self.ids, self.positions, self.marks, self.seeds)
        ]

    def _replace(self, ids, positions, marks, seeds, window=None) -> "PointConfiguration":
        return PointConfiguration(
            window or self.window, ids, positions, tuple(marks), seeds,
            self.intensity, self.mark_sampler, self.master_seed, self.replication,
        )

    def take(self, mask_or_index: np.ndarray) -> "PointConfiguration":
        idx = np.flatnonzero(mask_or_index) if np.asarray(mask_or_index).dtype == bool else mask_or_index
        return self._replace(
            self.ids[idx], self.positions[idx], [self.marks[i] for i in idx], self.seeds[idx]
        )

    def next_id(self) -> int:
        return int(self.ids.max()) + 1 if len(self) else 0

    def make_point(self, position: Sequence[float], mark: Any, point_id: int | None = None) -> MarkedPoint:
        """A point that could be added to this configuration, with a
        hash-derived seed and (by default) the next free id."""
        pos = tuple(float(x) for x in position)
        if len(pos) != self.dim:
            raise RejectedInputError(f"position has dimension {len(pos)}, expected {self.dim}")
        pid = self.next_id() if point_id is None else int(point_id)
        return MarkedPoint(pid, pos, mark, point_seed(self.master_seed, self.replication, pid))

    def with_point(self, point: MarkedPoint) -> "PointConfiguration":
        if len(point.position) != self.dim:
            raise RejectedInputError(f"position has dimension {len(point.position)}, expected {self.dim}")
        if np.any(self.ids == np.uint64(point.id)):
            raise RejectedInputError(f"id {point.id} already present")
        return self._replace(
            np.append(self.ids, np.uint64(point.id)),
            np.vstack([self.positions, np.asarray(point.position, dtype=float)[None, :]]),
            self.marks + (point.mark,),
            np.append(self.seeds, np.uint64(point.seed)),
        )

    def fingerprint(self) -> str:
        """Hex digest over all stored bits, used for reproducibility checks."""
        import hashlib

        h = hashlib.sha256()
        for arr in (self.ids, self.positions, self.seeds):
            h.update(np.ascontiguousarray(arr).tobytes())
        h.update(json.dumps([mark_to_json(m) for m in self.marks], sort_keys=True).encode())
        return h.hexdigest()

    def to_json(self) -> dict:
        return {
            "window": self.window.to_json(),
            "gamma": self.intensity,
            "marks": self.mark_sampler.to_json(),
            "master_seed": self.master_seed,
            "replication": self.replication,
            "points": [
                {"id": p.id, "position": list(p.position), "mark": mark_to_json(p.mark), "seed": p.seed}
                for p in self.points
            ],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PointConfiguration":
        window = Window.from_json(obj["window"])
        pts = obj.get("points", [])
        return cls(
            window,
            np.array([p["id"] for p in pts], dtype=np.uint64),
            np.array([p["position"] for p in pts], dtype=float).reshape(len(pts), window.dim),
            tuple(mark_from_json(p.get("mark", {})) for p in pts),
            np.array([p["seed"] for p in pts], dtype=np.uint64),
            float(obj.get("gamma", 0.0)),
            MarkSampler.from_json(obj.get("marks")),
            int(obj.get("master_seed", 0)),
            int(obj.get("replication", 0)),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True)


def from_points(
    window: Window,
    positions: Iterable[Sequence[float]],
    marks: Sequence[Any] | None = None,
    *,
    master_seed: int = 0,
    replication: int = 0,
) -> PointConfiguration:
    """Build a configuration from explicit positions (ids 0..n-1)."""
    pos = np.asarray(list(positions), dtype=float).reshape(-1, window.dim)
    n = len(pos)
    marks = tuple(marks) if marks is not None else (None,) * n
    ids = np.arange(n, dtype=np.uint64)
    seeds = point_seeds_np(master_seed, replication, np.arange(n))
    return PointConfiguration(window, ids, pos, marks, seeds, 0.0, MarkSampler("constant"), master_seed, replication)


# ---------------------------------------------------------------------------
# sampling


def poisson_inverse(u: float, lam: float) -> int:
    """Smallest k with P(Poisson(lam) <= k) >= u, by a walk from the mode."""
    if lam == 0.0:
        return 0
    k = int(math.floor(lam))
    cdf = float(pdtr(k, lam))
    log_pmf = -lam + k * math.log(lam) - math.lgamma(k + 1)
    if cdf >= u:
        # walk down while the cdf at k-1 still covers u
        while k > 0:
            below = cdf - math.exp(log_pmf)
            if below < u:
                break
            cdf = below
            log_pmf += math.log(k) - math.log(lam)
            k -= 1
        return k
    while cdf < u:
        k += 1
        log_pmf += math.log(lam) - math.log(k)
        step = math.exp(log_pmf)
        if step == 0.0 and k > lam:
            break
        cdf += step
    return k


def replication_rng(master_seed: int, replication: int, stream: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, replication, stream])))


def sample_poisson(
    window: Window,
    gamma: float,
    mark_sampler: MarkSampler | None = None,
    master_seed: int = 0,
    replication: int = 0,
) -> PointConfiguration:
    """Sample a marked Poisson process of intensity ``gamma`` in ``window``.

    The count is drawn first (inversion), then positions, then marks; ids are
    0..n-1 in generation order and seeds are keyed hashes of
    (master_seed, replication, id).
    """
    gamma = float(gamma)
    if not math.isfinite(gamma) or gamma < 0:
        raise RejectedInputError(f"intensity must be finite and >= 0, got {gamma!r}")
    mark_sampler = mark_sampler or MarkSampler("constant")
    rng = replication_rng(master_seed, replication)
    n = poisson_inverse(float(rng.random()), gamma * window.volume())
    lo, hi = window.lower, window.upper
    pos = lo + window.side * rng.random((n, window.dim))
    # guard against rounding onto the open upper face
    pos = np.where(pos >= hi, np.nextafter(hi, lo), pos)
    marks = mark_sampler.draw(rng, n, window.dim)
    ids = np.arange(n, dtype=np.uint64)
    seeds = point_seeds_np(master_seed, replication, np.arange(n))
    return PointConfiguration(window, ids, pos, tuple(marks), seeds, gamma, mark_sampler, master_seed, replication)


def restrict(config: PointConfiguration, sub_window: Window) -> PointConfiguration:
    """Points of ``config`` lying in ``sub_window``; ids and seeds unchanged."""
    if sub_window.dim != config.dim:
        raise RejectedInputError(f"window dimension {sub_window.dim} != configuration dimension {config.dim}")
    keep = sub_window.contains(config.positions) if len(config) else np.zeros(0, dtype=bool)
    out = config.take(keep)
    return out._replace(out.ids, out.positions, out.marks, out.seeds, window=sub_window)


def insert_point(config: PointConfiguration, position: Sequence[float], mark: Any = None) -> PointConfiguration:
    """Append a point with id = max id + 1 and a hash-derived seed."""
    return config.with_point(config.make_point(position, mark))


def draw_extra_mark(config: PointConfiguration, sampler: MarkSampler | None = None, stream: int = 1) -> Any:
    """Deterministic draw V ~ Theta for a point inserted into ``config``."""
    sampler = sampler or config.mark_sampler
    rng = np.random.Generator(
        np.random.PCG64(hash_words(EXTRA_KEY, config.master_seed, config.replication, stream))
    )
    return sampler.draw(rng, 1, config.dim)[0]
