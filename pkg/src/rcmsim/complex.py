"""Random simplicial complexes built from point configurations.

The retention uniform of a simplex is a keyed hash of its sorted vertex seeds.
Inserting a point therefore never changes the uniform of an existing simplex,
and the complex on a sub-window is the restriction of the complex on the full
window.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from ._hashing import SIMPLEX_KEY, hash_words, hash_rows_np, to_unit, to_unit_np
from .errors import RejectedInputError, StructuralError
from .kernels import ConnectionKernel
from .pointprocess import MarkedPoint, PointConfiguration

Simplex = tuple[int, ...]


@dataclass(frozen=True)
class SimplicialComplex:
    """Downward-closed family of sorted id tuples, grouped by dimension.

    ``simplices[j]`` is the sorted tuple of j-simplices; trailing empty
    dimensions are dropped, so the empty complex has ``simplices == ()``.
    """

    simplices: tuple[tuple[Simplex, ...], ...]
    alpha: int | None = field(default=None, compare=False)

    def __post_init__(self):
        levels = [tuple(sorted(tuple(int(v) for v in s) for s in level)) for level in self.simplices]
        while levels and not levels[-1]:
            levels.pop()
        object.__setattr__(self, "simplices", tuple(levels))

    # construction helpers -------------------------------------------------

    @classmethod
    def from_simplices(cls, simplices: Iterable[Iterable[int]], alpha: int | None = None) -> "SimplicialComplex":
        """Downward closure of the given simplices."""
        by_dim: dict[int, set] = {}
        for s in simplices:
            s = tuple(sorted(set(int(v) for v in s)))
            if not s:
                continue
            for k in range(1, len(s) + 1):
                for face in itertools.combinations(s, k):
                    by_dim.setdefault(k - 1, set()).add(face)
        top = max(by_dim) if by_dim else -1
        if alpha is not None:
            top = min(top, alpha)
        return cls(tuple(tuple(by_dim.get(j, ())) for j in range(top + 1)), alpha)

    @classmethod
    def empty(cls, alpha: int | None = None) -> "SimplicialComplex":
        return cls((), alpha)

    # queries --------------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    @property
    def vertex_ids(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.simplices[0]) if self.simplices else ()

    def f(self, j: int) -> int:
        return len(self.simplices[j]) if 0 <= j < len(self.simplices) else 0

    @property
    def f_vector(self) -> tuple[int, ...]:
        return tuple(len(level) for level in self.simplices)

    def level(self, j: int) -> tuple[Simplex, ...]:
        return self.simplices[j] if 0 <= j < len(self.simplices) else ()

    def __iter__(self):
        for level in self.simplices:
            yield from level

    def __len__(self) -> int:
        return sum(self.f_vector)

    def __contains__(self, s) -> bool:
        s = tuple(sorted(s))
        return s in self._sets[len(s) - 1] if 0 < len(s) <= len(self.simplices) else False

    @property
    def _sets(self) -> list[frozenset]:
        cached = self.__dict__.get("_set_cache")
        if cached is None:
            cached = [frozenset(level) for level in self.simplices]
            object.__setattr__(self, "_set_cache", cached)
        return cached

    def is_subcomplex_of(self, other: "SimplicialComplex") -> bool:
        if self.dim > other.dim:
            return False
        return all(self._sets[j] <= other._sets[j] for j in range(len(self.simplices)))

    def check_closed(self) -> None:
        """Raise StructuralError unless every facet of every simplex is stored."""
        for j in range(1, len(self.simplices)):
            below = self._sets[j - 1]
            for s in self.simplices[j]:
                if len(s) != j + 1 or len(set(s)) != j + 1 or list(s) != sorted(s):
                    raise StructuralError(f"malformed {j}-simplex {s}")
                for face in itertools.combinations(s, j):
                    if face not in below:
                        raise StructuralError(f"face {face} of {s} missing")

    def is_closed(self) -> bool:
        try:
            self.check_closed()
        except StructuralError:
            return False
        return True

    # serialisation --------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "vertices": list(self.vertex_ids),
            "simplices": {str(j): [list(s) for s in self.simplices[j]] for j in range(1, len(self.simplices))},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SimplicialComplex":
        levels = [[(v,) for v in obj.get("vertices", [])]]
        extra = obj.get("simplices", {})
        top = max((int(k) for k in extra), default=0)
        for j in range(1, top + 1):
            levels.append([tuple(s) for s in extra.get(str(j), [])])
        out = cls(tuple(tuple(level) for level in levels), obj.get("alpha"))
        out.check_closed()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class CoupledPair:
    with_point: SimplicialComplex
    without_point: SimplicialComplex
    extra_id: int


# ---------------------------------------------------------------------------
# retention uniforms


def simplex_uniform(seeds: Sequence[int], level: int) -> float:
    """Uniform in [0, 1) attached to a simplex; a pure function of its vertex
    seeds (order irrelevant) and its dimension."""
    if len(seeds) < 2:
        raise RejectedInputError("simplex_uniform needs at least two vertices")
    if len(seeds) != level + 1:
        raise RejectedInputError(f"{len(seeds)} seeds given for a {level}-simplex")
    return to_unit(hash_words(SIMPLEX_KEY, level, *sorted(int(s) for s in seeds)))


def simplex_uniforms(seed_rows: np.ndarray) -> np.ndarray:
    """Vectorised ``simplex_uniform`` over the rows of an (m, j+1) uint64 array."""
    seed_rows = np.sort(np.asarray(seed_rows, dtype=np.uint64), axis=1)
    m, k = seed_rows.shape
    words = np.empty((m, k + 1), dtype=np.uint64)
    words[:, 0] = k - 1
    words[:, 1:] = seed_rows
    return to_unit_np(hash_rows_np(SIMPLEX_KEY, words))


# ---------------------------------------------------------------------------
# construction


def _candidate_pairs(config: PointConfiguration, kernel: ConnectionKernel) -> np.ndarray:
    n = len(config)
    if n < 2:
        return np.zeros((0, 2), dtype=np.intp)
    reach = kernel.cutoff(config.marks) if kernel.cutoff is not None else None
    if reach is None:
        i, j = np.triu_indices(n, k=1)
        return np.column_stack([i, j])
    if reach <= 0:
        return np.zeros((0, 2), dtype=np.intp)
    pairs = cKDTree(config.positions).query_pairs(reach * (1 + 1e-12), output_type="ndarray")
    return np.sort(pairs, axis=1)


def _retain(config, kernel, level, cand, direct):
    """Boolean mask of retained candidate simplices (rows of point indices)."""
    if len(cand) == 0:
        return np.zeros(0, dtype=bool)
    d = config.dim
    if kernel.helly and not direct and level + 1 > d + 1:
        # intersection kernels: all (d+1)-faces meet, so by Helly the whole set does
        return np.ones(len(cand), dtype=bool)
    x = config.positions[cand]
    marks = [tuple(config.marks[i] for i in row) for row in cand]
    phi = kernel.evaluate(level, x, marks)
    u = simplex_uniforms(config.seeds[cand])
    return (u <= phi) & (phi > 0.0)


def build_complex(
    config: PointConfiguration,
    kernel: ConnectionKernel,
    *,
    direct: bool = False,
) -> SimplicialComplex:
    """Build the random complex on the points of ``config``.

    A (j+1)-set is a candidate at level j only when all its j-faces were
    retained; it is then kept iff its uniform is <= phi_j. ``direct`` disables
    the Helly shortcut of intersection kernels.
    """
    order = np.argsort(config.ids, kind="stable")
    config = config.take(order)
    ids = [int(i) for i in config.ids]
    n = len(ids)
    if n == 0:
        return SimplicialComplex.empty(kernel.alpha)
    levels: list[list[Simplex]] = [[(i,) for i in ids]]

    pairs = _candidate_pairs(config, kernel)
    keep = _retain(config, kernel, 1, pairs, direct)
    current = [tuple(row) for row in pairs[keep].tolist()]
    current.sort()
    up: list[set[int]] = [set() for _ in range(n)]
    for a, b in current:
        up[a].add(b)

    for level in range(1, kernel.alpha + 1):
        if not current:
            break
        levels.append([tuple(ids[v] for v in s) for s in current])
        if level == kernel.alpha:
            break
        present = set(current)
        cand = []
        for s in current:
            common = set.intersection(*(up[v] for v in s))
            for v in common:
                t = s + (v,)
                if level >= 2 and not all(
                    (t[:k] + t[k + 1:]) in present for k in range(level + 1)
                ):
                    continue
                cand.append(t)
        if not cand:
            break
        cand.sort()
        arr = np.array(cand, dtype=np.intp)
        keep = _retain(config, kernel, level + 1, arr, direct)
        current = [c for c, k in zip(cand, keep) if k]
    return SimplicialComplex(tuple(tuple(level) for level in levels), kernel.alpha)


def build_coupled(config: PointConfiguration, kernel: ConnectionKernel, extra: MarkedPoint, **kw) -> CoupledPair:
    """Complexes with and without ``extra``; the latter is a subcomplex of the
    former because retention uniforms of old simplices are unchanged."""
    if np.any(config.ids == np.uint64(extra.id)):
        raise RejectedInputError(f"extra point id {extra.id} already in configuration")
    without = build_complex(config, kernel, **kw)
    with_pt = build_complex(config.with_point(extra), kernel, **kw)
    return CoupledPair(with_pt, without, extra.id)


def difference_operator(
    f: Callable[[SimplicialComplex], float],
    config: PointConfiguration,
    kernel: ConnectionKernel,
    extra: MarkedPoint,
) -> float:
    """f(complex with extra) - f(complex without extra)."""
    pair = build_coupled(config, kernel, extra)
    return f(pair.with_point) - f(pair.without_point)


def inserted_degree(config: PointConfiguration, kernel: ConnectionKernel, extra: MarkedPoint) -> int:
    """Edge degree of ``extra`` in the complex of config + extra, computed
    without building the rest of the complex."""
    n = len(config)
    if n == 0:
        return 0
    pos = config.positions
    idx = np.arange(n)
    reach = kernel.cutoff(config.marks + (extra.mark,)) if kernel.cutoff is not None else None
    if reach is not None:
        dist = np.linalg.norm(pos - np.asarray(extra.position), axis=1)
        idx = idx[dist <= reach * (1 + 1e-12)]
    if len(idx) == 0:
        return 0
    lower = config.ids[idx] < np.uint64(extra.id)
    x = np.empty((len(idx), 2, config.dim))
    ex = np.asarray(extra.position, dtype=float)
    x[:, 0, :] = np.where(lower[:, None], pos[idx], ex)
    x[:, 1, :] = np.where(lower[:, None], ex, pos[idx])
    marks = [(config.marks[i], extra.mark) if lo else (extra.mark, config.marks[i]) for i, lo in zip(idx, lower)]
    phi = kernel.evaluate(1, x, marks)
    seeds = np.column_stack([config.seeds[idx], np.full(len(idx), extra.seed, dtype=np.uint64)])
    u = simplex_uniforms(seeds)
    return int(np.count_nonzero((u <= phi) & (phi > 0.0)))


def restrict_complex(complex: SimplicialComplex, keep_ids: Iterable[int]) -> SimplicialComplex:
    """Induced subcomplex on the given vertex ids."""
    keep = set(int(i) for i in keep_ids)
    return SimplicialComplex(
        tuple(tuple(s for s in level if all(v in keep for v in s)) for level in complex.simplices),
        complex.alpha,
    )


def skeleton(complex: SimplicialComplex, j: int) -> SimplicialComplex:
    if j < 0:
        raise RejectedInputError("skeleton dimension must be >= 0")
    return SimplicialComplex(complex.simplices[: j + 1], complex.alpha)


def relabel(complex: SimplicialComplex, mapping: dict[int, int]) -> SimplicialComplex:
    return SimplicialComplex.from_simplices((tuple(mapping[v] for v in s) for s in complex), complex.alpha)


def disjoint_union(*complexes: SimplicialComplex) -> SimplicialComplex:
    """Union after shifting each complex's ids past the previous ones."""
    out: list[Simplex] = []
    offset = 0
    for c in complexes:
        ids = c.vertex_ids
        shift = {v: offset + k for k, v in enumerate(ids)}
        out.extend(tuple(shift[v] for v in s) for s in c)
        offset += len(ids)
    return SimplicialComplex.from_simplices(out)
