"""Isomorphism-invariant functionals of finite simplicial complexes and the
small witness complexes K_p, L_p."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .complex import SimplicialComplex, restrict_complex
from .errors import CapabilityError, RejectedInputError
from .homology import betti

MAX_ISO_VERTICES = 10


def euler_characteristic(complex: SimplicialComplex) -> int:
    return sum((-1) ** i * f for i, f in enumerate(complex.f_vector))


def f_count(complex: SimplicialComplex, j: int) -> int:
    if j < 0:
        raise RejectedInputError("j must be >= 0")
    return complex.f(j)


def _adjacency(complex: SimplicialComplex) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {v: set() for v in complex.vertex_ids}
    for a, b in complex.level(1):
        adj[a].add(b)
        adj[b].add(a)
    return adj


def connected_components(complex: SimplicialComplex) -> list[tuple[int, ...]]:
    """Vertex sets of the 1-skeleton components, each sorted, ordered by
    smallest member."""
    parent = {v: v for v in complex.vertex_ids}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in complex.level(1):
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the smaller id as root so roots are component minima
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb
    groups: dict[int, list[int]] = {}
    for v in complex.vertex_ids:
        groups.setdefault(find(v), []).append(v)
    return [tuple(sorted(groups[r])) for r in sorted(groups)]


def simplex_degree(complex: SimplicialComplex, vertex: int, n: int) -> int:
    """Number of n-simplices containing ``vertex``."""
    if (int(vertex),) not in complex:
        raise RejectedInputError(f"vertex {vertex} not in complex")
    return sum(1 for s in complex.level(n) if vertex in s)


def _degree_table(complex: SimplicialComplex, n: int) -> dict[int, int]:
    deg = dict.fromkeys(complex.vertex_ids, 0)
    for s in complex.level(n):
        for v in s:
            deg[v] += 1
    return deg


def degree_count(complex: SimplicialComplex, m: int, l: int) -> int:
    """Number of vertices whose m-simplex degree equals l."""
    if m < 1 or l < 0:
        raise RejectedInputError("need m >= 1 and l >= 0")
    return sum(1 for d in _degree_table(complex, m).values() if d == l)


# ---------------------------------------------------------------------------
# isomorphism


def _signature(complex: SimplicialComplex) -> dict[int, tuple[int, ...]]:
    """Per-vertex degree vector over all dimensions (an isomorphism invariant)."""
    tables = [_degree_table(complex, n) for n in range(1, complex.dim + 1)]
    return {v: tuple(t[v] for t in tables) for v in complex.vertex_ids}


def is_isomorphic(k: SimplicialComplex, l: SimplicialComplex) -> bool:
    """Whether a vertex bijection carries the simplices of ``k`` onto those of ``l``.

    Backtracking over assignments, restricted to vertices with equal degree
    vectors and checking every simplex as soon as all its vertices are mapped.
    """
    nk, nl = len(k.vertex_ids), len(l.vertex_ids)
    if max(nk, nl) > MAX_ISO_VERTICES:
        raise CapabilityError(f"isomorphism test limited to {MAX_ISO_VERTICES} vertices")
    if k.f_vector != l.f_vector:
        return False
    if nk == 0:
        return True
    sk, sl = _signature(k), _signature(l)
    if sorted(sk.values()) != sorted(sl.values()):
        return False
    # most constrained vertices first
    order = sorted(k.vertex_ids, key=lambda v: (sum(1 for w in sk.values() if w == sk[v]), v))
    pos = {v: i for i, v in enumerate(order)}
    closing: list[list[tuple[int, ...]]] = [[] for _ in order]
    for s in k:
        if len(s) > 1:
            closing[max(pos[v] for v in s)].append(s)
    target = l._sets
    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        v = order[i]
        for w in l.vertex_ids:
            if w in used or sl[w] != sk[v]:
                continue
            mapping[v] = w
            if all(tuple(sorted(mapping[u] for u in s)) in target[len(s) - 1] for s in closing[i]):
                used.add(w)
                if extend(i + 1):
                    return True
                used.discard(w)
            del mapping[v]
        return False

    return extend(0)


def _require_small(l: SimplicialComplex) -> None:
    if len(l.vertex_ids) > MAX_ISO_VERTICES:
        raise CapabilityError(f"pattern complexes are limited to {MAX_ISO_VERTICES} vertices")
    if not l.vertex_ids:
        raise RejectedInputError("pattern complex is empty")


def _connected_subsets(adj: dict[int, set[int]], size: int):
    """Each connected vertex subset of the given size exactly once (ESU)."""

    def extend(sub: list[int], ext: set[int], nbhd: set[int], root: int):
        if len(sub) == size:
            yield tuple(sorted(sub))
            return
        ext = set(ext)
        while ext:
            w = ext.pop()
            new = {u for u in adj[w] if u > root and u not in nbhd}
            yield from extend(sub + [w], ext | new, nbhd | adj[w] | {w}, root)

    for v in sorted(adj):
        yield from extend([v], {u for u in adj[v] if u > v}, adj[v] | {v}, v)


def count_induced_subcomplexes(complex: SimplicialComplex, l: SimplicialComplex) -> int:
    """Number of vertex subsets whose induced subcomplex is isomorphic to ``l``
    (which must be connected)."""
    _require_small(l)
    if len(connected_components(l)) != 1:
        raise RejectedInputError("pattern complex must be connected")
    size = len(l.vertex_ids)
    if size == 1:
        return complex.f(0)
    count = 0
    for subset in _connected_subsets(_adjacency(complex), size):
        sub = restrict_complex(complex, subset)
        if sub.f_vector == l.f_vector and is_isomorphic(sub, l):
            count += 1
    return count


def count_isomorphic_components(complex: SimplicialComplex, l: SimplicialComplex) -> int:
    """Number of connected components isomorphic to ``l``."""
    _require_small(l)
    size = len(l.vertex_ids)
    count = 0
    for comp in connected_components(complex):
        if len(comp) != size:
            continue
        sub = restrict_complex(complex, comp)
        if sub.f_vector == l.f_vector and is_isomorphic(sub, l):
            count += 1
    return count


# ---------------------------------------------------------------------------
# witness complexes


def make_K_p(p: int) -> SimplicialComplex:
    """All non-empty proper subsets of {1, ..., p+2}: the boundary of a (p+1)-simplex."""
    if p < 0:
        raise RejectedInputError("p must be >= 0")
    return SimplicialComplex.from_simplices(itertools.combinations(range(1, p + 3), p + 1))


def make_L_p(p: int) -> SimplicialComplex:
    """Closure of {1..p+2} minus j and {1..p+1, p+3} minus j, for j = 1..p+1."""
    if p < 1:
        raise RejectedInputError("p must be >= 1")
    sigma = set(range(1, p + 3))
    rho = set(range(1, p + 2)) | {p + 3}
    facets = [sorted(sigma - {j}) for j in range(1, p + 2)] + [sorted(rho - {j}) for j in range(1, p + 2)]
    return SimplicialComplex.from_simplices(facets)


def full_simplex(j: int) -> SimplicialComplex:
    """A single j-simplex with all its faces."""
    return SimplicialComplex.from_simplices([range(j + 1)])


_NAMED = {
    "K": make_K_p,
    "L": make_L_p,
    "simplex": full_simplex,
}


def named_complex(name: str) -> SimplicialComplex:
    """Complexes addressable by name: ``K_p``, ``L_p``, ``simplex_j``, ``vertex``."""
    if name == "vertex":
        return full_simplex(0)
    base, _, idx = name.rpartition("_")
    if base in _NAMED and idx.isdigit():
        return _NAMED[base](int(idx))
    raise RejectedInputError(f"unknown named complex {name!r}")


# ---------------------------------------------------------------------------
# descriptors


def _parse_params(text: str) -> dict[str, str]:
    out = {}
    if not text:
        return out
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep or not key:
            raise RejectedInputError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _int_param(params: dict, key: str, low: int, spec: str) -> int:
    try:
        value = int(params[key])
    except KeyError:
        raise RejectedInputError(f"{spec!r}: missing parameter {key!r}") from None
    except ValueError:
        raise RejectedInputError(f"{spec!r}: parameter {key!r} must be an integer") from None
    if value < low:
        raise RejectedInputError(f"{spec!r}: parameter {key!r} must be >= {low}")
    return value


@dataclass(frozen=True)
class FunctionalDescriptor:
    """A parsed functional such as ``betti:1``, ``euler``, ``f:2``,
    ``g_L:name=K_1``, ``h_L:file=L.json``, ``d:m=1,l=3``, ``vertices`` or
    ``constant:value=0``."""

    kind: str
    params: dict = field(default_factory=dict)
    label: str = ""
    pattern: SimplicialComplex | None = field(default=None, compare=False)

    @classmethod
    def parse(cls, text: str, base_dir: str | Path | None = None) -> "FunctionalDescriptor":
        spec = text.strip()
        head, _, rest = spec.partition(":")
        head = head.strip()
        if head == "betti":
            params = {"p": int(rest) if rest.strip().isdigit() else _int_param(_parse_params(rest), "p", 0, spec)}
            return cls("betti", params, spec)
        if head == "euler" and not rest:
            return cls("euler", {}, spec)
        if head == "vertices" and not rest:
            return cls("vertices", {}, spec)
        if head == "f":
            params = {"j": int(rest) if rest.strip().isdigit() else _int_param(_parse_params(rest), "j", 0, spec)}
            return cls("f", params, spec)
        if head == "d":
            kv = _parse_params(rest)
            return cls("d", {"m": _int_param(kv, "m", 1, spec), "l": _int_param(kv, "l", 0, spec)}, spec)
        if head in ("g_L", "h_L"):
            kv = _parse_params(rest)
            if "name" in kv:
                pattern = named_complex(kv["name"])
            elif "file" in kv:
                path = Path(kv["file"])
                if base_dir is not None and not path.is_absolute():
                    path = Path(base_dir) / path
                with open(path) as fh:
                    pattern = SimplicialComplex.from_json(json.load(fh))
            else:
                raise RejectedInputError(f"{spec!r}: need name=... or file=...")
            _require_small(pattern)
            if head == "g_L" and len(connected_components(pattern)) != 1:
                raise RejectedInputError(f"{spec!r}: pattern complex must be connected")
            return cls(head, kv, spec, pattern)
        if head == "constant":
            kv = _parse_params(rest)
            try:
                value = float(kv.get("value", "0"))
            except ValueError:
                raise RejectedInputError(f"{spec!r}: value must be a number") from None
            if not math.isfinite(value):
                raise RejectedInputError(f"{spec!r}: value must be finite")
            return cls("constant", {"value": value}, spec)
        raise RejectedInputError(f"unknown functional {spec!r}")

    def __call__(self, complex: SimplicialComplex) -> float:
        return _EVAL[self.kind](self, complex)

    def __str__(self) -> str:
        return self.label or self.kind


_EVAL: dict[str, Callable[[FunctionalDescriptor, SimplicialComplex], float]] = {
    "betti": lambda d, c: betti(c, d.params["p"]),
    "euler": lambda d, c: euler_characteristic(c),
    "vertices": lambda d, c: c.f(0),
    "f": lambda d, c: c.f(d.params["j"]),
    "d": lambda d, c: degree_count(c, d.params["m"], d.params["l"]),
    "g_L": lambda d, c: count_induced_subcomplexes(c, d.pattern),
    "h_L": lambda d, c: count_isomorphic_components(c, d.pattern),
    "constant": lambda d, c: d.params["value"],
}


def parse_functional(text: str, base_dir: str | Path | None = None) -> FunctionalDescriptor:
    return FunctionalDescriptor.parse(text, base_dir)
