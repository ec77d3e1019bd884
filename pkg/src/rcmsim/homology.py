"""Z2 chain complexes, bit-packed boundary matrices and Betti numbers."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .complex import Simplex, SimplicialComplex
from .errors import RejectedInputError, StructuralError

WORD = 64
_ONE = np.uint64(1)


@dataclass(frozen=True, eq=False)
class BitMatrix:
    """Dense matrix over Z2, each row packed into ceil(cols/64) uint64 words.

    Bit ``c % 64`` of word ``c // 64`` holds column ``c``; bits past ``cols``
    in the last word are always zero.
    """

    rows: int
    cols: int
    words: np.ndarray

    def __post_init__(self):
        nwords = (self.cols + WORD - 1) // WORD
        w = np.asarray(self.words, dtype=np.uint64).reshape(self.rows, nwords)
        object.__setattr__(self, "words", w)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "BitMatrix":
        return cls(rows, cols, np.zeros((rows, (cols + WORD - 1) // WORD), dtype=np.uint64))

    @classmethod
    def from_entries(cls, rows: int, cols: int, r: np.ndarray, c: np.ndarray) -> "BitMatrix":
        """Matrix with ones at (r[k], c[k]); repeated entries cancel mod 2."""
        m = cls.zeros(rows, cols)
        r = np.asarray(r, dtype=np.intp)
        c = np.asarray(c, dtype=np.intp)
        np.bitwise_xor.at(m.words, (r, c // WORD), _ONE << (c % WORD).astype(np.uint64))
        return m

    @classmethod
    def from_dense(cls, a) -> "BitMatrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        rows, cols = a.shape
        r, c = np.nonzero(a)
        return cls.from_entries(rows, cols, r, c)

    def to_dense(self) -> np.ndarray:
        if self.cols == 0:
            return np.zeros((self.rows, 0), dtype=np.uint8)
        bits = np.unpackbits(self.words.view(np.uint8), axis=1, bitorder="little")
        return bits[:, : self.cols].astype(np.uint8)

    def __getitem__(self, rc: tuple[int, int]) -> int:
        r, c = rc
        return int((self.words[r, c // WORD] >> np.uint64(c % WORD)) & _ONE)

    def column_weights(self) -> np.ndarray:
        return self.to_dense().sum(axis=0)

    def matmul(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise RejectedInputError("shape mismatch")
        prod = (self.to_dense().astype(np.int64) @ other.to_dense().astype(np.int64)) & 1
        return BitMatrix.from_dense(prod) if prod.size else BitMatrix.zeros(self.rows, other.cols)

    def is_zero(self) -> bool:
        return not self.words.any()

    def to_text(self) -> str:
        """Plain 0/1 grid, one row per line."""
        return "\n".join("".join(str(b) for b in row) for row in self.to_dense())


def rank_gf2(m: BitMatrix) -> int:
    """Rank over Z2 by column-by-column elimination on a copy of ``m``.

    For each column the pivot is the lowest-index remaining row with a one in
    that column; its row is XOR-ed into every remaining row below that has
    the bit set.
    """
    if m.rows == 0 or m.cols == 0:
        return 0
    a = m.words.copy()
    rows = a.shape[0]
    rank = 0
    for col in range(m.cols):
        w, b = divmod(col, WORD)
        bit = np.uint64(b)
        hits = np.flatnonzero((a[rank:, w] >> bit) & _ONE)
        if hits.size == 0:
            continue
        piv = rank + int(hits[0])
        if piv != rank:
            # the row swapped out of ``rank`` had a zero here, so the other
            # rows holding the bit are still rank + hits[1:]
            a[[rank, piv]] = a[[piv, rank]]
        if hits.size > 1:
            a[rank + hits[1:], w:] ^= a[rank, w:]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True, eq=False)
class ChainComplexZ2:
    """Boundary matrices ``boundary[p]`` (f_{p-1} x f_p) for p = 1..dim."""

    f_vector: tuple[int, ...]
    boundaries: dict[int, BitMatrix]
    index: list[dict[Simplex, int]]

    @property
    def dim(self) -> int:
        return len(self.f_vector) - 1

    def boundary(self, p: int) -> BitMatrix:
        if p in self.boundaries:
            return self.boundaries[p]
        rows = self.f_vector[p - 1] if 0 < p <= len(self.f_vector) else 0
        cols = self.f_vector[p] if 0 <= p < len(self.f_vector) else 0
        return BitMatrix.zeros(rows, cols)

    def rank(self, p: int) -> int:
        if p <= 0 or p > self.dim:
            return 0
        cache = self.__dict__.setdefault("_ranks", {})
        if p not in cache:
            cache[p] = rank_gf2(self.boundaries[p])
        return cache[p]


def chain_complex(complex: SimplicialComplex) -> ChainComplexZ2:
    """Boundary matrices of a finite downward-closed complex over Z2."""
    index = [{s: k for k, s in enumerate(level)} for level in complex.simplices]
    boundaries = {}
    for p in range(1, complex.dim + 1):
        below = index[p - 1]
        level = complex.simplices[p]
        r = np.empty(len(level) * (p + 1), dtype=np.intp)
        k = 0
        for s in level:
            for face in itertools.combinations(s, p):
                try:
                    r[k] = below[face]
                except KeyError:
                    raise StructuralError(f"face {face} of {s} missing; complex not closed") from None
                k += 1
        c = np.repeat(np.arange(len(level)), p + 1)
        boundaries[p] = BitMatrix.from_entries(len(below), len(level), r, c)
    return ChainComplexZ2(complex.f_vector, boundaries, index)


def betti(complex: SimplicialComplex | ChainComplexZ2, p: int) -> int:
    """p-th Betti number over Z2: f_p - rank d_p - rank d_{p+1}."""
    if p < 0:
        raise RejectedInputError("p must be >= 0")
    cc = complex if isinstance(complex, ChainComplexZ2) else _cached_chain(complex)
    if p > cc.dim:
        return 0
    return cc.f_vector[p] - cc.rank(p) - cc.rank(p + 1)


def _cached_chain(complex: SimplicialComplex) -> ChainComplexZ2:
    # complexes are immutable, so the matrices (and their cached ranks) can
    # be shared by every functional evaluated on the same complex
    cc = complex.__dict__.get("_chain_cache")
    if cc is None:
        cc = chain_complex(complex)
        object.__setattr__(complex, "_chain_cache", cc)
    return cc


def betti_vector(complex: SimplicialComplex, p_max: int) -> tuple[int, ...]:
    if p_max < 0:
        raise RejectedInputError("p_max must be >= 0")
    # ranks above p_max + 1 are never needed
    cc = chain_complex(complex if complex.dim <= p_max + 1 else _skeleton(complex, p_max + 1))
    return tuple(betti(cc, p) for p in range(p_max + 1))


def _skeleton(complex: SimplicialComplex, j: int) -> SimplicialComplex:
    return SimplicialComplex(complex.simplices[: j + 1], complex.alpha)
