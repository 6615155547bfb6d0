"""Bit-packed linear algebra over GF(2).

Matrix rows and vectors are Python ints: bit ``j`` of a row is column ``j``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from itertools import combinations
from math import comb
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .boolfn import BitVector
from .errors import CapacityError, ContractError, DimensionError


@dataclass(frozen=True)
class Gf2Matrix:
    rows: int
    cols: int
    data: tuple[int, ...]

    def __post_init__(self):
        data = tuple(int(r) for r in self.data)
        if len(data) != self.rows:
            raise ContractError(f"expected {self.rows} rows, got {len(data)}")
        limit = 1 << self.cols
        if any(r < 0 or r >= limit for r in data):
            raise ContractError(f"row does not fit in {self.cols} columns")
        object.__setattr__(self, "data", data)

    @classmethod
    def identity(cls, m: int) -> "Gf2Matrix":
        return cls(m, m, tuple(1 << i for i in range(m)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Gf2Matrix":
        return cls(rows, cols, (0,) * rows)

    @classmethod
    def random(cls, rows: int, cols: int, rng: np.random.Generator) -> "Gf2Matrix":
        bits = rng.integers(0, 2, size=(rows, cols), dtype=np.uint8)
        return cls.from_array(bits)

    @classmethod
    def from_array(cls, a) -> "Gf2Matrix":
        a = np.asarray(a, dtype=np.uint8) & 1
        if a.ndim != 2:
            raise ContractError("expected a 2-d array")
        return cls(a.shape[0], a.shape[1], tuple(_pack_row(r) for r in a))

    def to_array(self) -> np.ndarray:
        out = np.zeros((self.rows, self.cols), dtype=np.uint8)
        for i, r in enumerate(self.data):
            for j in range(self.cols):
                out[i, j] = (r >> j) & 1
        return out

    def matvec(self, x) -> int:
        """M x over GF(2); bit i of the result is row i dotted with x."""
        x = x.bits if isinstance(x, BitVector) else int(x)
        out = 0
        for i, r in enumerate(self.data):
            out |= ((r & x).bit_count() & 1) << i
        return out


def _pack_row(bits) -> int:
    packed = np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def row_reduce(m: Gf2Matrix) -> tuple[Gf2Matrix, int, tuple[int, ...]]:
    """Reduced row echelon form, rank and pivot columns (ascending)."""
    work = list(m.data)
    pivots = []
    r = 0
    for col in range(m.cols):
        bit = 1 << col
        pivot = next((i for i in range(r, len(work)) if work[i] & bit), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        for i in range(len(work)):
            if i != r and work[i] & bit:
                work[i] ^= work[r]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    return Gf2Matrix(m.rows, m.cols, tuple(work)), r, tuple(pivots)


def rank(rows: Iterable[int]) -> int:
    """Rank of a list of packed rows."""
    basis = XorBasis()
    return sum(basis.insert(v) for v in rows)


def solve(m: Gf2Matrix, b) -> BitVector | None:
    """A solution x of M x = b, or None when the system is inconsistent.

    Free variables are set to zero.
    """
    if isinstance(b, BitVector):
        if b.n != m.rows:
            raise DimensionError(f"right-hand side has length {b.n}, matrix has {m.rows} rows")
        b = b.bits
    elif int(b) >> m.rows:
        raise DimensionError("right-hand side longer than the row count")
    aug_bit = 1 << m.cols
    aug = Gf2Matrix(m.rows, m.cols + 1,
                    tuple(r | (aug_bit if (b >> i) & 1 else 0) for i, r in enumerate(m.data)))
    reduced, _, pivots = row_reduce(aug)
    if m.cols in pivots:
        return None
    x = 0
    for row, col in zip(reduced.data, pivots):
        if row & aug_bit:
            x |= 1 << col
    return BitVector(m.cols, x)


def solve_rows(rows: Sequence[int], values: Sequence[int], cols: int):
    """Find a with <row_i, a> = values[i] for all i.

    Returns ``(a, rank)`` or ``(None, rank)`` when inconsistent; ``a`` is the
    solution with free coordinates zero.  Unlike :func:`solve` the unknown
    is indexed by columns of the rows, which is the natural form for
    learning a linear function from labelled points.
    """
    basis = XorBasis(track=False)
    for row, v in zip(rows, values):
        if not basis.insert(row, int(v)) and basis.last_residual_tag:
            return None, basis.rank
    return basis.back_substitute(cols), basis.rank


class XorBasis:
    """Incremental basis of a subspace of Z_2^m with highest-bit pivots.

    Each stored vector carries a tag: either a bit (an attached label that
    reduces alongside the vector) or, with ``track=True``, a bitmask of the
    inserted vectors it is built from.
    """

    def __init__(self, track: bool = False):
        self.track = track
        self._vec: dict[int, int] = {}
        self._tag: dict[int, int] = {}
        self._count = 0
        self.last_residual_tag = 0

    @property
    def rank(self) -> int:
        return len(self._vec)

    def reduce(self, v: int, tag: int = 0) -> tuple[int, int]:
        while v:
            top = v.bit_length() - 1
            if top not in self._vec:
                break
            v ^= self._vec[top]
            tag ^= self._tag[top]
        return v, tag

    def insert(self, v: int, tag: int = 0) -> bool:
        """Add v; returns True when it enlarged the span."""
        if self.track:
            tag = 1 << self._count
        self._count += 1
        v, tag = self.reduce(v, tag)
        self.last_residual_tag = tag
        if not v:
            return False
        self._vec[v.bit_length() - 1] = v
        self._tag[v.bit_length() - 1] = tag
        return True

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    def back_substitute(self, cols: int) -> int:
        """Solution a of <v_i, a> = tag_i with free coordinates zero."""
        a = 0
        for top in sorted(self._vec):
            v, t = self._vec[top], self._tag[top]
            lower = v ^ (1 << top)
            if ((lower & a).bit_count() & 1) ^ t:
                a |= 1 << top
        return a


def is_in_span(v: int, rows: Iterable[int]) -> bool:
    basis = XorBasis()
    for r in rows:
        basis.insert(r)
    return basis.contains(v)


def find_subset_summing_to(pool: Sequence, target, size_hint: int | None = None,
                           rng: np.random.Generator | None = None,
                           tries: int = 16) -> list[int] | None:
    """Indices of pool members whose XOR equals target, or None if target is outside the span.

    Without a size hint the first solution found (pool order) is returned.
    With a hint, the pool is re-ordered at random ``tries`` times; each
    ordering yields a solution supported on its greedy basis, and the one
    whose size is closest to the hint wins.  This is a heuristic: no
    fixed-size guarantee is made.
    """
    vecs = [p.bits if isinstance(p, BitVector) else int(p) for p in pool]
    t = target.bits if isinstance(target, BitVector) else int(target)
    if t == 0:
        return []
    best = _subset_for_order(vecs, t, range(len(vecs)))
    if best is None or size_hint is None:
        return best
    rng = rng if rng is not None else np.random.default_rng(0)
    for _ in range(tries - 1):
        if abs(len(best) - size_hint) <= 1:
            break
        cand = _subset_for_order(vecs, t, rng.permutation(len(vecs)))
        if abs(len(cand) - size_hint) < abs(len(best) - size_hint):
            best = cand
    return best


def _subset_for_order(vecs: list[int], target: int, order) -> list[int] | None:
    basis = XorBasis()
    members: list[int] = []
    for idx in order:
        idx = int(idx)
        v, tag = basis.reduce(vecs[idx], 1 << len(members))
        if v:
            basis._vec[v.bit_length() - 1] = v
            basis._tag[v.bit_length() - 1] = tag
            members.append(idx)
            if not basis.reduce(target)[0]:
                break
    residual, combo = basis.reduce(target)
    if residual:
        return None
    return sorted(members[j] for j in range(len(members)) if (combo >> j) & 1)


# ---------- monomial evaluations


@dataclass(frozen=True)
class MonomialBasis:
    """Monomials of degree <= d in n variables, degree-then-lexicographic order."""

    n: int
    d: int
    monomials: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.d <= self.n:
            raise ContractError(f"need 0 <= d <= n, got d={self.d}, n={self.n}")
        if not self.monomials:
            mons = []
            for deg in range(self.d + 1):
                for subset in combinations(range(self.n), deg):
                    mons.append(sum(1 << i for i in subset))
            object.__setattr__(self, "monomials", tuple(mons))

    @property
    def size(self) -> int:
        return len(self.monomials)

    def __len__(self) -> int:
        return len(self.monomials)


def monomial_count(n: int, d: int) -> int:
    return sum(comb(n, i) for i in range(d + 1))


def d_evaluation(x, basis: MonomialBasis) -> BitVector:
    """Values of every basis monomial at x (the empty monomial evaluates to 1)."""
    if isinstance(x, BitVector):
        if x.n != basis.n:
            raise DimensionError(f"point has dimension {x.n}, basis has {basis.n}")
        x = x.bits
    out = 0
    for j, m in enumerate(basis.monomials):
        if (x & m) == m:
            out |= 1 << j
    return BitVector(basis.size, out)


def d_evaluations(xs: np.ndarray, basis: MonomialBasis) -> list[int]:
    """Vectorized :func:`d_evaluation` over a uint64 batch, returned as packed ints."""
    xs = np.asarray(xs, dtype=np.uint64)
    masks = np.array(basis.monomials, dtype=np.uint64)
    hits = ((xs[:, None] & masks[None, :]) == masks[None, :]).astype(np.uint8)
    packed = np.packbits(hits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def points_to_rows(xs: np.ndarray) -> list[int]:
    return [int(x) for x in np.asarray(xs, dtype=np.uint64)]


def dependent(rows: Iterable[int]) -> bool:
    rows = list(rows)
    return rank(rows) < len(rows)


# ---------- serialization


def write_matrix(path, m: Gf2Matrix) -> None:
    """uint32 LE rows, uint32 LE cols, then each row packed LSB-first into ceil(cols/8) bytes."""
    width = (m.cols + 7) // 8
    body = b"".join(r.to_bytes(width, "little") for r in m.data)
    Path(path).write_bytes(struct.pack("<II", m.rows, m.cols) + body)


def read_matrix(path) -> Gf2Matrix:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise ContractError(f"{path}: truncated header")
    rows, cols = struct.unpack("<II", data[:8])
    width = (cols + 7) // 8
    if len(data) != 8 + rows * width:
        raise ContractError(f"{path}: expected {rows * width} body bytes, found {len(data) - 8}")
    out = []
    for i in range(rows):
        r = int.from_bytes(data[8 + i * width: 8 + (i + 1) * width], "little")
        if r >> cols:
            raise ContractError(f"{path}: row {i} has bits beyond column {cols}")
        out.append(r)
    return Gf2Matrix(rows, cols, tuple(out))


def rank_of_points(xs: np.ndarray) -> int:
    return rank(points_to_rows(xs))


def capacity_check(cols: int, limit: int) -> None:
    if cols > limit:
        raise CapacityError(f"{cols} columns exceed the solver cap of {limit}")
