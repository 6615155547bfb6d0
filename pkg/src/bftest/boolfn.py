"""Boolean functions f: Z_2^n -> Z_2, their truth tables and Fourier spectra.

Points of Z_2^n are Python ints (coordinate ``i`` is bit ``i``) wrapped by
:class:`BitVector` at API boundaries; batch evaluation uses ``uint64`` arrays
and is therefore limited to ``n <= 64``.  Truth tables are indexed by the
same encoding, so ``table[x] == f(x)``.
"""

from __future__ import annotations

import re
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CapacityError, ContractError, DimensionError

MAX_TABLE_DIM = 24
MAX_BATCH_DIM = 64

_U64 = np.uint64
_MASK64 = (1 << 64) - 1


# ---------- points


@dataclass(frozen=True)
class BitVector:
    """A point of Z_2^n stored as an int; bit ``i`` is coordinate ``i``."""

    n: int
    bits: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ContractError("dimension must be non-negative")
        if self.bits < 0 or self.bits >> self.n:
            raise ContractError(f"bits {self.bits:#x} do not fit in {self.n} coordinates")

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "BitVector":
        value = 0
        for i, b in enumerate(bits):
            if b not in (0, 1, True, False):
                raise ContractError(f"coordinate {i} is not a bit: {b!r}")
            value |= int(b) << i
        return cls(len(bits), value)

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "BitVector":
        return cls(n, random_int(n, rng))

    @property
    def weight(self) -> int:
        return self.bits.bit_count()

    def to_bits(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.n)]

    def __getitem__(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        return (self.bits >> i) & 1

    def __len__(self) -> int:
        return self.n

    def __xor__(self, other: "BitVector") -> "BitVector":
        if other.n != self.n:
            raise DimensionError(f"cannot add vectors of length {self.n} and {other.n}")
        return BitVector(self.n, self.bits ^ other.bits)

    __add__ = __xor__

    def __str__(self) -> str:
        return "".join(str(b) for b in self.to_bits())


def random_int(n: int, rng: np.random.Generator) -> int:
    """Uniform point of Z_2^n as a Python int (any n)."""
    value = 0
    shift = 0
    while shift < n:
        chunk = int(rng.integers(0, 1 << 32, dtype=np.uint64))
        value |= chunk << shift
        shift += 32
    return value & ((1 << n) - 1)


def random_points(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` i.i.d. uniform points of Z_2^n as a uint64 array."""
    _check_batch_dim(n)
    raw = rng.integers(0, np.iinfo(np.uint64).max, size=m, dtype=np.uint64, endpoint=True)
    if n < 64:
        raw &= _U64((1 << n) - 1)
    return raw


def popcount(xs: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(xs, dtype=np.uint64)).astype(np.int64)


def parity(xs: np.ndarray) -> np.ndarray:
    return (popcount(xs) & 1).astype(np.uint8)


def gather_bits(xs: np.ndarray, indices: Sequence[int]) -> np.ndarray:
    """Pack coordinates ``indices`` of each point into a small int (bit j <- x[indices[j]])."""
    out = np.zeros(np.shape(xs), dtype=np.int64)
    for j, i in enumerate(indices):
        out |= ((xs >> _U64(i)) & _U64(1)).astype(np.int64) << j
    return out


def index_mask(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


def mask_indices(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _check_batch_dim(n: int) -> None:
    if n > MAX_BATCH_DIM:
        raise CapacityError(f"batch evaluation supports n <= {MAX_BATCH_DIM}, got {n}")


def _check_table_dim(n: int) -> None:
    if n > MAX_TABLE_DIM:
        raise CapacityError(f"dense tables are capped at n = {MAX_TABLE_DIM}, got {n}")


def _as_points(xs) -> np.ndarray:
    return np.asarray(xs, dtype=np.uint64)


# ---------- function representations


class BooleanFunction:
    """Base class of the tagged function representations.

    Subclasses implement ``_eval_int`` (any n) and ``evaluate_many``
    (uint64 batches, n <= 64).
    """

    n: int

    def _eval_int(self, x: int) -> int:
        raise NotImplementedError

    def evaluate_many(self, xs) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> int:
        return evaluate(self, x)

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class TruthTable(BooleanFunction):
    n: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        _check_table_dim(self.n)
        table = np.ascontiguousarray(self.table, dtype=np.uint8)
        if table.shape != (1 << self.n,):
            raise ContractError(f"table must have 2^{self.n} entries, got shape {table.shape}")
        if table.size and table.max() > 1:
            raise ContractError("table entries must be bits")
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    def _eval_int(self, x):
        return int(self.table[x])

    def evaluate_many(self, xs):
        return self.table[_as_points(xs).astype(np.int64)]

    def describe(self):
        bits = "".join(str(int(b)) for b in self.table)
        return f"table n={self.n} bits={bits}"


@dataclass(frozen=True)
class KLinear(BooleanFunction):
    """XOR of the coordinates in ``indices`` (the empty set is constant 0)."""

    n: int
    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.indices)))
        if len(idx) != len(tuple(self.indices)):
            raise ContractError("k-linear indices must be distinct")
        if idx and (idx[0] < 0 or idx[-1] >= self.n):
            raise ContractError(f"indices {idx} out of range for n={self.n}")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)

    @property
    def mask(self) -> int:
        return index_mask(self.indices)

    def _eval_int(self, x):
        return (x & self.mask).bit_count() & 1

    def evaluate_many(self, xs):
        _check_batch_dim(self.n)
        return parity(_as_points(xs) & _U64(self.mask))

    def describe(self):
        return f"klinear n={self.n} I={','.join(map(str, self.indices))}"


@dataclass(frozen=True, eq=False)
class Junta(BooleanFunction):
    """Function of the coordinates ``indices`` given by a 2^k-entry subtable.

    Subtable index bit ``j`` is coordinate ``indices[j]``.
    """

    n: int
    indices: tuple[int, ...]
    subtable: np.ndarray = field(repr=False)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(set(idx)) != len(idx) or any(not 0 <= i < self.n for i in idx):
            raise ContractError(f"invalid junta indices {idx} for n={self.n}")
        sub = np.ascontiguousarray(self.subtable, dtype=np.uint8)
        if sub.shape != (1 << len(idx),) or (sub.size and sub.max() > 1):
            raise ContractError("junta subtable must hold 2^k bits")
        sub.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "subtable", sub)

    def _eval_int(self, x):
        cell = 0
        for j, i in enumerate(self.indices):
            cell |= ((x >> i) & 1) << j
        return int(self.subtable[cell])

    def evaluate_many(self, xs):
        _check_batch_dim(self.n)
        return self.subtable[gather_bits(_as_points(xs), self.indices)]

    def describe(self):
        bits = "".join(str(int(b)) for b in self.subtable)
        return f"junta n={self.n} J={','.join(map(str, self.indices))} table={bits}"


@dataclass(frozen=True, eq=False)
class PartiallySymmetric(BooleanFunction):
    """Value depends on the assignment to ``asymmetric`` and the weight of the rest.

    ``table[alpha, w]``: ``alpha`` packs the asymmetric coordinates (bit j is
    coordinate ``asymmetric[j]``), ``w`` is the Hamming weight of the other
    ``n - k`` coordinates.
    """

    n: int
    asymmetric: tuple[int, ...]
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        idx = tuple(int(i) for i in self.asymmetric)
        if len(set(idx)) != len(idx) or any(not 0 <= i < self.n for i in idx):
            raise ContractError(f"invalid asymmetric set {idx} for n={self.n}")
        k = len(idx)
        table = np.ascontiguousarray(self.table, dtype=np.uint8)
        if table.ndim == 1 and k == 0:
            table = table.reshape(1, -1)
        if table.shape != (1 << k, self.n - k + 1) or (table.size and table.max() > 1):
            raise ContractError(f"table must have shape (2^{k}, {self.n - k + 1})")
        table.setflags(write=False)
        object.__setattr__(self, "asymmetric", idx)
        object.__setattr__(self, "table", table)

    @property
    def k(self) -> int:
        return len(self.asymmetric)

    @property
    def mask(self) -> int:
        return index_mask(self.asymmetric)

    def _eval_int(self, x):
        alpha = 0
        for j, i in enumerate(self.asymmetric):
            alpha |= ((x >> i) & 1) << j
        w = (x & ~self.mask).bit_count()
        return int(self.table[alpha, w])

    def evaluate_many(self, xs):
        _check_batch_dim(self.n)
        xs = _as_points(xs)
        alpha = gather_bits(xs, self.asymmetric)
        rest = popcount(xs & _U64(~self.mask & ((1 << self.n) - 1)))
        return self.table[alpha, rest]

    def describe(self):
        rows = "/".join("".join(str(int(b)) for b in row) for row in self.table)
        return f"psym n={self.n} A={','.join(map(str, self.asymmetric))} table={rows}"


@dataclass(frozen=True)
class Gf2Polynomial(BooleanFunction):
    """XOR of monomials; each monomial is an int mask (AND of its coordinates).

    The empty mask is the constant 1.  Repeated monomials cancel.
    """

    n: int
    monomials: frozenset[int]

    def __post_init__(self):
        terms: set[int] = set()
        for m in self.monomials:
            m = index_mask(m) if not isinstance(m, (int, np.integer)) else int(m)
            if m < 0 or m >> self.n:
                raise ContractError(f"monomial {m:#x} out of range for n={self.n}")
            terms ^= {m}
        object.__setattr__(self, "monomials", frozenset(terms))

    @property
    def degree(self) -> int:
        return max((m.bit_count() for m in self.monomials), default=-1)

    def _eval_int(self, x):
        return sum((x & m) == m for m in self.monomials) & 1

    def evaluate_many(self, xs):
        _check_batch_dim(self.n)
        xs = _as_points(xs)
        out = np.zeros(xs.shape, dtype=np.uint8)
        for m in self.monomials:
            mm = _U64(m)
            out ^= ((xs & mm) == mm).astype(np.uint8)
        return out

    def describe(self):
        terms = []
        for m in sorted(self.monomials, key=lambda m: (m.bit_count(), mask_indices(m))):
            terms.append("".join(f"x{i}" for i in mask_indices(m)) or "1")
        return f"poly n={self.n} M={'+'.join(terms) or '0'}"


_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _splitmix_int(z: int) -> int:
    z = (z + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _splitmix_array(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + _U64(_GOLDEN)
        z = (z ^ (z >> _U64(30))) * _U64(_MIX1)
        z = (z ^ (z >> _U64(27))) * _U64(_MIX2)
        return z ^ (z >> _U64(31))


@dataclass(frozen=True)
class SeededRandom(BooleanFunction):
    """Pseudorandom function: f(x) is the top bit of splitmix64(x ^ key(seed))."""

    n: int
    seed: int

    def __post_init__(self):
        _check_batch_dim(self.n)

    @property
    def _key(self) -> int:
        return _splitmix_int(self.seed & _MASK64)

    def _eval_int(self, x):
        return _splitmix_int(x ^ self._key) >> 63

    def evaluate_many(self, xs):
        z = _splitmix_array(_as_points(xs) ^ _U64(self._key))
        return (z >> _U64(63)).astype(np.uint8)

    def describe(self):
        return f"random n={self.n} seed={self.seed}"


# ---------- convenience constructors


def constant(n: int, value: int = 0) -> BooleanFunction:
    return Gf2Polynomial(n, frozenset({0} if value else set()))


def dictator(n: int, i: int) -> KLinear:
    return KLinear(n, (i,))


def parity_function(n: int) -> KLinear:
    return KLinear(n, tuple(range(n)))


def majority(n: int) -> PartiallySymmetric:
    w = np.arange(n + 1)
    return PartiallySymmetric(n, (), (2 * w > n).astype(np.uint8))


def symmetric_function(n: int, layer_values: Sequence[int]) -> PartiallySymmetric:
    """Symmetric function with value ``layer_values[w]`` on Hamming weight ``w``."""
    return PartiallySymmetric(n, (), np.asarray(layer_values, dtype=np.uint8))


# ---------- core operations


def _point_bits(f: BooleanFunction, x) -> int:
    if isinstance(x, BitVector):
        if x.n != f.n:
            raise DimensionError(f"point has dimension {x.n}, function has {f.n}")
        return x.bits
    x = int(x)
    if x < 0 or x >> f.n:
        raise DimensionError(f"point {x:#x} does not lie in Z_2^{f.n}")
    return x


def evaluate(f: BooleanFunction, x) -> int:
    """f(x) for a :class:`BitVector` (or an int point)."""
    return int(f._eval_int(_point_bits(f, x)))


def all_points(n: int) -> np.ndarray:
    _check_table_dim(n)
    return np.arange(1 << n, dtype=np.uint64)


def truth_table(f: BooleanFunction) -> np.ndarray:
    """Dense table of 2^n bits; entry ``x`` is f(x)."""
    _check_table_dim(f.n)
    if isinstance(f, TruthTable):
        return f.table
    return f.evaluate_many(all_points(f.n)).astype(np.uint8)


def to_truth_table(f: BooleanFunction) -> TruthTable:
    return f if isinstance(f, TruthTable) else TruthTable(f.n, truth_table(f))


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform of a length-2^m array.

    ``out[s] = sum_x a[x] * (-1)^{popcount(x & s)}``; integer inputs stay exact.
    """
    a = np.asarray(a)
    size = a.shape[0]
    if size & (size - 1):
        raise ContractError("length must be a power of two")
    # |out| <= size * max|a|, so int32 is exact for +-1 inputs up to 2^30 points
    small = a.dtype.kind in "iub" and size < 1 << 30 and np.abs(a).max(initial=0) <= 1
    a = a.astype(np.int32 if small else np.result_type(a, np.int64), copy=True)
    diff = np.empty(size // 2, dtype=a.dtype)
    h = 1
    while h < size:
        view = a.reshape(-1, 2, h)
        d = diff.reshape(-1, h)
        np.subtract(view[:, 0, :], view[:, 1, :], out=d)
        view[:, 0, :] += view[:, 1, :]
        view[:, 1, :] = d
        h <<= 1
    return a.astype(np.int64) if small else a


def signed_table(table: np.ndarray) -> np.ndarray:
    """Map bits to +-1 via b -> (-1)^b as int64."""
    return 1 - 2 * np.asarray(table, dtype=np.int64)


@dataclass(frozen=True, eq=False)
class FourierSpectrum:
    """Fourier coefficients indexed by subset mask: ``coefficients[mask(S)]``."""

    n: int
    coefficients: np.ndarray = field(repr=False)

    def __getitem__(self, subset) -> float:
        mask = int(subset) if isinstance(subset, (int, np.integer)) else index_mask(subset)
        return float(self.coefficients[mask])

    def parseval_sum(self) -> float:
        return float(np.sum(self.coefficients ** 2))

    def max_coefficient(self) -> float:
        return float(np.max(self.coefficients))

    def support(self, tol: float = 1e-12) -> dict[tuple[int, ...], float]:
        nz = np.flatnonzero(np.abs(self.coefficients) > tol)
        return {mask_indices(int(s)): float(self.coefficients[s]) for s in nz}


def walsh_hadamard(f: BooleanFunction) -> FourierSpectrum:
    """Fourier spectrum of f under the +-1 convention."""
    raw = fwht(signed_table(truth_table(f)))
    return FourierSpectrum(f.n, raw / float(1 << f.n))


def exact_distance(f: BooleanFunction, g: BooleanFunction) -> Fraction:
    """Fraction of points where f and g differ."""
    if f.n != g.n:
        raise DimensionError(f"dimensions differ: {f.n} vs {g.n}")
    diff = np.count_nonzero(truth_table(f) != truth_table(g))
    return Fraction(int(diff), 1 << f.n)


def estimate_distance(f: BooleanFunction, g: BooleanFunction, m: int,
                      rng: np.random.Generator) -> float:
    """Mean disagreement of f and g over m uniform points."""
    if f.n != g.n:
        raise DimensionError(f"dimensions differ: {f.n} vs {g.n}")
    if m < 1:
        raise ContractError("need at least one sample")
    xs = random_points(f.n, m, rng)
    return float(np.mean(f.evaluate_many(xs) != g.evaluate_many(xs)))


def relevant_variables(f: BooleanFunction) -> tuple[int, ...]:
    """Coordinates i with f(x) != f(x ^ e_i) for some x (dense, n <= 24)."""
    table = truth_table(f)
    idx = np.arange(table.size)
    return tuple(i for i in range(f.n) if np.any(table != table[idx ^ (1 << i)]))


def anf(f: BooleanFunction) -> np.ndarray:
    """Algebraic normal form coefficients (Moebius transform) indexed by monomial mask."""
    a = truth_table(f).astype(np.uint8).copy()
    h = 1
    while h < a.size:
        view = a.reshape(-1, 2, h)
        view[:, 1, :] ^= view[:, 0, :]
        h <<= 1
    return a


def algebraic_degree(f: BooleanFunction) -> int:
    coeffs = anf(f)
    nz = np.flatnonzero(coeffs)
    if nz.size == 0:
        return -1
    return int(popcount(nz.astype(np.uint64)).max())


def swap_invariant(table: np.ndarray, i: int, j: int) -> bool:
    """Whether exchanging coordinates i and j leaves the tabled function unchanged."""
    idx = np.arange(table.size, dtype=np.int64)
    differ = ((idx >> i) ^ (idx >> j)) & 1
    swapped = idx ^ (differ * ((1 << i) | (1 << j)))
    return bool(np.array_equal(table, table[swapped]))


def symmetry_classes(f: BooleanFunction) -> list[tuple[int, ...]]:
    """Partition of [n] into classes of coordinates that can be exchanged freely.

    Invariance under a transposition is an equivalence relation on
    coordinates, and a set T is a symmetry set iff it lies inside one class.
    """
    table = truth_table(f)
    classes: list[list[int]] = []
    for j in range(f.n):
        for cls in classes:
            if swap_invariant(table, cls[0], j):
                cls.append(j)
                break
        else:
            classes.append([j])
    return [tuple(c) for c in classes]


# ---------- serialization


def write_truth_table(path, f: BooleanFunction) -> None:
    """Binary format: uint32 LE n, then 2^n bits packed LSB-first."""
    table = truth_table(f)
    payload = np.packbits(table, bitorder="little").tobytes()
    Path(path).write_bytes(struct.pack("<I", f.n) + payload)


def read_truth_table(path) -> TruthTable:
    data = Path(path).read_bytes()
    if len(data) < 4:
        raise ContractError(f"{path}: truncated header")
    (n,) = struct.unpack("<I", data[:4])
    _check_table_dim(n)
    nbytes = ((1 << n) + 7) // 8
    body = np.frombuffer(data[4:4 + nbytes], dtype=np.uint8)
    if body.size != nbytes:
        raise ContractError(f"{path}: expected {nbytes} body bytes, found {body.size}")
    bits = np.unpackbits(body, bitorder="little")[: 1 << n]
    return TruthTable(n, bits)


_TOKEN = re.compile(r"(\w+)=(\S*)")


def _indices(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.split(",") if t != "")


def _bits(text: str) -> np.ndarray:
    if any(c not in "01" for c in text):
        raise ContractError(f"not a bit string: {text!r}")
    return np.array([int(c) for c in text], dtype=np.uint8)


def parse_function(descriptor: str) -> BooleanFunction:
    """Parse a textual descriptor such as ``klinear n=10 I=1,4,7``.

    Kinds: ``klinear I=``, ``junta J= table=``, ``psym A= table=row/row``,
    ``poly M=x0x1+x2+1``, ``random seed=``, ``majority``, ``parity``,
    ``dictator i=``, ``const b=``, ``table bits=`` or ``table path=``.
    Indices are 0-based; table bit strings list entries from index 0.
    """
    head, _, rest = descriptor.strip().partition(" ")
    kind = head.lower()
    opts = dict(_TOKEN.findall(rest))
    if kind == "table" and "path" in opts:
        return read_truth_table(opts["path"])
    if "n" not in opts:
        raise ContractError(f"descriptor {descriptor!r} is missing n=")
    n = int(opts["n"])
    if kind == "klinear":
        return KLinear(n, _indices(opts.get("I", "")))
    if kind == "junta":
        return Junta(n, _indices(opts.get("J", "")), _bits(opts["table"]))
    if kind == "psym":
        rows = [_bits(r) for r in opts["table"].split("/")]
        return PartiallySymmetric(n, _indices(opts.get("A", "")), np.array(rows))
    if kind == "poly":
        monomials = set()
        text = opts.get("M", "0")
        for term in text.split("+"):
            term = term.strip()
            if term in ("", "0"):
                continue
            if term == "1":
                monomials ^= {0}
                continue
            found = re.fullmatch(r"(x\d+)+", term)
            if not found:
                raise ContractError(f"bad monomial {term!r}")
            monomials ^= {index_mask(int(v) for v in re.findall(r"x(\d+)", term))}
        return Gf2Polynomial(n, frozenset(monomials))
    if kind == "random":
        return SeededRandom(n, int(opts.get("seed", 0)))
    if kind == "majority":
        return majority(n)
    if kind == "parity":
        return parity_function(n)
    if kind == "dictator":
        return dictator(n, int(opts.get("i", 0)))
    if kind == "const":
        return constant(n, int(opts.get("b", 0)))
    if kind == "table":
        return TruthTable(n, _bits(opts["bits"]))
    raise ContractError(f"unknown function kind {kind!r}")


def k_subsets(n: int, k: int):
    return combinations(range(n), k)
