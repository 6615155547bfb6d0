"""Parametric families of Boolean functions.

Each :class:`Family` supports uniform sampling, a membership decision, an
exact distance-to-family oracle on dense tables, greedy epsilon-nets, and
generation of certified far instances.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, exp, log, sqrt
from typing import Iterator

import numpy as np

from .boolfn import (
    MAX_TABLE_DIM,
    BooleanFunction,
    Gf2Polynomial,
    Junta,
    KLinear,
    PartiallySymmetric,
    SeededRandom,
    algebraic_degree,
    all_points,
    fwht,
    gather_bits,
    mask_indices,
    popcount,
    random_points,
    relevant_variables,
    signed_table,
    symmetry_classes,
    truth_table,
)
from .errors import CapacityError, ContractError, GenerationFailure
from .gf2 import MonomialBasis, monomial_count

KINDS = ("lin", "junta", "sym", "psym", "pol", "linear")

# Work limits for brute-force oracles (element operations).
MAX_CELL_WORK = 1 << 28
MAX_ENUMERATION = 1 << 20
MAX_CODEWORDS = 1 << 22


@dataclass(frozen=True)
class Family:
    """A named parametric family.

    ``param`` is k for ``lin``/``junta``/``psym`` (Lin_k, Jun_k, Sym_{n-k}),
    t for ``sym`` (Sym_t) and d for ``pol`` (Pol_d, affine terms included).
    ``linear`` is the homogeneous linear functions and ignores ``param``.
    """

    kind: str
    n: int
    param: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ContractError(f"unknown family kind {self.kind!r}")
        if self.n < 1:
            raise ContractError("n must be positive")
        if self.kind != "linear" and not 0 <= self.param <= self.n:
            raise ContractError(f"{self.kind} parameter {self.param} must lie in [0, {self.n}]")

    @classmethod
    def lin(cls, n: int, k: int) -> "Family":
        return cls("lin", n, k)

    @classmethod
    def junta(cls, n: int, k: int) -> "Family":
        return cls("junta", n, k)

    @classmethod
    def sym(cls, n: int, t: int | None = None) -> "Family":
        return cls("sym", n, n if t is None else t)

    @classmethod
    def psym(cls, n: int, k: int) -> "Family":
        return cls("psym", n, k)

    @classmethod
    def pol(cls, n: int, d: int) -> "Family":
        return cls("pol", n, d)

    @classmethod
    def linear(cls, n: int) -> "Family":
        return cls("linear", n, 1)

    @property
    def asymmetric_size(self) -> int:
        """Size of the asymmetric set for the partially symmetric kinds."""
        if self.kind == "sym":
            return self.n - self.param
        if self.kind == "psym":
            return self.param
        raise ContractError(f"{self.kind} is not a partially symmetric family")

    def describe(self) -> str:
        key = {"lin": "k", "junta": "k", "psym": "k", "sym": "t", "pol": "d"}.get(self.kind)
        extra = f" {key}={self.param}" if key else ""
        return f"family={self.kind} n={self.n}{extra}"


def parse_family(text: str) -> Family:
    """Parse ``family=lin k=3 n=50`` (``family=`` prefix optional)."""
    opts = dict(re.findall(r"(\w+)=(\S+)", text))
    words = [w for w in text.split() if "=" not in w]
    kind = opts.get("family") or (words[0] if words else None)
    if kind is None or "n" not in opts:
        raise ContractError(f"cannot parse family from {text!r}")
    n = int(opts["n"])
    if kind == "linear":
        return Family.linear(n)
    if kind == "sym":
        return Family.sym(n, int(opts.get("t", n)))
    key = "d" if kind == "pol" else "k"
    if key not in opts:
        raise ContractError(f"family {kind} needs {key}=")
    return Family(kind, n, int(opts[key]))


def count_members(F: Family) -> int:
    """Exact number of distinct functions in F."""
    n, p = F.n, F.param
    if F.kind == "lin":
        return comb(n, p)
    if F.kind == "linear":
        return 1 << n
    if F.kind == "pol":
        return 1 << monomial_count(n, p)
    if F.kind == "junta":
        return sum(comb(n, r) * _depend_on_all(r) for r in range(p + 1))
    return len(member_tables(F))


def _depend_on_all(r: int) -> int:
    """Number of functions of r variables that depend on every one of them."""
    return sum((-1) ** (r - i) * comb(r, i) * 2 ** (2 ** i) for i in range(r + 1))


# ---------- enumeration


def members(F: Family) -> Iterator[BooleanFunction]:
    """Distinct members of F in a fixed order.

    lin: k-sets in lexicographic order.  linear: masks 0..2^n-1.
    pol: coefficient vectors 0..2^{n_d}-1 over the degree-lex monomial basis.
    junta: J in lexicographic order, subtables in index order, each function
    emitted once at the first J containing its relevant variables.
    sym/psym: asymmetric sets in lexicographic order, tables in index order,
    duplicates removed.
    """
    n, p = F.n, F.param
    if F.kind == "lin":
        for subset in combinations(range(n), p):
            yield KLinear(n, subset)
    elif F.kind == "linear":
        _gate(1 << n, MAX_ENUMERATION, "linear functions")
        for mask in range(1 << n):
            yield KLinear(n, mask_indices(mask))
    elif F.kind == "pol":
        basis = MonomialBasis(n, p)
        _gate(1 << basis.size, MAX_ENUMERATION, "polynomials")
        for coeffs in range(1 << basis.size):
            yield Gf2Polynomial(n, frozenset(m for j, m in enumerate(basis.monomials)
                                             if (coeffs >> j) & 1))
    elif F.kind == "junta":
        _gate(comb(n, p) << (1 << p), MAX_ENUMERATION, "junta representations")
        for subset in combinations(range(n), p):
            for code in range(1 << (1 << p)):
                sub = _bits_of(code, 1 << p)
                rel = _relevant_in_subtable(sub, p)
                support = {subset[j] for j in rel}
                if set(subset) == _canonical_superset(support, p, n):
                    yield Junta(n, subset, sub)
    else:
        k = F.asymmetric_size
        cells = (1 << k) * (n - k + 1)
        _gate(comb(n, k) << cells, MAX_ENUMERATION, "partially symmetric representations")
        seen: set[bytes] = set()
        for subset in combinations(range(n), k):
            for code in range(1 << cells):
                f = PartiallySymmetric(n, subset, _bits_of(code, cells).reshape(1 << k, n - k + 1))
                if k == 0:
                    yield f
                    continue
                key = np.packbits(truth_table(f)).tobytes()
                if key not in seen:
                    seen.add(key)
                    yield f


def member_tables(F: Family) -> np.ndarray:
    """Truth tables of :func:`members` stacked as rows (uint8)."""
    _table_gate(F.n)
    tables = [truth_table(f) for f in members(F)]
    return np.array(tables, dtype=np.uint8).reshape(len(tables), 1 << F.n)


def _bits_of(code: int, width: int) -> np.ndarray:
    return ((code >> np.arange(width)) & 1).astype(np.uint8)


def _relevant_in_subtable(sub: np.ndarray, k: int) -> list[int]:
    idx = np.arange(sub.size)
    return [j for j in range(k) if np.any(sub != sub[idx ^ (1 << j)])]


def _canonical_superset(support: set[int], k: int, n: int) -> set[int]:
    out = set(support)
    i = 0
    while len(out) < k:
        out.add(i)
        i += 1
    return out


def _gate(work: int, limit: int, what: str) -> None:
    if work > limit:
        raise CapacityError(f"enumerating {work} {what} exceeds the limit of {limit}")


def _table_gate(n: int) -> None:
    if n > MAX_TABLE_DIM:
        raise CapacityError(f"dense oracles are capped at n = {MAX_TABLE_DIM}")


# ---------- sampling


def sample_uniform(F: Family, rng: np.random.Generator) -> BooleanFunction:
    """A uniformly random member of F in structured form.

    Juntas and partially symmetric functions are drawn as random
    (index set, table) pairs and accepted with probability 1/multiplicity,
    which makes every distinct function equally likely.
    """
    n, p = F.n, F.param
    if F.kind == "lin":
        return KLinear(n, tuple(sorted(int(i) for i in rng.choice(n, p, replace=False))))
    if F.kind == "linear":
        bits = rng.integers(0, 2, size=n)
        return KLinear(n, tuple(int(i) for i in np.flatnonzero(bits)))
    if F.kind == "pol":
        basis = MonomialBasis(n, p)
        coeffs = rng.integers(0, 2, size=basis.size)
        return Gf2Polynomial(n, frozenset(m for m, c in zip(basis.monomials, coeffs) if c))
    if F.kind == "junta":
        while True:
            subset = tuple(sorted(int(i) for i in rng.choice(n, p, replace=False)))
            sub = rng.integers(0, 2, size=1 << p).astype(np.uint8)
            r = len(_relevant_in_subtable(sub, p))
            if rng.random() * comb(n - r, p - r) < 1:
                return Junta(n, subset, sub)
    k = F.asymmetric_size
    while True:
        subset = tuple(sorted(int(i) for i in rng.choice(n, k, replace=False)))
        table = rng.integers(0, 2, size=(1 << k, n - k + 1)).astype(np.uint8)
        f = PartiallySymmetric(n, subset, table)
        if rng.random() * _psym_multiplicity(f) < 1:
            return f


def _psym_multiplicity(f: PartiallySymmetric) -> int:
    """Number of k-sets A' for which f is representable with asymmetric set A'."""
    n, k = f.n, f.k
    if k == n:
        return 1
    if 2 * k < n:
        size = n - k
        for j in range(k):
            alphas = [a for a in range(1 << k) if (a >> j) & 1]
            if all(np.array_equal(f.table[a, : n - k], f.table[a ^ (1 << j), 1:]) for a in alphas):
                size += 1
        return comb(size, n - k)
    if n > 16:
        raise CapacityError("uniform psym sampling with 2k >= n needs n <= 16")
    return sum(comb(len(c), n - k) for c in symmetry_classes(f))


# ---------- membership


def is_member(f: BooleanFunction, F: Family) -> bool:
    """Whether f equals some member of F pointwise."""
    if f.n != F.n:
        return False
    quick = _syntactic_membership(f, F)
    if quick is not None:
        return quick
    _table_gate(F.n)
    n, p = F.n, F.param
    if F.kind in ("lin", "linear"):
        coeffs = fwht(signed_table(truth_table(f)))
        hits = np.flatnonzero(coeffs == (1 << n))
        if F.kind == "linear":
            return hits.size > 0
        return bool(np.any(popcount(hits.astype(np.uint64)) == p))
    if F.kind == "pol":
        return algebraic_degree(f) <= p
    if F.kind == "junta":
        return len(relevant_variables(f)) <= p
    need = n - F.asymmetric_size
    if need <= 1:
        return True
    return max(len(c) for c in symmetry_classes(f)) >= need


def _syntactic_membership(f: BooleanFunction, F: Family) -> bool | None:
    n, p = F.n, F.param
    if isinstance(f, KLinear):
        k = f.k
        if F.kind == "lin":
            return k == p
        if F.kind == "linear":
            return True
        if F.kind == "pol":
            return k == 0 or p >= 1
        if F.kind == "junta":
            return k <= p
        need = n - F.asymmetric_size
        return need <= 1 or max(k, n - k) >= need
    if isinstance(f, Gf2Polynomial) and F.kind == "pol" and f.degree <= p:
        return True
    if isinstance(f, Junta) and F.kind == "junta" and len(f.indices) <= p:
        return True
    if isinstance(f, PartiallySymmetric) and F.kind in ("sym", "psym") \
            and f.k <= F.asymmetric_size:
        return True
    return None


# ---------- distances


def exact_distance_to_family(f: BooleanFunction, F: Family) -> Fraction:
    """min over members g of dist(f, g), by exhaustive computation."""
    _table_gate(F.n)
    n, p = F.n, F.param
    size = 1 << n
    table = truth_table(f)
    if F.kind in ("lin", "linear") or (F.kind == "pol" and p <= 1):
        coeffs = fwht(signed_table(table))
        if F.kind == "lin":
            coeffs = coeffs[popcount(np.arange(size, dtype=np.uint64)) == p]
        elif F.kind == "pol":
            coeffs = np.abs(coeffs) if p == 1 else np.abs(coeffs[:1])
        best = int(coeffs.max())
        return Fraction((size - best) // 2, size)
    if F.kind == "pol":
        return Fraction(_min_codeword_distance(table, MonomialBasis(n, p)), size)
    if F.kind == "junta":
        return Fraction(_best_cell_errors(table, n, p, by_weight=False), size)
    return Fraction(_best_cell_errors(table, n, F.asymmetric_size, by_weight=True), size)


def _cell_ids(xs: np.ndarray, n: int, subset: tuple[int, ...], by_weight: bool) -> np.ndarray:
    alpha = gather_bits(xs, subset)
    if not by_weight:
        return alpha
    rest_mask = ((1 << n) - 1) & ~sum(1 << i for i in subset)
    return alpha * (n + 1) + popcount(xs & np.uint64(rest_mask))


def _best_cell_errors(table: np.ndarray, n: int, k: int, by_weight: bool) -> int:
    """min over k-sets of sum over cells of the minority count."""
    _gate(comb(n, k) << n, MAX_CELL_WORK, "cell evaluations")
    xs = all_points(n)
    values = table.astype(np.int64)
    ncells = (1 << k) * (n + 1 if by_weight else 1)
    best = None
    for subset in combinations(range(n), k):
        cells = _cell_ids(xs, n, subset, by_weight)
        ones = np.bincount(cells, weights=values, minlength=ncells).astype(np.int64)
        total = np.bincount(cells, minlength=ncells)
        errors = int(np.minimum(ones, total - ones).sum())
        best = errors if best is None else min(best, errors)
        if best == 0:
            break
    return best


def _min_codeword_distance(table: np.ndarray, basis: MonomialBasis) -> int:
    n = basis.n
    _gate(1 << basis.size, MAX_CODEWORDS, "codewords")
    if n > 6:
        raise CapacityError("codeword enumeration packs tables into 64 bits (n <= 6)")
    xs = all_points(n)
    weights = np.uint64(1) << xs
    def pack(bits):
        return np.uint64(np.sum(weights[bits.astype(bool)], dtype=np.uint64))
    codes = np.zeros(1, dtype=np.uint64)
    for m in basis.monomials:
        g = pack((xs & np.uint64(m)) == np.uint64(m))
        codes = np.concatenate([codes, codes ^ g])
    return int(popcount(codes ^ pack(table)).min())


def estimate_distance_to_family(f: BooleanFunction, F: Family, m: int,
                                rng: np.random.Generator) -> float:
    """Plug-in estimate of the distance from f to a junta/symmetric family.

    For every candidate index set the sample is split into cells and the
    minority fraction is counted.  Refitting on the sample biases the
    estimate downwards, so it is a conservative lower estimate.
    """
    if F.kind not in ("junta", "sym", "psym"):
        raise CapacityError(f"no sampling estimator for family {F.kind}")
    n = F.n
    k = F.param if F.kind == "junta" else F.asymmetric_size
    by_weight = F.kind != "junta"
    _gate(comb(n, k) * m, MAX_CELL_WORK, "sampled cell evaluations")
    xs = random_points(n, m, rng)
    values = f.evaluate_many(xs).astype(np.int64)
    ncells = (1 << k) * (n + 1 if by_weight else 1)
    best = m
    for subset in combinations(range(n), k):
        cells = _cell_ids(xs, n, subset, by_weight)
        ones = np.bincount(cells, weights=values, minlength=ncells).astype(np.int64)
        total = np.bincount(cells, minlength=ncells)
        best = min(best, int(np.minimum(ones, total - ones).sum()))
    return best / m


@dataclass(frozen=True)
class FarCertificate:
    distance: float
    lower_bound: float
    method: str
    certified: bool


def certify_far(f: BooleanFunction, F: Family, eps: float, rng: np.random.Generator,
                samples: int = 20000) -> FarCertificate:
    """Certify dist(f, F) >= eps: exactly when feasible, else estimate minus 3 standard errors."""
    try:
        d = exact_distance_to_family(f, F)
        return FarCertificate(float(d), float(d), "exact", d >= _as_fraction(eps))
    except CapacityError:
        pass
    if F.kind in ("junta", "sym", "psym"):
        est = estimate_distance_to_family(f, F, samples, rng)
        lower = est - 3 / (2 * sqrt(samples))
        return FarCertificate(est, lower, "estimate", lower >= eps)
    if isinstance(f, SeededRandom):
        fail = counting_failure_bound(F, eps)
        return FarCertificate(float("nan"), eps, "counting", fail <= COUNTING_FAILURE)
    raise CapacityError(f"no far-certification path for {f.describe()} against {F.describe()}")


COUNTING_FAILURE = 1e-9


def counting_failure_bound(F: Family, eps: float) -> float:
    """Pr[a uniformly random function is eps-close to F] <= |F| exp(-2^n D(eps || 1/2)).

    Union bound over members with the Chernoff tail of Bin(2^n, 1/2).  It
    certifies a keyed pseudorandom target only in this averaged sense.
    """
    if eps >= 0.5:
        return 1.0
    div = (eps * log(2 * eps) if eps > 0 else 0.0) + (1 - eps) * log(2 * (1 - eps))
    log_fail = log(count_members(F)) - (2.0 ** F.n) * div
    return exp(log_fail) if log_fail < 700 else float("inf")


def far_function_generator(F: Family, eps: float, rng: np.random.Generator,
                           max_tries: int = 20) -> BooleanFunction:
    """A seeded pseudorandom function certified to be eps-far from F."""
    for _ in range(max_tries):
        f = SeededRandom(F.n, int(rng.integers(0, 2 ** 63)))
        if eps <= 0 or certify_far(f, F, eps, rng).certified:
            return f
    raise GenerationFailure(f"no {eps}-far function for {F.describe()} after {max_tries} tries")


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


# ---------- packings


@dataclass(frozen=True, eq=False)
class EpsilonNet:
    family: Family
    eps: float
    members: list[BooleanFunction]
    tables: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.members)


def greedy_epsilon_net(F: Family, eps) -> EpsilonNet:
    """Greedy pairwise eps-far subfamily in enumeration order (not a maximum packing)."""
    _table_gate(F.n)
    need = _as_fraction(eps) * (1 << F.n)
    kept: list[BooleanFunction] = []
    kept_tables: list[np.ndarray] = []
    stack = np.zeros((0, 1 << F.n), dtype=np.uint8)
    for f in members(F):
        t = truth_table(f)
        if stack.shape[0] == 0 or np.all((stack != t).sum(axis=1) >= need):
            kept.append(f)
            kept_tables.append(t)
            stack = np.array(kept_tables, dtype=np.uint8)
    return EpsilonNet(F, eps, kept, stack)
