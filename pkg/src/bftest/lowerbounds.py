"""Lower-bound machinery as runnable experiments.

k-subset sums over Z_2^q are counted exactly with characters: for a
character chi with a points mapping to +1 and b to -1, the signed sum over
all k-subsets is e_k = sum_j C(a,j) C(b,k-j) (-1)^(k-j), and an inverse
Walsh-Hadamard transform turns these into counts per target.  Over Z_N a
dynamic program over (subset size, partial sum) does the same job.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, comb, log, log2
from typing import Iterable, Sequence

import numpy as np
from scipy.stats import binomtest

from .boolfn import BitVector, fwht, popcount, random_points
from .errors import CapacityError, ContractError, DimensionError
from .gf2 import MonomialBasis, XorBasis, d_evaluations, points_to_rows

MAX_GROUP_ORDER = 1 << 22
MAX_DP_WORK = 1 << 33
MAX_CAYLEY_ORDER = 10 ** 6


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    if trials == 0:
        return 0.0, 1.0
    ci = binomtest(successes, trials).proportion_ci(confidence, "wilson")
    return float(ci.low), float(ci.high)


# ---------- groups


@dataclass(frozen=True)
class AbelianGroup:
    """Z_2^q (elements are q-bit ints, addition XOR) or Z_N (residues, addition mod N)."""

    kind: str
    order: int
    q: int = 0

    def __post_init__(self):
        if self.kind not in ("z2q", "zn"):
            raise ContractError(f"unknown group kind {self.kind!r}")
        if self.order < 1:
            raise ContractError("group order must be positive")

    @classmethod
    def z2q(cls, q: int) -> "AbelianGroup":
        return cls("z2q", 1 << q, q)

    @classmethod
    def zn(cls, N: int) -> "AbelianGroup":
        return cls("zn", N)

    def add(self, a: int, b: int) -> int:
        return a ^ b if self.kind == "z2q" else (a + b) % self.order

    def neg(self, a: int) -> int:
        return a if self.kind == "z2q" else (-a) % self.order

    @property
    def identity(self) -> int:
        return 0

    def elements(self) -> range:
        return range(self.order)

    def random(self, m: int, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.order, size=m, dtype=np.int64)

    def describe(self) -> str:
        return f"Z2^{self.q}" if self.kind == "z2q" else f"Z{self.order}"


def parse_group(text: str) -> AbelianGroup:
    """'z2^4' / 'z2q:4' or 'z10000' / 'zn:10000'."""
    t = text.strip().lower().replace(" ", "")
    for prefix in ("z2^", "z2q:", "z2q"):
        if t.startswith(prefix):
            return AbelianGroup.z2q(int(t[len(prefix):]))
    for prefix in ("zn:", "zn", "z"):
        if t.startswith(prefix):
            return AbelianGroup.zn(int(t[len(prefix):]))
    raise ContractError(f"cannot parse group {text!r}")


# ---------- k-subset sums


def _elementary_signed(n: int, k: int) -> list[int]:
    """e_k for a = 0..n plus-ones (and n - a minus-ones)."""
    return [sum(comb(a, j) * comb(n - a, k - j) * (-1) ** (k - j) for j in range(k + 1))
            for a in range(n + 1)]


def sumset_counts(group: AbelianGroup, X: Sequence[int], k: int) -> np.ndarray:
    """Number of k-subsets of the index set of X summing to each group element."""
    X = np.asarray(X, dtype=np.int64)
    n, N = len(X), group.order
    if k < 0 or k > n:
        return np.zeros(N, dtype=np.int64)
    if np.any((X < 0) | (X >= N)):
        raise DimensionError(f"elements must lie in 0..{N - 1}")
    dtype = np.int64 if comb(n, k) * N < 1 << 62 else object
    if group.kind == "z2q":
        if N > MAX_GROUP_ORDER:
            raise CapacityError(f"group order {N} exceeds {MAX_GROUP_ORDER}")
        hist = np.bincount(X, minlength=N).astype(dtype)
        plus = (fwht(hist) + n) // 2
        ek = np.array(_elementary_signed(n, k), dtype=dtype)[plus.astype(np.int64)]
        return fwht(ek) // N
    if n * k * N > MAX_DP_WORK:
        raise CapacityError(f"subset-sum DP over Z_{N} with n={n}, k={k} is too large")
    dp = np.zeros((k + 1, N), dtype=dtype)
    dp[0, 0] = 1
    for x in X:
        for j in range(k, 0, -1):
            dp[j] += np.roll(dp[j - 1], int(x))
    return dp[k]


def sumset_Y_count(group: AbelianGroup, X: Sequence[int], y: int, k: int) -> int:
    """|{I in C([n], k) : sum_{i in I} x_i = y}|."""
    return int(sumset_counts(group, X, k)[int(y) % group.order])


@dataclass(frozen=True)
class SumsetStatistic:
    group: AbelianGroup
    X: tuple[int, ...]
    y: int
    k: int
    Y: int

    @classmethod
    def compute(cls, group, X, y, k) -> "SumsetStatistic":
        return cls(group, tuple(int(x) for x in X), int(y), k, sumset_Y_count(group, X, y, k))

    @property
    def expected(self) -> Fraction:
        return Fraction(comb(len(self.X), self.k), self.group.order)


# ---------- pi_S


def columns(S, n: int) -> np.ndarray:
    """Columns c_i(S), i < n, of the q x n matrix whose rows are the query points."""
    pts = [p.bits if isinstance(p, BitVector) else int(p) for p in S]
    q = len(pts)
    if q > 62:
        raise CapacityError("column packing supports q <= 62")
    rows = np.array(pts, dtype=np.uint64)
    cols = np.zeros(n, dtype=np.int64)
    for j in range(q):
        bits = ((int(rows[j]) >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)
        cols |= bits << j
    return cols


def pi_S_counts(S, n: int, k: int) -> np.ndarray:
    """For each y in Z_2^q, the number of k-sets of columns of S summing to y."""
    return sumset_counts(AbelianGroup.z2q(len(S)), columns(S, n), k)


def pi_S(S, y, k: int, n: int | None = None) -> Fraction:
    """Exact fraction of k-subsets of the columns of S that sum to y."""
    if n is None:
        dims = {p.n for p in S if isinstance(p, BitVector)}
        if len(dims) != 1:
            raise DimensionError("pass n or give the points as BitVectors of one dimension")
        n = dims.pop()
    yv = y.bits if isinstance(y, BitVector) else int(y)
    if isinstance(y, BitVector) and y.n != len(S):
        raise DimensionError(f"y has length {y.n}, S has {len(S)} points")
    return Fraction(int(pi_S_counts(S, n, k)[yv]), comb(n, k))


def pi_S_distribution(S, n: int, k: int) -> np.ndarray:
    """Output distribution of a uniformly random k-linear function on the points of S."""
    return pi_S_counts(S, n, k).astype(np.float64) / comb(n, k)


def tv_distance(p, u, tol: float = 1e-9) -> float:
    p = np.asarray(p, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    if p.shape != u.shape:
        raise DimensionError(f"support sizes differ: {p.shape} vs {u.shape}")
    for name, d in (("p", p), ("u", u)):
        if abs(d.sum() - 1) > tol or np.any(d < -tol):
            raise ContractError(f"{name} is not a probability distribution (sum {d.sum()})")
    return float(0.5 * np.abs(p - u).sum())


def klinear_output_tv(S, n: int, k: int) -> float:
    """TV between a random k-linear function's answers on S and uniform answers."""
    q = len(S)
    return tv_distance(pi_S_distribution(S, n, k), np.full(1 << q, 2.0 ** -q))


def klinear_tv_experiment(n: int, k: int, q: int, trials: int,
                          rng: np.random.Generator) -> float:
    """Mean TV over uniformly random q-point query sets."""
    return float(np.mean([klinear_output_tv(random_points(n, q, rng), n, k)
                          for _ in range(trials)]))


@dataclass
class PiSReport:
    q: int
    k: int
    n: int
    trials: int
    pair_violations: int
    set_violations: int
    threshold: Fraction

    @property
    def pair_rate(self) -> float:
        return self.pair_violations / (self.trials << self.q)

    @property
    def set_rate(self) -> float:
        return self.set_violations / self.trials

    @property
    def transition_q(self) -> float:
        return (1 - 1 / self.k) * log2(comb(self.n, self.k))


def lemma21_criterion(U: np.ndarray, q: int, k: int, trials: int, rng: np.random.Generator,
                      n: int | None = None) -> PiSReport:
    """Rate of (S, y) with pi_S(y) >= (6/5) 2^-q over random q-subsets S of the pool U.

    S is sampled, y ranges over all of Z_2^q exactly.  The report also keeps
    the fraction of sets S having at least one violating y.
    """
    U = np.asarray(U, dtype=np.uint64)
    if q > len(U):
        raise ContractError(f"q = {q} exceeds the pool size {len(U)}")
    if q > 22:
        raise CapacityError("exact sweep over y is capped at q <= 22")
    n = int(max(1, int(U.max()).bit_length())) if n is None else n
    total = comb(n, k)
    pairs = sets = 0
    for _ in range(trials):
        S = U[rng.choice(len(U), size=q, replace=False)]
        counts = pi_S_counts(S, n, k)
        # count / C(n,k) >= 6/5 * 2^-q  <=>  5 * 2^q * count >= 6 * C(n,k)
        bad = int(np.count_nonzero(counts * (5 << q) >= 6 * total))
        pairs += bad
        sets += bad > 0
    return PiSReport(q, k, n, trials, pairs, sets, Fraction(6, 5 << q))


# ---------- sumset concentration


@dataclass
class ConcentrationReport:
    group: str
    n: int
    k: int
    y: int
    trials: int
    mean: float
    expected: Fraction
    tail_count: int
    tail_ci: tuple[float, float]
    lambda_a: float
    lambda_b: float
    lam: float | None
    condition_a: bool | None
    condition_b: bool | None
    regime: str
    values: np.ndarray = field(repr=False)

    @property
    def tail_rate(self) -> float:
        return self.tail_count / self.trials


def concentration_conditions(n: int, k: int, N: int, lam: float) -> tuple[bool, bool]:
    a = comb(n, k) >= 800 * log(2) * k * N * lam ** (2 * k + 1)
    b = comb(n, k - 1) * k * 2 ** k <= lam * N
    return a, b


def regime_label(n: int, k: int, N: int) -> tuple[str, float, float]:
    """Label the parameters against the concentration lemma.

    lambda_a is the largest lambda allowed by condition (a), lambda_b the
    smallest allowed by (b) together with lambda >= 2 log N.  'full' means an
    integer lambda >= 650 satisfies both, 'conditions' that some integer
    lambda does but only below 650, 'out' that none does.
    """
    lam_a = (comb(n, k) / (800 * log(2) * k * N)) ** (1 / (2 * k + 1))
    lam_b = max(2 * log2(N), comb(n, k - 1) * k * 2 ** k / N)
    lo = ceil(lam_b)
    if lo > lam_a:
        return "out", lam_a, lam_b
    return ("full" if lam_a >= 650 else "conditions"), lam_a, lam_b


def sumset_concentration_experiment(group: AbelianGroup, n: int, k: int, y: int, trials: int,
                                    rng: np.random.Generator,
                                    lam: float | None = None) -> ConcentrationReport:
    """Empirical law of Y over uniform X in G^n, with the 1/5-relative tail and regime labels."""
    if trials < 1:
        raise ContractError("trials must be positive")
    N = group.order
    total = comb(n, k)
    values = np.array([sumset_Y_count(group, group.random(n, rng), y, k)
                       for _ in range(trials)], dtype=np.int64)
    # |Y - C/N| > C/(5N)  <=>  |5 N Y - 5 C| > C
    tail = int(np.count_nonzero(np.abs(5 * N * values - 5 * total) > total))
    label, lam_a, lam_b = regime_label(n, k, N)
    ca, cb = concentration_conditions(n, k, N, lam) if lam is not None else (None, None)
    return ConcentrationReport(group.describe(), n, k, y, trials, float(values.mean()),
                               Fraction(total, N), tail, wilson_interval(tail, trials),
                               lam_a, lam_b, lam, ca, cb, label, values)


# ---------- Delta-systems


def is_delta_system(sets: Iterable[Iterable[int]]) -> bool:
    """Distinct sets with one common pairwise intersection."""
    fam = [frozenset(s) for s in sets]
    if len(set(fam)) != len(fam):
        return False
    if len(fam) < 2:
        return True
    core = fam[0] & fam[1]
    return all(a & b == core for a, b in combinations(fam, 2))


def delta_core(sets) -> frozenset:
    fam = [frozenset(s) for s in sets]
    if len(fam) < 2:
        return fam[0] if fam else frozenset()
    return fam[0] & fam[1]


def erdos_rado_threshold(a: int, b: int) -> int:
    """(a-1)^(b+1) b!, the family size above which a Delta-system of size a is guaranteed."""
    f = 1
    for i in range(2, b + 1):
        f *= i
    return (a - 1) ** (b + 1) * f


def find_delta_system(sets: Iterable[Iterable[int]], a: int) -> list[frozenset] | None:
    """A Delta-system of a members of the family, or None.

    Greedy maximal pairwise-disjoint subfamily first; if it is too small,
    recurse on the sets containing the most frequent element (ties to the
    smallest element) with that element removed.
    """
    fam = list(dict.fromkeys(frozenset(s) for s in sets))
    sizes = {len(s) for s in fam}
    if len(sizes) > 1:
        raise ContractError(f"sets must share one size, got sizes {sorted(sizes)}")
    if a < 1:
        raise ContractError("a must be positive")
    return _delta(fam, a)


def _delta(fam: list[frozenset], a: int) -> list[frozenset] | None:
    if len(fam) < a:
        return None
    if a == 1:
        return fam[:1]
    disjoint, used = [], set()
    for s in fam:
        if not (s & used):
            disjoint.append(s)
            used |= s
            if len(disjoint) == a:
                return disjoint
    counts = Counter(x for s in fam for x in s)
    if not counts:
        return None
    top = max(counts.values())
    x = min(e for e, c in counts.items() if c == top)
    sub = _delta([s - {x} for s in fam if x in s], a)
    if sub is None:
        return None
    return [s | {x} for s in sub]


def random_set_family(size: int, b: int, universe: int, rng: np.random.Generator) -> list[frozenset]:
    """``size`` distinct uniformly random b-subsets of range(universe)."""
    if comb(universe, b) < size:
        raise ContractError(f"only {comb(universe, b)} distinct {b}-sets exist")
    out: dict[frozenset, None] = {}
    while len(out) < size:
        out[frozenset(int(v) for v in rng.choice(universe, size=b, replace=False))] = None
    return list(out)


# ---------- Cayley walks


def walk_counts(N: int, generators: Sequence[int], steps: int) -> np.ndarray:
    """Number of generator words of the given length landing at each element of Z_N."""
    if N > MAX_CAYLEY_ORDER:
        raise CapacityError(f"N = {N} exceeds {MAX_CAYLEY_ORDER}")
    gens = np.asarray(generators, dtype=np.int64) % N
    mult = np.bincount(gens, minlength=N).astype(np.int64)
    if len(gens) ** max(steps, 1) >= 1 << 62:
        raise CapacityError("word counts overflow 64-bit integers")
    dist = np.zeros(N, dtype=np.int64)
    dist[0] = 1
    support = np.flatnonzero(mult)
    for _ in range(steps):
        if len(support) * N <= 1 << 26:
            new = np.zeros(N, dtype=np.int64)
            for g in support:
                new += mult[g] * np.roll(dist, int(g))
        else:
            spec = np.fft.rfft(dist.astype(np.float64)) * np.fft.rfft(mult.astype(np.float64))
            new = np.rint(np.fft.irfft(spec, n=N)).astype(np.int64)
        dist = new
    return dist


def walk_distribution(N: int, generators: Sequence[int], steps: int) -> np.ndarray:
    counts = walk_counts(N, generators, steps)
    return counts / counts.sum()


def walk_tv(N: int, generators: Sequence[int], steps: int) -> float:
    return tv_distance(walk_distribution(N, generators, steps), np.full(N, 1.0 / N))


@dataclass
class CayleyReport:
    N: int
    d: int
    k: int
    draws: int
    tv_before: float
    tv_at: float
    tv_before_each: list[float]
    tv_at_each: list[float]


def cayley_generator_count(N: int, k: int) -> int:
    """d = round(N^(1/(k-1)))."""
    return max(1, round(N ** (1 / (k - 1))))


def cayley_mixing_experiment(N: int, d: int, k: int, draws: int,
                             rng: np.random.Generator) -> CayleyReport:
    """Mean exact TV to uniform after k-1 and k steps, over random generator multisets."""
    before, at = [], []
    for _ in range(draws):
        gens = rng.integers(0, N, size=d)
        before.append(walk_tv(N, gens, k - 1))
        at.append(walk_tv(N, gens, k))
    return CayleyReport(N, d, k, draws, float(np.mean(before)), float(np.mean(at)), before, at)


# ---------- rank experiments and diagnostics


def dependent_fraction(n: int, q: int, trials: int, rng: np.random.Generator) -> float:
    """Fraction of trials in which q uniform points of Z_2^n are linearly dependent."""
    dep = 0
    for _ in range(trials):
        basis = XorBasis()
        dep += not all(basis.insert(v) for v in points_to_rows(random_points(n, q, rng)))
    return dep / trials


def d_evaluation_independent_fraction(n: int, d: int, q: int, trials: int,
                                      rng: np.random.Generator) -> float:
    """Fraction of trials in which the d-evaluations of q uniform points are independent."""
    basis = MonomialBasis(n, d)
    ok = 0
    for _ in range(trials):
        rows = XorBasis()
        ok += all(rows.insert(v) for v in d_evaluations(random_points(n, q, rng), basis))
    return ok / trials


def d_evaluation_bound(n: int, d: int, q: int) -> float:
    """1 - q 2^(-n/d)."""
    return 1 - q * 2 ** (-n / d)


def repeated_weight_count(xs: np.ndarray) -> int:
    """Number of Hamming weights attained by at least two of the points."""
    w = np.bincount(popcount(np.asarray(xs, dtype=np.uint64)))
    return int(np.count_nonzero(w >= 2))


def repeated_weight_experiment(n: int, q: int, k: int, trials: int,
                               rng: np.random.Generator) -> dict:
    counts = [repeated_weight_count(random_points(n, q, rng)) for _ in range(trials)]
    return {"n": n, "q": q, "k": k, "mean_repeated_weights": float(np.mean(counts)),
            "k_log_n": k * log2(n)}
