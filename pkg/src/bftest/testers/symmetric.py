"""Collision-based testers for symmetric and partially symmetric functions.

All of them look only at pairs of points that share a Hamming weight (on
the coordinates outside the candidate asymmetric set) and agree on the
asymmetric coordinates.
"""

from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from itertools import combinations
from math import ceil, comb, log2, sqrt
from typing import Iterable

import numpy as np

from ..boolfn import gather_bits, index_mask, popcount, random_points
from ..errors import BudgetExceeded, CapacityError, ContractError
from .oracle import Decision, Model, QueryOracle, Verdict


def same_weight_probability(n: int) -> Fraction:
    """Pr[two uniform points of Z_2^n share a Hamming weight] = sum_w C(n,w)^2 / 4^n."""
    return Fraction(sum(comb(n, w) ** 2 for w in range(n + 1)), 4 ** n)


def symmetric_passive_sample_size(n: int, c: float = 8.0) -> int:
    return ceil(c * n ** 0.25)


def psf_passive_sample_size(n: int, k: int, eps: float, c: float = 2.0) -> int:
    """c * n^(1/4) * 2^(k/2) * sqrt(k log n / eps), floored at the k = 0 sample size."""
    size = c * n ** 0.25 * 2 ** (k / 2) * sqrt(k * log2(n) / eps)
    return max(ceil(size), symmetric_passive_sample_size(n, c))


def psf_active_pair_budget(n: int, k: int, c: float = 2.0) -> int:
    return max(10, ceil(c * 2 ** k * k * log2(n)))


def tolerant_violation_rate(delta: float) -> float:
    """Calibrated same-weight pair violation rate at distance delta.

    Assumes the far mass is spread evenly over the layers, so a random
    same-weight pair disagrees with probability 2 delta (1 - delta).
    """
    return 2 * delta * (1 - delta)


def _same_weight_pairs(xs: np.ndarray, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Disjoint same-weight index pairs, each bucket shuffled first."""
    buckets: dict[int, list[int]] = defaultdict(list)
    for i, w in enumerate(popcount(xs)):
        buckets[int(w)].append(i)
    pairs = []
    for w in sorted(buckets):
        idx = rng.permutation(buckets[w])
        pairs.extend((int(idx[j]), int(idx[j + 1])) for j in range(0, len(idx) - 1, 2))
    return pairs


def _pick_pairs(pairs, budget, rng):
    if len(pairs) <= budget:
        return pairs
    chosen = rng.choice(len(pairs), size=budget, replace=False)
    return [pairs[i] for i in sorted(chosen)]


def _random_permutation_pair(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    xs = random_points(n, m, rng)
    ys = np.empty_like(xs)
    for i, x in enumerate(xs):
        bits = (int(x) >> np.arange(n)) & 1
        perm = rng.permutation(bits)
        ys[i] = np.uint64(int(np.sum(perm.astype(object) << np.arange(n).astype(object))))
    return np.stack([xs, ys], axis=1)


def symmetric_tester(oracle: QueryOracle, pair_budget: int = 10,
                     rng: np.random.Generator | None = None) -> Verdict:
    """Reject iff two points of equal Hamming weight receive different values.

    Passive: every same-weight pair in the revealed sample is used; a sample
    without such pairs is accepted and flagged ``vacuous``.  Active: up to
    ``pair_budget`` disjoint same-weight pairs are picked from the pool.
    Classic: each pair is a random point and a random permutation of it.
    """
    rng = rng if rng is not None else np.random.default_rng()
    if oracle.model is Model.PASSIVE:
        xs, ys = oracle.reveal()
        ones, total = _bucket_counts(popcount(xs), ys)
        pairs = int(sum(comb(int(t), 2) for t in total))
        bad = int(np.count_nonzero((ones > 0) & (ones < total)))
        diag = {"pairs": pairs, "vacuous": pairs == 0}
        return Verdict(Decision.REJECT if bad else Decision.ACCEPT, oracle.spent, diagnostics=diag)
    if oracle.model is Model.ACTIVE:
        pairs = _pick_pairs(_same_weight_pairs(oracle.pool, rng), pair_budget, rng)
        if not pairs:
            return Verdict(Decision.INCONCLUSIVE, 0,
                           diagnostics={"error": "no same-weight pair in pool"})
        answers = _query_pairs(oracle, pairs)
        if answers is None:
            return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics={"error": "budget"})
    else:
        pts = _random_permutation_pair(oracle.n, pair_budget, rng)
        try:
            answers = oracle.query(pts.ravel()).reshape(-1, 2)
        except BudgetExceeded:
            return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics={"error": "budget"})
        pairs = list(range(len(pts)))
    bad = int(np.count_nonzero(answers[:, 0] != answers[:, 1]))
    decision = Decision.REJECT if bad else Decision.ACCEPT
    return Verdict(decision, oracle.spent, diagnostics={"pairs": len(pairs), "violations": bad})


def _query_pairs(oracle, pairs):
    flat = [i for pair in pairs for i in pair]
    try:
        return oracle.query_pool(flat).reshape(-1, 2)
    except BudgetExceeded:
        return None


def _bucket_counts(cells: np.ndarray, ys: np.ndarray, ncells: int | None = None):
    cells = np.asarray(cells, dtype=np.int64)
    ncells = int(cells.max()) + 1 if ncells is None and cells.size else (ncells or 0)
    ones = np.bincount(cells, weights=ys.astype(np.int64), minlength=ncells).astype(np.int64)
    total = np.bincount(cells, minlength=ncells)
    return ones, total


def tolerant_symmetric_tester(oracle: QueryOracle, pair_budget: int, eps_lo: float,
                              eps_hi: float, rng: np.random.Generator | None = None,
                              min_pairs_const: float = 1.0) -> Verdict:
    """Estimate the same-weight violation rate and compare it with a calibrated midpoint."""
    if not eps_lo < eps_hi:
        raise ContractError(f"need eps_lo < eps_hi, got {eps_lo} and {eps_hi}")
    rng = rng if rng is not None else np.random.default_rng()
    required = ceil(min_pairs_const / (eps_hi - eps_lo) ** 2)
    if oracle.model is Model.PASSIVE:
        xs, ys = oracle.reveal()
        ones, total = _bucket_counts(popcount(xs), ys)
        pairs = int(sum(comb(int(t), 2) for t in total))
        violations = int(np.sum(ones * (total - ones)))
    elif oracle.model is Model.ACTIVE:
        chosen = _pick_pairs(_same_weight_pairs(oracle.pool, rng), pair_budget, rng)
        answers = _query_pairs(oracle, chosen) if chosen else np.zeros((0, 2))
        if answers is None:
            return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics={"error": "budget"})
        pairs = len(chosen)
        violations = int(np.count_nonzero(answers[:, 0] != answers[:, 1]))
    else:
        raise ContractError("tolerant tester runs in the active or passive model")
    threshold = (tolerant_violation_rate(eps_lo) + tolerant_violation_rate(eps_hi)) / 2
    diag = {"pairs": pairs, "required_pairs": required, "threshold": threshold}
    if pairs < required:
        diag["error"] = "insufficient pairs"
        return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics=diag)
    rate = violations / pairs
    diag["violation_rate"] = rate
    decision = Decision.ACCEPT if rate <= threshold else Decision.REJECT
    return Verdict(decision, oracle.spent, diagnostics=diag)


def psf_consistency_check(transcript: Iterable[tuple[int, int]], asymmetric) -> bool:
    """True iff labelled points agreeing on ``asymmetric`` and on the rest's weight agree."""
    mask = index_mask(asymmetric)
    seen: dict[tuple[int, int], int] = {}
    for point, value in transcript:
        point = int(point)
        key = (point & mask, (point & ~mask).bit_count())
        if seen.setdefault(key, int(value)) != int(value):
            return False
    return True


def consistent_asymmetric_sets(xs: np.ndarray, ys: np.ndarray, n: int, k: int,
                               first_only: bool = False) -> list[tuple[int, ...]]:
    """All k-sets A for which the labelled sample is consistent with (n-k)-symmetry on A."""
    xs = np.asarray(xs, dtype=np.uint64)
    ys = np.asarray(ys)
    full = (1 << n) - 1
    out = []
    for subset in combinations(range(n), k):
        rest = np.uint64(full & ~index_mask(subset))
        cells = gather_bits(xs, subset) * (n + 1) + popcount(xs & rest)
        ones, total = _bucket_counts(cells, ys, (1 << k) * (n + 1))
        if not np.any((ones > 0) & (ones < total)):
            out.append(subset)
            if first_only:
                break
    return out


def psf_tester(oracle: QueryOracle, k: int, rng: np.random.Generator | None = None,
               pair_budget: int | None = None, max_k: int = 3) -> Verdict:
    """Accept iff the observed labels are consistent with (n-k)-symmetry for some k-set A.

    Passive: the whole revealed sample is checked.  Active: ``pair_budget``
    disjoint same-weight pairs from the pool are queried and checked.
    """
    if k > max_k:
        raise CapacityError(f"iterating all {k}-sets is capped at k <= {max_k}")
    rng = rng if rng is not None else np.random.default_rng()
    n = oracle.n
    if oracle.model is Model.PASSIVE:
        xs, ys = oracle.reveal()
    elif oracle.model is Model.ACTIVE:
        budget = psf_active_pair_budget(n, k) if pair_budget is None else pair_budget
        pairs = _pick_pairs(_same_weight_pairs(oracle.pool, rng), budget, rng)
        if not pairs:
            return Verdict(Decision.INCONCLUSIVE, 0,
                           diagnostics={"error": "no same-weight pair in pool"})
        answers = _query_pairs(oracle, pairs)
        if answers is None:
            return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics={"error": "budget"})
        xs = oracle.pool[np.array(pairs).ravel()]
        ys = answers.ravel()
    else:
        raise ContractError("psf_tester runs in the active or passive model")
    found = consistent_asymmetric_sets(xs, ys, n, k, first_only=True)
    diag = {"k": k, "queried": int(len(xs))}
    if found:
        diag["witness"] = list(found[0])
        return Verdict(Decision.ACCEPT, oracle.spent, diagnostics=diag)
    return Verdict(Decision.REJECT, oracle.spent, diagnostics=diag)

