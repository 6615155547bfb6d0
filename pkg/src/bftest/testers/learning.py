"""Proper learners and the testers built on learning."""

from __future__ import annotations

from itertools import combinations
from math import ceil, log, log2
from typing import Callable

import numpy as np

from ..boolfn import Junta, gather_bits
from ..errors import BudgetExceeded, CapacityError, ContractError, ModelViolation
from ..families import EpsilonNet, Family, members
from .oracle import Decision, LearnerOutput, Model, QueryOracle, Verdict

MAX_JUNTA_N = 10
MAX_JUNTA_K = 3


def as_sample(samples) -> tuple[np.ndarray, np.ndarray]:
    """Normalize a list of (point, value) pairs or an (xs, ys) pair of arrays."""
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray):
        xs, ys = samples
    else:
        pairs = list(samples)
        xs = np.array([int(p) for p, _ in pairs], dtype=np.uint64)
        ys = np.array([int(v) for _, v in pairs], dtype=np.uint8)
    return np.asarray(xs, dtype=np.uint64), np.asarray(ys, dtype=np.uint8)


def learn_consistent(F: Family, samples) -> LearnerOutput:
    """The first member of F (enumeration order) with the fewest disagreements."""
    xs, ys = as_sample(samples)
    best, best_err = None, None
    for g in members(F):
        err = int(np.count_nonzero(g.evaluate_many(xs) != ys)) if len(xs) else 0
        if best_err is None or err < best_err:
            best, best_err = g, err
            if err == 0:
                break
    if best is None:
        raise ContractError(f"{F.describe()} has no members")
    return LearnerOutput(best, len(xs), proper=True, disagreements=best_err)


def net_disagreements(net: EpsilonNet, samples) -> np.ndarray:
    xs, ys = as_sample(samples)
    if len(xs) == 0:
        return np.zeros(len(net), dtype=np.int64)
    return np.count_nonzero(net.tables[:, xs.astype(np.int64)] != ys[None, :], axis=1)


def learn_via_net(net: EpsilonNet, samples) -> LearnerOutput:
    """The net member agreeing with the most samples (ties: first)."""
    if len(net) == 0:
        raise ContractError("empty net")
    xs, ys = as_sample(samples)
    errs = net_disagreements(net, (xs, ys))
    j = int(np.argmin(errs))
    return LearnerOutput(net.members[j], len(xs), proper=True, disagreements=int(errs[j]))


def net_sample_size(net_size: int, eps: float) -> int:
    """ceil((64/eps) ln |net|), at least 1."""
    return max(1, ceil(64 / eps * log(max(net_size, 1))))


def verify_block_size(eps: float, const: float = 32.0) -> int:
    return ceil(const / eps)


def learn_then_verify(F: Family, oracle: QueryOracle,
                      learner: Callable[[Family, object], LearnerOutput] | None,
                      eps: float, learn_size: int, verify_const: float = 32.0) -> Verdict:
    """Learn on a prefix of the passive sample, verify on the next ceil(verify_const/eps) points.

    Rejects iff the hypothesis disagrees on more than a 3 eps / 4 fraction
    of the verification block.
    """
    if oracle.model is not Model.PASSIVE:
        raise ModelViolation("learn_then_verify reads a passive sample")
    learner = learner or learn_consistent
    m = verify_block_size(eps, verify_const)
    try:
        train = oracle.reveal(learn_size)
        held = oracle.reveal(m)
    except BudgetExceeded as exc:
        return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics={"error": str(exc)})
    out = learner(F, train)
    bad = int(np.count_nonzero(out.hypothesis.evaluate_many(held[0]) != held[1]))
    rate = bad / m
    diag = {"hypothesis": out.hypothesis.describe(), "train_disagreements": out.disagreements,
            "verify_size": m, "verify_rate": rate}
    decision = Decision.REJECT if rate > 3 * eps / 4 else Decision.ACCEPT
    return Verdict(decision, oracle.spent, diagnostics=diag)


def junta_sample_size(n: int, k: int, c: float = 8.0) -> int:
    return ceil(c * (2 ** k + k * log2(n)))


def best_junta_fit(xs: np.ndarray, ys: np.ndarray, n: int, k: int) -> tuple[Junta, int]:
    """Minimum-disagreement k-junta on the sample (cell majority, ties to 0, first J wins)."""
    ys = ys.astype(np.int64)
    best = None
    for subset in combinations(range(n), k):
        cells = gather_bits(xs, subset).astype(np.int64)
        ones = np.bincount(cells, weights=ys, minlength=1 << k).astype(np.int64)
        total = np.bincount(cells, minlength=1 << k)
        err = int(np.minimum(ones, total - ones).sum())
        if best is None or err < best[1]:
            best = (Junta(n, subset, (2 * ones > total).astype(np.uint8)), err)
            if err == 0:
                break
    return best


def junta_passive_tester(oracle: QueryOracle, k: int, eps: float,
                         sample_size: int | None = None, c: float = 8.0) -> Verdict:
    """Fit the best k-junta on the first half of the sample, check the second half.

    Rejects iff the holdout disagreement rate exceeds eps / 2.
    """
    if oracle.model is not Model.PASSIVE:
        raise ModelViolation("junta_passive_tester needs a passive oracle")
    n = oracle.n
    if k > MAX_JUNTA_K or n > MAX_JUNTA_N:
        raise CapacityError(f"junta search is capped at k <= {MAX_JUNTA_K}, n <= {MAX_JUNTA_N}")
    q = junta_sample_size(n, k, c) if sample_size is None else sample_size
    try:
        xs, ys = oracle.reveal(q)
    except BudgetExceeded as exc:
        return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics={"error": str(exc)})
    cut = q // 2
    h, train_err = best_junta_fit(xs[:cut], ys[:cut], n, k)
    bad = int(np.count_nonzero(h.evaluate_many(xs[cut:]) != ys[cut:]))
    rate = bad / max(1, q - cut)
    diag = {"hypothesis": h.describe(), "train_disagreements": train_err,
            "holdout_rate": rate, "sample_size": q}
    decision = Decision.REJECT if rate > eps / 2 else Decision.ACCEPT
    return Verdict(decision, oracle.spent, diagnostics=diag)


def agreeing_pair_free_probability(q: int, k: int) -> float:
    """Pr[no two of q uniform points agree on a fixed k-set], prod_i (1 - i/2^k)."""
    p = 1.0
    for i in range(q):
        p *= max(0.0, 1 - i / 2 ** k)
    return p
