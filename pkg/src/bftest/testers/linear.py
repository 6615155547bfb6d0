"""Linearity and low-degree testers under the three query models."""

from __future__ import annotations

from fractions import Fraction
from math import ceil, log2

import numpy as np

from ..boolfn import (
    BooleanFunction,
    Gf2Polynomial,
    KLinear,
    fwht,
    mask_indices,
    random_points,
    signed_table,
    truth_table,
)
from ..errors import BudgetExceeded, CapacityError, ModelViolation
from ..gf2 import MonomialBasis, d_evaluations, find_subset_summing_to, points_to_rows, solve_rows
from .oracle import Decision, Model, QueryOracle, Verdict

MAX_SOLVER_MONOMIALS = 1 << 14


# ---------- exact acceptance probabilities of the 2k-wise test


def blr_acceptance_probability(f: BooleanFunction, k: int) -> Fraction:
    """Pr[f(x_1)+...+f(x_2k) = f(x_1+...+x_2k)] by repeated XOR convolution.

    Works directly on the +-1 table: the 2k-fold self-convolution counts
    signed tuples by their sum, so no Fourier coefficients are involved.
    """
    n = f.n
    size = 1 << n
    signs = signed_table(truth_table(f))
    idx = np.arange(size)
    shift = signs[idx[:, None] ^ idx[None, :]]
    conv = signs.copy()
    for _ in range(2 * k - 1):
        conv = conv @ shift
    total = int(np.dot(conv, signs))
    tuples = 1 << (2 * k * n)
    return Fraction(tuples + total, 2 * tuples)


def blr_fourier_formula(f: BooleanFunction, k: int) -> Fraction:
    """1/2 + 1/2 * sum_S fhat(S)^(2k+1), evaluated exactly."""
    n = f.n
    coeffs = fwht(signed_table(truth_table(f)))
    power = 2 * k + 1
    s = sum(int(c) ** power for c in coeffs)
    return Fraction(1, 2) + Fraction(s, 2 * (1 << (n * power)))


def blr_soundness_bound(eps: float, k: int) -> float:
    """Upper bound on the per-round pass probability for an eps-far function."""
    return 0.5 + 0.5 * (1 - 2 * eps) ** (2 * k - 1)


# ---------- testers


def blr_k_test(oracle: QueryOracle, k: int = 1, repetitions: int = 10,
               rng: np.random.Generator | None = None) -> Verdict:
    """Amplified BLR: each round checks f(x_1)+...+f(x_2k) = f(x_1+...+x_2k)."""
    if oracle.model is not Model.CLASSIC:
        raise ModelViolation("blr_k_test chooses its own points (classic model)")
    rng = rng if rng is not None else np.random.default_rng()
    cost = (2 * k + 1) * repetitions
    if cost > oracle.remaining:
        return Verdict(Decision.INCONCLUSIVE, 0,
                       diagnostics={"error": "budget", "needed": cost, "budget": oracle.budget})
    xs = random_points(oracle.n, 2 * k * repetitions, rng).reshape(repetitions, 2 * k)
    sums = np.bitwise_xor.reduce(xs, axis=1)
    answers = oracle.query(np.concatenate([xs.ravel(), sums]))
    lhs = np.bitwise_xor.reduce(answers[: 2 * k * repetitions].reshape(repetitions, 2 * k), axis=1)
    violations = int(np.count_nonzero(lhs != answers[2 * k * repetitions:]))
    decision = Decision.REJECT if violations else Decision.ACCEPT
    return Verdict(decision, oracle.spent, diagnostics={"violations": violations, "k": k})


def active_query_count(n: int, u: int) -> int:
    """Dependency size ceil(3n / log2 u) used by the active linearity tester."""
    return ceil(3 * n / log2(u))


def active_linear_tester(oracle: QueryOracle, repetitions: int = 10,
                         rng: np.random.Generator | None = None, q: int | None = None,
                         tries: int = 16) -> Verdict:
    """Per round: pick a pool point x, find pool points XOR-summing to x, check parities.

    Dependencies come from :func:`find_subset_summing_to` with a size hint of
    ``q``; achieved sizes are reported in the diagnostics.
    """
    if oracle.model is not Model.ACTIVE:
        raise ModelViolation("active_linear_tester needs an active oracle")
    rng = rng if rng is not None else np.random.default_rng()
    pool = oracle.pool
    n, u = oracle.n, len(pool)
    q = active_query_count(n, u) if q is None else q
    vecs = points_to_rows(pool)
    sizes = []
    diag = {"q": q, "u": u, "below_regime": u < n * n}
    for _ in range(repetitions):
        i = int(rng.integers(u))
        others = [j for j in range(u) if vecs[j] != vecs[i]]
        subset = find_subset_summing_to([vecs[j] for j in others], vecs[i],
                                        size_hint=q, rng=rng, tries=tries)
        if subset is None:
            diag.update(error="no dependency in pool", subset_sizes=sizes)
            return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics=diag)
        members = [others[j] for j in subset]
        sizes.append(len(members))
        try:
            answers = oracle.query_pool([i] + members)
        except BudgetExceeded:
            diag.update(error="budget", subset_sizes=sizes)
            return Verdict(Decision.INCONCLUSIVE, oracle.spent, diagnostics=diag)
        if int(np.bitwise_xor.reduce(answers)) != 0:
            diag.update(subset_sizes=sizes)
            return Verdict(Decision.REJECT, oracle.spent, diagnostics=diag)
    diag.update(subset_sizes=sizes)
    return Verdict(Decision.ACCEPT, oracle.spent, diagnostics=diag)


def passive_linear_tester(oracle: QueryOracle, sample_size: int | None = None) -> Verdict:
    """Learn the linear function consistent with the sample, reject on any inconsistency.

    When the sample spans Z_2^n the consistent function is unique and every
    surplus point is checked against it; otherwise the sample is accepted iff
    some linear function is consistent with all of it.
    """
    if oracle.model is not Model.PASSIVE:
        raise ModelViolation("passive_linear_tester needs a passive oracle")
    xs, ys = oracle.reveal(sample_size)
    mask, r = solve_rows(points_to_rows(xs), ys, oracle.n)
    diag = {"rank": r, "spanning": r == oracle.n}
    if mask is None:
        return Verdict(Decision.REJECT, oracle.spent, diagnostics=diag)
    if r == oracle.n:
        diag["hypothesis"] = KLinear(oracle.n, mask_indices(mask)).describe()
    return Verdict(Decision.ACCEPT, oracle.spent, diagnostics=diag)


def passive_polynomial_tester(oracle: QueryOracle, d: int, sample_size: int | None = None,
                              holdout: int = 10) -> Verdict:
    """Learn a degree-<=d polynomial from d-evaluations, then check a holdout block."""
    if oracle.model is not Model.PASSIVE:
        raise ModelViolation("passive_polynomial_tester needs a passive oracle")
    basis = MonomialBasis(oracle.n, d)
    if basis.size > MAX_SOLVER_MONOMIALS:
        raise CapacityError(f"n_d = {basis.size} exceeds the solver cap {MAX_SOLVER_MONOMIALS}")
    xs, ys = oracle.reveal(sample_size)
    rows = d_evaluations(xs, basis)
    cut = max(0, len(rows) - holdout)
    coeffs, r = solve_rows(rows[:cut], ys[:cut], basis.size)
    diag = {"n_d": basis.size, "train_rank": r}
    if coeffs is None:
        return Verdict(Decision.REJECT, oracle.spent, diagnostics=diag)
    if r == basis.size:
        predicted = [(row & coeffs).bit_count() & 1 for row in rows[cut:]]
        bad = int(np.count_nonzero(np.asarray(predicted) != ys[cut:]))
        diag["holdout_disagreements"] = bad
        if bad:
            return Verdict(Decision.REJECT, oracle.spent, diagnostics=diag)
    else:
        coeffs, _ = solve_rows(rows, ys, basis.size)
        diag["underdetermined"] = True
        if coeffs is None:
            return Verdict(Decision.REJECT, oracle.spent, diagnostics=diag)
    poly = Gf2Polynomial(oracle.n, frozenset(m for j, m in enumerate(basis.monomials)
                                             if (coeffs >> j) & 1))
    diag["hypothesis_terms"] = len(poly.monomials)
    return Verdict(Decision.ACCEPT, oracle.spent, diagnostics=diag)


def linear_hypothesis(xs: np.ndarray, ys: np.ndarray, n: int) -> KLinear | None:
    """The unique linear function consistent with a spanning sample, else None."""
    mask, r = solve_rows(points_to_rows(xs), ys, n)
    if mask is None or r < n:
        return None
    return KLinear(n, mask_indices(mask))
