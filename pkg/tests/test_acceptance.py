"""Acceptance gate: one printed PASS/FAIL line per criterion.

Each criterion is a pure function of the master seed returning a verdict, a
one-line summary and the text of its output file; the determinism criterion
re-runs all of them and compares the files byte for byte.
"""

import os
from dataclasses import dataclass
from fractions import Fraction
from math import comb, log2

import numpy as np
import pytest

from bftest.boolfn import KLinear, TruthTable, popcount, random_points
from bftest.families import Family, sample_uniform
from bftest.harness import ExperimentConfig, results_csv, run_trials
from bftest.lowerbounds import (
    AbelianGroup,
    cayley_generator_count,
    cayley_mixing_experiment,
    d_evaluation_bound,
    d_evaluation_independent_fraction,
    dependent_fraction,
    erdos_rado_threshold,
    find_delta_system,
    is_delta_system,
    lemma21_criterion,
    pi_S,
    random_set_family,
    sumset_concentration_experiment,
    wilson_interval,
)
from bftest.testers import (
    QueryOracle,
    blr_acceptance_probability,
    blr_fourier_formula,
    passive_linear_tester,
    same_weight_probability,
)

from oracles import binomial_two_sided_tail, brute_linear_distance

MASTER_SEED = int(os.environ.get("BFTEST_SEED", "20240611"))
TRIALS = 1000


@dataclass
class Outcome:
    passed: bool
    summary: str
    text: str


def crit_rng(seed, c):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(c,))))


def lines(rows):
    return "".join(",".join(str(v) for v in row) + "\n" for row in rows)


# ---------- criteria


def c01_blr_formula(seed):
    rng = crit_rng(seed, 1)
    n, worst_gap, ok, rows = 8, 0.0, True, []
    for i in range(200):
        f = TruthTable(n, rng.integers(0, 2, size=1 << n))
        eps = brute_linear_distance(f.table, n)
        for k in (1, 2):
            p = blr_acceptance_probability(f, k)
            gap = abs(float(p) - float(blr_fourier_formula(f, k)))
            bound = Fraction(1, 2) + Fraction(1, 2) * (1 - 2 * eps) ** (2 * k - 1)
            worst_gap = max(worst_gap, gap)
            ok &= gap <= 1e-9 and p <= bound
            rows.append((i, k, p, eps, bound))
    return Outcome(ok, f"max |exact - fourier| = {worst_gap:.2e}, all <= bound: {ok}", lines(rows))


COMPLETENESS = [
    ("blr", dict(n=20)),
    ("active_linear", dict(n=20)),
    ("passive_linear", dict(n=20)),
    ("symmetric", dict(n=64, model="passive")),
    ("psf", dict(n=32, k=1, model="passive")),
]


def c02_completeness(seed):
    ok, parts, text = True, [], ""
    for i, (tester, kw) in enumerate(COMPLETENESS):
        rs, s = run_trials(ExperimentConfig(tester, target="member", trials=TRIALS,
                                            seed=seed + i, **kw))
        ok &= s.accepts == TRIALS
        parts.append(f"{tester} {s.accepts}/{TRIALS}")
        text += results_csv(rs)
    return Outcome(ok, ", ".join(parts), text)


SOUNDNESS = [
    ("blr", dict(n=20)),
    ("active_linear", dict(n=20)),
    ("passive_linear", dict(n=20)),
    ("passive_poly", dict(n=8, d=2)),
    ("symmetric", dict(n=64, model="passive")),
    ("tolerant_symmetric", dict(n=16, model="passive", q=200, eps_lo=0.05, eps_hi=0.2)),
    ("psf", dict(n=32, k=1, model="passive")),
    ("junta", dict(n=8, k=2)),
    ("learn_verify", dict(n=8, k=2)),
]


def c03_soundness(seed):
    ok, parts, text = True, [], ""
    for i, (tester, kw) in enumerate(SOUNDNESS):
        rs, s = run_trials(ExperimentConfig(tester, target="far", eps=0.2, trials=TRIALS,
                                            seed=seed + i, **kw))
        lo, _ = wilson_interval(s.rejects, s.trials)
        ok &= s.rejects / s.trials >= 2 / 3 and lo >= 0.60
        parts.append(f"{tester} {s.rejects / s.trials:.3f} (lo {lo:.3f})")
        text += results_csv(rs)
    return Outcome(ok, ", ".join(parts), text)


def c04_passive_threshold(seed):
    rng = crit_rng(seed, 4)
    n, trials = 20, 10_000
    dep = dependent_fraction(n, n - 2, trials, rng)
    sigma = (0.25 * 0.75 / trials) ** 0.5
    hits = 0
    for _ in range(trials):
        f = sample_uniform(Family.linear(n), rng)
        v = passive_linear_tester(QueryOracle.passive(f, n + 10, rng))
        hits += v.diagnostics.get("hypothesis") == KLinear(n, f.indices).describe()
    ok = dep <= 0.25 + 3 * sigma and hits >= 0.99 * trials
    return Outcome(ok, f"dependent {dep:.4f} (limit {0.25 + 3 * sigma:.4f}), recovered {hits / trials:.4f}",
                   lines([(dep, hits)]))


def c05_d_evaluation_rank(seed):
    rng = crit_rng(seed, 5)
    n, d, q, trials = 14, 2, 19, 10_000
    frac = d_evaluation_independent_fraction(n, d, q, trials, rng)
    bound = d_evaluation_bound(n, d, q)
    limit = bound - 3 * (bound * (1 - bound) / trials) ** 0.5
    return Outcome(frac >= limit, f"independent {frac:.4f} (limit {limit:.4f})", lines([(frac,)]))


def c06_pi_S(seed):
    rng = crit_rng(seed, 6)
    n, k, q = 50, 2, 8
    vals = np.array([float(pi_S(rng.integers(0, 1 << n, size=q, dtype=np.uint64),
                                int(rng.integers(0, 1 << q)), k, n)) for _ in range(10_000)])
    se = vals.std() / len(vals) ** 0.5
    mean_ok = abs(vals.mean() - 2.0 ** -q) <= 3 * se
    pool = random_points(n, 4 * n, rng)
    transition = (1 - 1 / k) * log2(comb(n, k))
    sweep_q = (2, 3, 4, 6, 8, 10)
    rates = [lemma21_criterion(pool, qq, k, 400, rng, n).pair_rate for qq in sweep_q]
    below = [r for qq, r in zip(sweep_q, rates) if qq < transition]
    above = [r for qq, r in zip(sweep_q, rates) if qq > transition]
    far_above = [r for qq, r in zip(sweep_q, rates) if qq >= transition + 2]
    # past the transition the rate saturates and eventually falls (pi_S has at
    # most C(n,k) nonzero values among 2^q), so the requirement is separation
    shape_ok = max(below) < 0.05 and min(far_above) > 0.25 and max(below) < min(above)
    summary = (f"mean {vals.mean():.3e} vs {2.0 ** -q:.3e} (3se {3 * se:.1e}); "
               f"violation rates {', '.join(f'q={qq}:{r:.3f}' for qq, r in zip(sweep_q, rates))}; "
               f"transition at q={transition:.2f}")
    return Outcome(mean_ok and shape_ok, summary, lines([(vals.mean(), se)] + [tuple(rates)]))


def c07_sumset(seed):
    rng = crit_rng(seed, 7)
    r = sumset_concentration_experiment(AbelianGroup.z2q(4), 24, 2, 0, 10_000, rng)
    mean_ok = abs(r.mean - float(r.expected)) <= 0.01 * float(r.expected)
    b = sumset_concentration_experiment(AbelianGroup.z2q(1), 100, 1, 0, 10_000, rng)
    exact = float(binomial_two_sided_tail(100))
    tail_ok = abs(b.tail_rate - exact) <= 3 * (exact * (1 - exact) / b.trials) ** 0.5
    summary = (f"mean Y {r.mean:.3f} vs {float(r.expected):.3f} [{r.regime}]; "
               f"binomial tail {b.tail_rate:.4f} vs {exact:.4f}")
    return Outcome(mean_ok and tail_ok, summary, lines([(r.mean, r.tail_count, b.tail_count)]))


def c08_delta_systems(seed):
    rng = crit_rng(seed, 8)
    ok, rows = True, []
    for a in (2, 3, 4):
        for b in (1, 2, 3):
            if (a, b) == (2, 1):
                continue
            size = erdos_rado_threshold(a, b)
            universe = next(m for m in range(b, 10 * size) if comb(m, b) >= 2 * size)
            found = 0
            for _ in range(TRIALS):
                out = find_delta_system(random_set_family(size, b, universe, rng), a)
                found += out is not None and len(out) == a and is_delta_system(out)
            ok &= found == TRIALS
            rows.append((a, b, size, found))
    summary = ", ".join(f"(a={a},b={b},|F|={s}) {f}/{TRIALS}" for a, b, s, f in rows)
    return Outcome(ok, summary + "; (2,1) excluded: threshold 1 admits no pair", lines(rows))


def c09_birthday(seed):
    rng = crit_rng(seed, 9)
    n, pairs = 64, 100_000
    x, y = random_points(n, pairs, rng), random_points(n, pairs, rng)
    emp = float(np.mean(popcount(x) == popcount(y)))
    exact = float(same_weight_probability(n))
    return Outcome(exact / 2 <= emp <= 2 * exact, f"empirical {emp:.4f} vs exact {exact:.4f}",
                   lines([(emp,)]))


MODEL_SWEEPS = [
    ("classic", "blr", "repetitions", (1, 2, 3, 4), {}),
    ("active", "active_linear", "repetitions", (1, 2, 3, 4), {"u": 256}),
    ("passive", "passive_linear", "q", (16, 17, 18, 19, 20, 22, 24), {}),
]


def c10_model_monotonicity(seed):
    """Minimal worst-case query count reaching success >= 2/3 in each model.

    Success at a grid point is min(member acceptance, far rejection); its
    cost is the largest number of queries any trial used.
    """
    n, trials = 16, 300
    minimal, rows = {}, []
    for model, tester, key, values, extra in MODEL_SWEEPS:
        best = None
        for v in values:
            outcomes = {}
            for target in ("member", "far"):
                cfg = ExperimentConfig(tester, n=n, target=target, trials=trials, seed=seed,
                                       **{key: v}, **extra)
                outcomes[target] = run_trials(cfg)
            success = min(outcomes["member"][1].accepts, outcomes["far"][1].rejects) / trials
            cost = max(r.queries_used for rs, _ in outcomes.values() for r in rs)
            rows.append((model, key, v, success, cost))
            if success >= 2 / 3:
                best = cost if best is None else min(best, cost)
        minimal[model] = best
    ok = None not in minimal.values() and minimal["classic"] <= minimal["active"] <= minimal["passive"]
    summary = ", ".join(f"{m} {q}" for m, q in minimal.items())
    return Outcome(ok, f"minimal queries {summary}", lines(rows))


def c11_cayley(seed):
    rng = crit_rng(seed, 11)
    N, k = 10_000, 3
    d = cayley_generator_count(N, k)
    r = cayley_mixing_experiment(N, d, k, 20, rng)
    ok = r.tv_before >= 0.9 and r.tv_at <= 0.2
    return Outcome(ok, f"N={N} d={d}: TV({k - 1})={r.tv_before:.3f} (need >= 0.9), "
                       f"TV({k})={r.tv_at:.3f} (need <= 0.2)",
                   lines(zip(r.tv_before_each, r.tv_at_each)))


CRITERIA = {
    1: ("BLR-k formula equivalence", c01_blr_formula),
    2: ("completeness is exact", c02_completeness),
    3: ("soundness at 2/3", c03_soundness),
    4: ("passive linear threshold", c04_passive_threshold),
    5: ("d-evaluation rank", c05_d_evaluation_rank),
    6: ("pi_S mean and concentration", c06_pi_S),
    7: ("sumset statistics", c07_sumset),
    8: ("Delta-systems at threshold", c08_delta_systems),
    9: ("birthday collision rate", c09_birthday),
    10: ("model monotonicity", c10_model_monotonicity),
    11: ("Cayley cutoff", c11_cayley),
}

OUTPUTS: dict[int, bytes] = {}


def report(number, name, passed, summary):
    print(f"\ncriterion {number:2d} {name}: {'PASS' if passed else 'FAIL'} | {summary}")


@pytest.fixture(scope="module")
def out_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("acceptance")


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, out_dir, capsys):
    name, fn = CRITERIA[number]
    outcome = fn(MASTER_SEED)
    data = outcome.text.encode()
    (out_dir / f"criterion_{number:02d}.csv").write_bytes(data)
    OUTPUTS[number] = data
    with capsys.disabled():
        report(number, name, outcome.passed, outcome.summary)
    assert outcome.passed, outcome.summary


def test_criterion_12_determinism(out_dir, capsys):
    mismatched = []
    for number, (_, fn) in sorted(CRITERIA.items()):
        path = out_dir / f"criterion_{number:02d}.csv"
        first = path.read_bytes() if path.exists() else fn(MASTER_SEED).text.encode()
        if fn(MASTER_SEED).text.encode() != first:
            mismatched.append(number)
    passed = not mismatched
    summary = (f"{len(CRITERIA)} output files byte-identical on re-run" if passed
               else f"differing outputs for criteria {mismatched}")
    with capsys.disabled():
        report(12, "determinism", passed, summary)
    assert passed, summary
