"""Command-line entry point: ``bftest run | sweep | lb <exp> | oracle <check>``."""

from __future__ import annotations

import argparse
import itertools
import sys
from dataclasses import fields
from math import comb, log2

import numpy as np

from . import harness, lowerbounds
from .boolfn import SeededRandom, popcount, random_points, truth_table, walsh_hadamard
from .errors import ContractError
from .families import Family, exact_distance_to_family
from .harness import ExperimentConfig, default_seed, read_config_file
from .testers.linear import blr_acceptance_probability, blr_fourier_formula

CONFIG_FLAGS = [f for f in fields(ExperimentConfig) if f.name not in ("tester",)]


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tester", required=False)
    p.add_argument("--config", help="key = value file; command-line flags override it")
    p.add_argument("--workers", type=int, default=1)
    cast = {"int": int, "float": float, "str": str}
    for f in CONFIG_FLAGS:
        p.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name, type=cast[f.type],
                       default=None)


def _config_from_args(args) -> ExperimentConfig:
    values = read_config_file(args.config) if args.config else {}
    for f in CONFIG_FLAGS:
        v = getattr(args, f.name)
        if v is not None:
            values[f.name] = v
    if args.tester:
        values["tester"] = args.tester
    values.setdefault("seed", default_seed())
    if "tester" not in values or "n" not in values:
        raise ContractError("both --tester and --n are required (flag or config file)")
    return ExperimentConfig.from_mapping(values)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    results, summary = harness.run_trials(cfg, args.workers)
    csv_text = harness.results_csv(results)
    json_text = harness.summary_json(cfg, summary)
    _emit(csv_text, cfg.csv)
    _emit(json_text, cfg.json, fallback=sys.stderr if not cfg.csv else sys.stdout)
    return 0


def _emit(text: str, path: str, fallback=None) -> None:
    if path:
        harness._write(path, text)
    else:
        (fallback or sys.stdout).write(text)


def _parse_grid(items) -> list[tuple[str, list[str]]]:
    grid = []
    for item in items or []:
        if "=" not in item:
            raise ContractError(f"grid entry {item!r} should look like key=v1,v2")
        key, values = item.split("=", 1)
        grid.append((key.replace("-", "_"), values.split(",")))
    return grid


def cmd_sweep(args) -> int:
    base = _config_from_args(args)
    grid = _parse_grid(args.grid)
    keys = [k for k, _ in grid]
    configs = []
    for combo in itertools.product(*[vals for _, vals in grid]):
        values = {f.name: getattr(base, f.name) for f in fields(ExperimentConfig)}
        values.update(dict(zip(keys, combo)))
        configs.append(ExperimentConfig.from_mapping(values))
    rows = harness.sweep(configs, args.workers)
    _emit(harness.sweep_csv(rows, keys or ["n"]), base.csv)
    return 0 if all(not r.error for r in rows) else 1


# ---------- lower-bound experiments

LB_COLUMNS = ["statistic", "ci_lo", "ci_hi", "regime_label"]


def _rng(args):
    seed = default_seed() if args.seed is None else args.seed
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def lb_pisy(args):
    rng = _rng(args)
    rows = []
    transition = (1 - 1 / args.k) * log2(comb(args.n, args.k))
    pool = random_points(args.n, args.pool or 4 * args.n, rng)
    for q in args.q:
        rep = lowerbounds.lemma21_criterion(pool, q, args.k, args.trials, rng, n=args.n)
        lo, hi = lowerbounds.wilson_interval(rep.pair_violations, args.trials << q)
        rows.append({"n": args.n, "k": args.k, "q": q, "statistic": rep.pair_rate, "ci_lo": lo,
                     "ci_hi": hi, "set_rate": rep.set_rate,
                     "regime_label": "below" if q < transition else "above"})
    return rows, ["n", "k", "q", *LB_COLUMNS, "set_rate"]


def lb_sumset(args):
    group = lowerbounds.parse_group(args.group)
    rep = lowerbounds.sumset_concentration_experiment(group, args.n, args.k, args.y,
                                                      args.trials, _rng(args), args.lam)
    row = {"group": rep.group, "n": rep.n, "k": rep.k, "y": rep.y, "trials": rep.trials,
           "mean": rep.mean, "expected": float(rep.expected), "statistic": rep.tail_rate,
           "ci_lo": rep.tail_ci[0], "ci_hi": rep.tail_ci[1], "regime_label": rep.regime}
    return [row], ["group", "n", "k", "y", "trials", "mean", "expected", *LB_COLUMNS]


def lb_sunflower(args):
    rng = _rng(args)
    size = args.size or lowerbounds.erdos_rado_threshold(args.a, args.b)
    found = 0
    for _ in range(args.families):
        fam = lowerbounds.random_set_family(size, args.b, args.universe, rng)
        out = lowerbounds.find_delta_system(fam, args.a)
        found += out is not None and len(out) == args.a and lowerbounds.is_delta_system(out)
    lo, hi = lowerbounds.wilson_interval(found, args.families)
    label = "at-threshold" if size >= lowerbounds.erdos_rado_threshold(args.a, args.b) else "below"
    row = {"a": args.a, "b": args.b, "size": size, "families": args.families,
           "statistic": found / args.families, "ci_lo": lo, "ci_hi": hi, "regime_label": label}
    return [row], ["a", "b", "size", "families", *LB_COLUMNS]


def lb_cayley(args):
    d = args.d or lowerbounds.cayley_generator_count(args.N, args.k)
    rep = lowerbounds.cayley_mixing_experiment(args.N, d, args.k, args.draws, _rng(args))
    rows = []
    for steps, vals in ((args.k - 1, rep.tv_before_each), (args.k, rep.tv_at_each)):
        rows.append({"N": args.N, "d": d, "k": args.k, "steps": steps,
                     "statistic": float(np.mean(vals)), "ci_lo": float(np.min(vals)),
                     "ci_hi": float(np.max(vals)),
                     "regime_label": "k-1 steps" if steps < args.k else "k steps"})
    return rows, ["N", "d", "k", "steps", *LB_COLUMNS]


LB = {"pisy": lb_pisy, "sumset": lb_sumset, "sunflower": lb_sunflower, "cayley": lb_cayley}


def cmd_lb(args) -> int:
    rows, cols = LB[args.experiment](args)
    _emit(harness.table_csv(rows, cols), args.csv or "")
    return 0


# ---------- oracle self-checks


def oracle_blr(args) -> bool:
    rng = _rng(args)
    ok = True
    for _ in range(args.count):
        f = SeededRandom(args.n, int(rng.integers(0, 2 ** 63)))
        ok &= blr_acceptance_probability(f, args.k) == blr_fourier_formula(f, args.k)
    return ok


def oracle_parseval(args) -> bool:
    rng = _rng(args)
    return all(abs(walsh_hadamard(SeededRandom(args.n, int(rng.integers(0, 2 ** 63))))
                   .parseval_sum() - 1) <= 1e-9 for _ in range(args.count))


def oracle_sumset(args) -> bool:
    rng = _rng(args)
    group = lowerbounds.AbelianGroup.z2q(4)
    for _ in range(args.count):
        X = group.random(args.n, rng)
        naive = np.zeros(group.order, dtype=np.int64)
        for I in itertools.combinations(range(args.n), args.k):
            s = 0
            for i in I:
                s ^= int(X[i])
            naive[s] += 1
        if not np.array_equal(naive, lowerbounds.sumset_counts(group, X, args.k)):
            return False
    return True


def oracle_linear_distance(args) -> bool:
    rng = _rng(args)
    n = min(args.n, 10)
    pts = np.arange(1 << n, dtype=np.uint64)
    for _ in range(args.count):
        f = SeededRandom(n, int(rng.integers(0, 2 ** 63)))
        t = truth_table(f)
        best = min(int(np.count_nonzero(t != popcount(pts & np.uint64(m)) % 2))
                   for m in range(1 << n))
        if exact_distance_to_family(f, Family.linear(n)) * (1 << n) != best:
            return False
    return True


ORACLES = {"blr": oracle_blr, "parseval": oracle_parseval, "sumset": oracle_sumset,
           "linear-distance": oracle_linear_distance}


def cmd_oracle(args) -> int:
    ok = ORACLES[args.check](args)
    print(f"{args.check}: {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


# ---------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bftest", description="Boolean function testing laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run trials of one tester")
    _add_config_flags(run)
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="run a grid of configs for one tester")
    _add_config_flags(sw)
    sw.add_argument("--grid", action="append", help="key=v1,v2,... (repeatable)")
    sw.set_defaults(func=cmd_sweep)

    lb = sub.add_parser("lb", help="lower-bound experiments")
    lbs = lb.add_subparsers(dest="experiment", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--csv", default="")
    e = lbs.add_parser("pisy", parents=[common])
    e.add_argument("--n", type=int, default=50)
    e.add_argument("--k", type=int, default=2)
    e.add_argument("--q", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    e.add_argument("--trials", type=int, default=200)
    e.add_argument("--pool", type=int, default=0)
    e = lbs.add_parser("sumset", parents=[common])
    e.add_argument("--group", default="z2^4")
    e.add_argument("--n", type=int, default=24)
    e.add_argument("--k", type=int, default=2)
    e.add_argument("--y", type=int, default=0)
    e.add_argument("--trials", type=int, default=10000)
    e.add_argument("--lam", type=float, default=None)
    e = lbs.add_parser("sunflower", parents=[common])
    e.add_argument("--a", type=int, default=3)
    e.add_argument("--b", type=int, default=2)
    e.add_argument("--size", type=int, default=0)
    e.add_argument("--universe", type=int, default=20)
    e.add_argument("--families", type=int, default=1000)
    e = lbs.add_parser("cayley", parents=[common])
    e.add_argument("--N", type=int, default=10000)
    e.add_argument("--d", type=int, default=0)
    e.add_argument("--k", type=int, default=3)
    e.add_argument("--draws", type=int, default=20)
    lb.set_defaults(func=cmd_lb)

    orc = sub.add_parser("oracle", help="cross-check fast routines against brute force")
    orc.add_argument("check", choices=sorted(ORACLES))
    orc.add_argument("--n", type=int, default=8)
    orc.add_argument("--k", type=int, default=1)
    orc.add_argument("--count", type=int, default=20)
    orc.add_argument("--seed", type=int, default=None)
    orc.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"bftest: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bftest: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
