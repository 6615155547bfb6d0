"""Seeded trial runner, sweeps, summaries and CSV/JSON output.

Trial ``t`` of a run with master seed ``s`` draws everything (target and
oracle sample) from ``Philox(SeedSequence(s, spawn_key=(0, t)))``; a shared
target pool, when requested, comes from the stream with key ``(1,)``.
Streams are therefore independent of execution order and worker count.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from math import ceil, log2
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .boolfn import BooleanFunction, parse_function
from .errors import ContractError
from .families import (
    Family,
    count_members,
    far_function_generator,
    greedy_epsilon_net,
    parse_family,
    sample_uniform,
)
from .gf2 import monomial_count
from .lowerbounds import wilson_interval
from .testers import learning, linear, symmetric
from .testers.oracle import Decision, Model, QueryOracle, Verdict

CSV_HEADER = ("trial", "decision", "queries_used", "target", "diagnostics")
SEED_ENV = "BFTEST_SEED"


class ConfigError(ContractError):
    """A configuration violates one or more tester preconditions."""


def default_seed() -> int:
    return int(os.environ.get(SEED_ENV, "0"))


@dataclass
class ExperimentConfig:
    tester: str
    n: int
    model: str = ""
    family: str = ""
    target: str = "member"
    k: int = 1
    d: int = 1
    eps: float = 0.2
    u: int = 0
    q: int = 0
    repetitions: int = 10
    pair_budget: int = 0
    eps_lo: float = 0.0
    eps_hi: float = 0.0
    const: float = 0.0
    trials: int = 100
    seed: int = 0
    target_pool: int = 0
    csv: str = ""
    json: str = ""

    def __post_init__(self):
        spec = TESTERS.get(self.tester)
        if spec is not None:
            if not self.model:
                self.model = spec.models[0]
            if not self.family:
                self.family = spec.default_family(self)

    def family_obj(self) -> Family:
        text = self.family if "n=" in self.family else f"{self.family} n={self.n}"
        return parse_family(text)

    def validate(self) -> None:
        errors = validation_errors(self)
        if errors:
            raise ConfigError("; ".join(errors))

    @classmethod
    def from_mapping(cls, values: dict) -> "ExperimentConfig":
        kinds = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(values) - set(kinds))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cast = {"int": int, "float": float, "str": str}
        return cls(**{k: cast[kinds[k]](v) for k, v in values.items()})


def read_config_file(path) -> dict:
    """key = value lines; blank lines and '#' comments are ignored."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------- tester registry


@dataclass(frozen=True)
class TesterSpec:
    models: tuple[str, ...]
    default_family: Callable[[ExperimentConfig], str]
    run: Callable[[ExperimentConfig, BooleanFunction, np.random.Generator], Verdict]
    check: Callable[[ExperimentConfig], list[str]] = lambda cfg: []


def _run_blr(cfg, f, rng):
    budget = (2 * cfg.k + 1) * cfg.repetitions
    return linear.blr_k_test(QueryOracle.classic(f, budget), cfg.k, cfg.repetitions, rng)


def _active_pool(cfg) -> int:
    return cfg.u or cfg.n * cfg.n


def _run_active_linear(cfg, f, rng):
    u = _active_pool(cfg)
    q = linear.active_query_count(cfg.n, u)
    budget = cfg.q or (q + 1) * cfg.repetitions * 4
    oracle = QueryOracle.active(f, u, budget, rng)
    return linear.active_linear_tester(oracle, cfg.repetitions, rng, q=q)


def _run_passive_linear(cfg, f, rng):
    q = cfg.q or cfg.n + 10
    return linear.passive_linear_tester(QueryOracle.passive(f, q, rng))


def _run_passive_poly(cfg, f, rng):
    q = cfg.q or monomial_count(cfg.n, cfg.d) + 20
    return linear.passive_polynomial_tester(QueryOracle.passive(f, q, rng), cfg.d)


def _symmetric_oracle(cfg, f, rng, pairs):
    if cfg.model == "passive":
        q = cfg.q or symmetric.symmetric_passive_sample_size(cfg.n, cfg.const or 8.0)
        return QueryOracle.passive(f, q, rng)
    if cfg.model == "active":
        return QueryOracle.active(f, cfg.u or max(cfg.n, 4 * pairs), 2 * pairs, rng)
    return QueryOracle.classic(f, 2 * pairs)


def _run_symmetric(cfg, f, rng):
    pairs = cfg.pair_budget or 10
    return symmetric.symmetric_tester(_symmetric_oracle(cfg, f, rng, pairs), pairs, rng)


def _run_tolerant(cfg, f, rng):
    pairs = cfg.pair_budget or 400
    if cfg.model == "active":
        oracle = QueryOracle.active(f, cfg.u or 8 * pairs, 2 * pairs, rng)
    else:
        oracle = QueryOracle.passive(f, cfg.q or 200, rng)
    return symmetric.tolerant_symmetric_tester(oracle, pairs, cfg.eps_lo, cfg.eps_hi, rng)


def _run_psf(cfg, f, rng):
    if cfg.model == "passive":
        q = cfg.q or symmetric.psf_passive_sample_size(cfg.n, cfg.k, cfg.eps, cfg.const or 2.0)
        return symmetric.psf_tester(QueryOracle.passive(f, q, rng), cfg.k, rng)
    pairs = cfg.pair_budget or symmetric.psf_active_pair_budget(cfg.n, cfg.k)
    oracle = QueryOracle.active(f, cfg.u or 8 * pairs, 2 * pairs, rng)
    return symmetric.psf_tester(oracle, cfg.k, rng, pair_budget=pairs)


def _run_junta(cfg, f, rng):
    q = cfg.q or learning.junta_sample_size(cfg.n, cfg.k, cfg.const or 8.0)
    return learning.junta_passive_tester(QueryOracle.passive(f, q, rng), cfg.k, cfg.eps, q)


def _run_learn_verify(cfg, f, rng):
    F = cfg.family_obj()
    learn = cfg.q or _learn_size(cfg, F)
    total = learn + learning.verify_block_size(cfg.eps, cfg.const or 32.0)
    oracle = QueryOracle.passive(f, total, rng)
    return learning.learn_then_verify(F, oracle, None, cfg.eps, learn, cfg.const or 32.0)


def _learn_size(cfg, F) -> int:
    return ceil(4 / cfg.eps * log2(max(2, count_members(F))))


def _check_symmetric(cfg):
    if cfg.model == "active" and cfg.u and cfg.u < cfg.n:
        return [f"active symmetric tester needs a pool of at least n = {cfg.n} points"]
    return []


def _check_tolerant(cfg):
    errs = []
    if not cfg.eps_lo < cfg.eps_hi:
        errs.append("tolerant tester needs eps_lo < eps_hi")
    if cfg.model not in ("active", "passive"):
        errs.append("tolerant tester runs in the active or passive model")
    return errs


def _check_psf(cfg):
    return [f"psf tester is capped at k <= 3 (got {cfg.k})"] if cfg.k > 3 else []


def _check_junta(cfg):
    errs = []
    if cfg.k > learning.MAX_JUNTA_K or cfg.n > learning.MAX_JUNTA_N:
        errs.append(f"junta tester needs k <= {learning.MAX_JUNTA_K}, n <= {learning.MAX_JUNTA_N}")
    return errs


def _check_poly(cfg):
    if monomial_count(cfg.n, cfg.d) > linear.MAX_SOLVER_MONOMIALS:
        return [f"n_d = {monomial_count(cfg.n, cfg.d)} exceeds the solver cap"]
    return []


def _check_active_linear(cfg):
    u = _active_pool(cfg)
    return [] if u >= 2 else ["active pool needs at least 2 points"]


TESTERS: dict[str, TesterSpec] = {
    "blr": TesterSpec(("classic",), lambda c: "linear", _run_blr),
    "active_linear": TesterSpec(("active",), lambda c: "linear", _run_active_linear,
                                _check_active_linear),
    "passive_linear": TesterSpec(("passive",), lambda c: "linear", _run_passive_linear),
    "passive_poly": TesterSpec(("passive",), lambda c: f"pol d={c.d}", _run_passive_poly,
                               _check_poly),
    "symmetric": TesterSpec(("passive", "active", "classic"), lambda c: "sym",
                            _run_symmetric, _check_symmetric),
    "tolerant_symmetric": TesterSpec(("active", "passive"), lambda c: "sym", _run_tolerant,
                                     _check_tolerant),
    "psf": TesterSpec(("passive", "active"), lambda c: f"psym k={c.k}", _run_psf, _check_psf),
    "junta": TesterSpec(("passive",), lambda c: f"junta k={c.k}", _run_junta, _check_junta),
    "learn_verify": TesterSpec(("passive",), lambda c: f"lin k={c.k}", _run_learn_verify),
}


def validation_errors(cfg: ExperimentConfig) -> list[str]:
    errs = []
    spec = TESTERS.get(cfg.tester)
    if spec is None:
        return [f"unknown tester {cfg.tester!r}; choose from {', '.join(sorted(TESTERS))}"]
    if cfg.trials < 1:
        errs.append("trials must be at least 1")
    if cfg.n < 1:
        errs.append("n must be positive")
    if cfg.model not in spec.models:
        errs.append(f"{cfg.tester} supports models {', '.join(spec.models)}, not {cfg.model!r}")
    if not 0 <= cfg.eps < 1:
        errs.append("eps must lie in [0, 1)")
    if cfg.target in ("far",) and cfg.eps <= 0:
        errs.append("far targets need eps > 0")
    if cfg.target_pool < 0:
        errs.append("target_pool must be non-negative")
    try:
        cfg.family_obj()
    except ContractError as exc:
        errs.append(f"family: {exc}")
    if cfg.target not in ("member", "far"):
        try:
            f = parse_function(cfg.target)
            if f.n != cfg.n:
                errs.append(f"target has n = {f.n}, config has n = {cfg.n}")
        except ContractError as exc:
            errs.append(f"target: {exc}")
    if not errs:
        errs.extend(spec.check(cfg))
    return errs


# ---------- trials


def trial_rng(seed: int, t: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0, t))))


def pool_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(1,))))


def draw_target(cfg: ExperimentConfig, rng: np.random.Generator) -> BooleanFunction:
    if cfg.target == "member":
        return sample_uniform(cfg.family_obj(), rng)
    if cfg.target == "far":
        return far_function_generator(cfg.family_obj(), cfg.eps, rng)
    return parse_function(cfg.target)


@dataclass
class TrialResult:
    trial: int
    decision: str
    queries_used: int
    target: str
    diagnostics: dict = field(default_factory=dict)


@dataclass
class SummaryStats:
    trials: int
    accepts: int
    rejects: int
    inconclusive: int
    acceptance_rate: float | None
    ci_lo: float
    ci_hi: float
    mean_queries: float

    @property
    def rejection_rate(self) -> float | None:
        return None if self.acceptance_rate is None else 1 - self.acceptance_rate

    def rejection_interval(self) -> tuple[float, float]:
        return 1 - self.ci_hi, 1 - self.ci_lo


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _run_one(args) -> TrialResult:
    cfg, t, pool = args
    rng = trial_rng(cfg.seed, t)
    f = pool[t % len(pool)] if pool else draw_target(cfg, rng)
    verdict = TESTERS[cfg.tester].run(cfg, f, rng)
    return TrialResult(t, verdict.decision.value, int(verdict.queries_used), f.describe(),
                       _jsonable(verdict.diagnostics))


def run_trials(cfg: ExperimentConfig, workers: int = 1) -> tuple[list[TrialResult], SummaryStats]:
    """Run every trial of ``cfg``; results are ordered by trial index."""
    cfg.validate()
    pool = None
    if cfg.target_pool:
        rng = pool_rng(cfg.seed)
        pool = [draw_target(cfg, rng) for _ in range(cfg.target_pool)]
    jobs = [(cfg, t, pool) for t in range(cfg.trials)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_one(j) for j in jobs]
    results.sort(key=lambda r: r.trial)
    return results, summarize(results)


def summarize(results: Sequence[TrialResult]) -> SummaryStats:
    """Counts, acceptance rate over decided trials, Wilson 95% interval, mean queries."""
    if not results:
        raise ContractError("cannot summarize an empty trial list")
    acc = sum(r.decision == Decision.ACCEPT.value for r in results)
    rej = sum(r.decision == Decision.REJECT.value for r in results)
    inc = len(results) - acc - rej
    decided = acc + rej
    lo, hi = wilson_interval(acc, decided)
    rate = acc / decided if decided else None
    mean_q = float(np.mean([r.queries_used for r in results]))
    return SummaryStats(len(results), acc, rej, inc, rate, lo, hi, mean_q)


@dataclass
class SweepRow:
    config: ExperimentConfig
    summary: SummaryStats | None
    error: str = ""


def sweep(configs: Sequence[ExperimentConfig], workers: int = 1) -> list[SweepRow]:
    """One summary row per config, in grid order; failures become error rows."""
    testers = {c.tester for c in configs}
    if len(testers) > 1:
        raise ConfigError(f"a sweep grid must share one tester, got {sorted(testers)}")
    rows = []
    for cfg in configs:
        try:
            rows.append(SweepRow(cfg, run_trials(cfg, workers)[1]))
        except ContractError as exc:
            rows.append(SweepRow(cfg, None, str(exc)))
    return rows


# ---------- output


def results_csv(results: Sequence[TrialResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow([r.trial, r.decision, r.queries_used, r.target,
                    json.dumps(r.diagnostics, sort_keys=True, separators=(",", ":"))])
    return buf.getvalue()


def summary_document(cfg: ExperimentConfig | None, summary: SummaryStats | None) -> dict:
    return {"config": asdict(cfg) if cfg is not None else None,
            "summary": asdict(summary) if summary is not None else None}


def summary_json(cfg, summary) -> str:
    return json.dumps(summary_document(cfg, summary), sort_keys=True, indent=2) + "\n"


def _write(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_results(results: Sequence[TrialResult], summary: SummaryStats | None,
                 cfg: ExperimentConfig | None, csv_path=None, json_path=None) -> None:
    """Write the per-trial CSV and/or the JSON summary (config echo included)."""
    if csv_path:
        _write(csv_path, results_csv(results))
    if json_path:
        _write(json_path, summary_json(cfg, summary))


def sweep_csv(rows: Sequence[SweepRow], keys: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([*keys, "accepts", "rejects", "inconclusive", "acceptance_rate", "ci_lo",
                "ci_hi", "mean_queries", "error"])
    for row in rows:
        params = [getattr(row.config, k) for k in keys]
        s = row.summary
        if s is None:
            w.writerow([*params, "", "", "", "", "", "", "", row.error])
        else:
            rate = "" if s.acceptance_rate is None else f"{s.acceptance_rate:.6f}"
            w.writerow([*params, s.accepts, s.rejects, s.inconclusive, rate, f"{s.ci_lo:.6f}",
                        f"{s.ci_hi:.6f}", f"{s.mean_queries:.4f}", ""])
    return buf.getvalue()


def table_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    """Generic experiment table: params..., statistic, ci_lo, ci_hi, regime_label."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def epsilon_net_for(cfg: ExperimentConfig):
    return greedy_epsilon_net(cfg.family_obj(), cfg.eps)
