"""Model- and budget-enforcing access to an unknown function."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..boolfn import BooleanFunction, random_points
from ..errors import BudgetExceeded, ContractError, ModelViolation


class Model(str, Enum):
    CLASSIC = "classic"
    ACTIVE = "active"
    PASSIVE = "passive"


class Decision(str, Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    INCONCLUSIVE = "inconclusive"


@dataclass
class Verdict:
    decision: Decision
    queries_used: int
    transcript: list[tuple[int, int]] | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.decision is Decision.ACCEPT


@dataclass
class LearnerOutput:
    hypothesis: BooleanFunction
    samples_used: int
    proper: bool = True
    disagreements: int = 0


class QueryOracle:
    """Wraps a target function and enforces one query model.

    Classic answers any point.  Active draws a uniform pool of ``u`` points
    at construction and answers only pool points (``pool`` is visible; labels
    cost queries).  Passive draws a uniform sequence and reveals labelled
    points strictly in order.  Every answered point counts against ``budget``.
    """

    def __init__(self, target: BooleanFunction, model: Model, budget: int,
                 points: np.ndarray | None = None, record: bool = False):
        self.target = target
        self.model = Model(model)
        self.budget = int(budget)
        self.spent = 0
        self.record = record
        self.transcript: list[tuple[int, int]] = []
        self._points = None if points is None else np.asarray(points, dtype=np.uint64)
        self._pool_index = None
        if self.model is not Model.CLASSIC and self._points is None:
            raise ContractError(f"{self.model.value} oracle needs its point set")

    @classmethod
    def classic(cls, target, budget, **kw) -> "QueryOracle":
        return cls(target, Model.CLASSIC, budget, **kw)

    @classmethod
    def active(cls, target, u, budget, rng, **kw) -> "QueryOracle":
        return cls(target, Model.ACTIVE, budget, random_points(target.n, u, rng), **kw)

    @classmethod
    def passive(cls, target, q, rng, **kw) -> "QueryOracle":
        return cls(target, Model.PASSIVE, q, random_points(target.n, q, rng), **kw)

    @property
    def n(self) -> int:
        return self.target.n

    @property
    def remaining(self) -> int:
        return self.budget - self.spent

    @property
    def pool(self) -> np.ndarray:
        if self.model is not Model.ACTIVE:
            raise ModelViolation("only the active model exposes a pool")
        return self._points

    def _charge(self, count: int) -> None:
        if self.spent + count > self.budget:
            raise BudgetExceeded(f"{count} more queries exceed the budget of {self.budget} "
                                 f"({self.spent} spent)")
        self.spent += count

    def _answer(self, xs: np.ndarray) -> np.ndarray:
        ys = self.target.evaluate_many(xs).astype(np.uint8)
        if self.record:
            self.transcript.extend(zip((int(x) for x in xs), (int(y) for y in ys)))
        return ys

    def query(self, xs) -> np.ndarray:
        """Labels of arbitrary points (classic) or of pool points (active)."""
        xs = np.atleast_1d(np.asarray(xs, dtype=np.uint64))
        if self.model is Model.PASSIVE:
            raise ModelViolation("a passive tester cannot choose its queries")
        if self.model is Model.ACTIVE:
            if self._pool_index is None:
                self._pool_index = set(int(p) for p in self._points)
            outside = [int(x) for x in xs if int(x) not in self._pool_index]
            if outside:
                raise ModelViolation(f"point {outside[0]:#x} is not in the active pool")
        self._charge(len(xs))
        return self._answer(xs)

    def query_pool(self, indices) -> np.ndarray:
        """Labels of pool points by index (active model)."""
        indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
        xs = self.pool[indices]
        self._charge(len(xs))
        return self._answer(xs)

    def reveal(self, m: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Next ``m`` labelled points of the passive sequence (all remaining by default)."""
        if self.model is not Model.PASSIVE:
            raise ModelViolation("reveal() is only available to passive testers")
        m = self.remaining if m is None else m
        xs = self._points[self.spent:self.spent + m]
        if len(xs) < m:
            raise BudgetExceeded(f"only {len(xs)} samples remain, {m} requested")
        self._charge(m)
        return xs, self._answer(xs)
