"""Shared run bookkeeping: budget, clocks, history, and the result log.

Every searcher drives a SearchSession: it owns the evaluation cache,
enforces the global budget, tracks the best configuration, and emits
one ResultRecord per evaluator-producing iteration (cache hits produce
nothing). The root baseline is measured once per run and does not
consume budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

from .errors import RootEvaluationError
from .evaluators import CachedEvaluator, CompileFailure, Outcome, RunFailure, Time
from .loops import Configuration
from .rendering import pragma_lines
from .reward import EvalRecord, speedup


@dataclass(frozen=True)
class Budget:
    """Global stopping rules shared by every search method.

    ``max_unique`` counts unique configurations measured beyond the root
    baseline. ``max_iterations`` (optional) bounds total search
    iterations, cache hits included; finite spaces need it because a
    saturated cache stops consuming the unique budget.
    """

    max_unique: int = 1000
    max_wall_clock_s: float = 21600.0
    max_iterations: int | None = None

    def __post_init__(self) -> None:
        if self.max_unique < 0:
            raise ValueError("max_unique must be >= 0")
        if self.max_wall_clock_s <= 0:
            raise ValueError("max_wall_clock_s must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1 when set")


class MonotonicClock:
    """Real elapsed time, for external measurements."""

    def __init__(self) -> None:
        self._start = time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self._start

    def advance(self, seconds: float) -> None:
        pass


class SimulatedClock:
    """Deterministic clock that advances by each fresh measurement's time.

    Synthetic runs use it so logs (wall-clock column included) are
    byte-identical across repeats of the same configuration and seed.
    """

    def __init__(self) -> None:
        self._elapsed = 0.0

    def elapsed(self) -> float:
        return self._elapsed

    def advance(self, seconds: float) -> None:
        self._elapsed += seconds


@dataclass(frozen=True)
class ResultRecord:
    """One line of the run log: a single fresh evaluation."""

    iteration: int
    phase: int
    method: str
    key: str
    pragmas: tuple[str, ...]
    outcome: Outcome
    h: float | None
    f: float | None
    best_so_far_h: float
    depth: int
    wall_clock_s: float

    def to_dict(self) -> dict:
        if isinstance(self.outcome, Time):
            outcome = {"kind": "time", "seconds": self.outcome.seconds}
        elif isinstance(self.outcome, CompileFailure):
            outcome = {"kind": "compile_failure", "reason": self.outcome.reason}
        else:
            outcome = {"kind": "run_failure", "reason": self.outcome.reason}
        return {
            "iteration": self.iteration,
            "phase": self.phase,
            "method": self.method,
            "key": self.key,
            "pragmas": list(self.pragmas),
            "outcome": outcome,
            "h": self.h,
            "f": self.f,
            "best_so_far_h": self.best_so_far_h,
            "depth": self.depth,
            "wall_clock_s": self.wall_clock_s,
        }


def record_from_dict(doc: dict) -> ResultRecord:
    raw = doc["outcome"]
    outcome: Outcome
    if raw["kind"] == "time":
        outcome = Time(raw["seconds"])
    elif raw["kind"] == "compile_failure":
        outcome = CompileFailure(raw.get("reason", ""))
    else:
        outcome = RunFailure(raw.get("reason", ""))
    return ResultRecord(
        iteration=doc["iteration"],
        phase=doc["phase"],
        method=doc["method"],
        key=doc["key"],
        pragmas=tuple(doc["pragmas"]),
        outcome=outcome,
        h=doc["h"],
        f=doc.get("f"),
        best_so_far_h=doc["best_so_far_h"],
        depth=doc["depth"],
        wall_clock_s=doc["wall_clock_s"],
    )


@dataclass
class Measurement:
    """What one measure() call produced. ``record`` is set on fresh ones."""

    outcome: Outcome
    h: float | None
    fresh: bool
    record: EvalRecord | None


class SearchSession:
    """One search run: cache, budget, history, best-so-far, result log."""

    def __init__(
        self,
        cache: CachedEvaluator,
        budget: Budget,
        clock: MonotonicClock | SimulatedClock | None = None,
        method: str = "",
        sink: Callable[[ResultRecord], None] | None = None,
    ):
        self.cache = cache
        self.budget = budget
        self.clock = clock or MonotonicClock()
        self.method = method
        self.records: list[ResultRecord] = []
        self._sink = sink
        self.history: list[EvalRecord] = []
        self.best: EvalRecord | None = None
        self.root_time: float | None = None
        self.iterations = 0

    @property
    def unique_evaluations(self) -> int:
        """Unique configurations measured beyond the root baseline."""
        used = self.cache.unique_count
        return max(0, used - 1) if self.root_time is not None else used

    def count_iteration(self) -> None:
        self.iterations += 1

    def out_of_budget(self) -> bool:
        if self.unique_evaluations >= self.budget.max_unique:
            return True
        if self.clock.elapsed() >= self.budget.max_wall_clock_s:
            return True
        return (
            self.budget.max_iterations is not None
            and self.iterations >= self.budget.max_iterations
        )

    def evaluate_root(self, config: Configuration | None = None, f: float | None = None) -> EvalRecord:
        """Measure the empty configuration; its time is the speedup baseline."""
        config = config or Configuration()
        outcome = self.cache.evaluate(config)
        if not outcome.ok:
            raise RootEvaluationError(f"root configuration failed: {outcome}")
        self.clock.advance(outcome.seconds)
        self.root_time = outcome.seconds
        record = EvalRecord(config, outcome, 1.0, iteration=0, phase=0)
        self.history.append(record)
        self.best = record
        self.log(record, f)
        return record

    def measure(self, config: Configuration, phase: int) -> Measurement | None:
        """Evaluate through the cache, minding the budget.

        Returns None when the configuration is unseen but the budget has
        no room for another fresh evaluation. Cache hits are free and
        produce no record.
        """
        if self.root_time is None:
            raise RootEvaluationError("evaluate_root must run before measure")
        fresh = not self.cache.seen(config)
        if fresh and self.out_of_budget():
            return None
        outcome = self.cache.evaluate(config)
        h = speedup(self.root_time, outcome.seconds) if outcome.ok else None
        record = None
        if fresh:
            self.clock.advance(outcome.seconds if outcome.ok else 0.0)
            record = EvalRecord(
                config, outcome, h, iteration=len(self.history), phase=phase
            )
            self.history.append(record)
            if h is not None and (self.best is None or h > self.best.h):
                self.best = record
        return Measurement(outcome, h, fresh, record)

    def log(self, record: EvalRecord, f: float | None) -> None:
        """Emit the ResultRecord for a fresh evaluation."""
        best_h = self.best.h if self.best is not None else 1.0
        out = ResultRecord(
            iteration=record.iteration,
            phase=record.phase,
            method=self.method,
            key=record.key,
            pragmas=tuple(pragma_lines(record.config)),
            outcome=record.outcome,
            h=record.h,
            f=f,
            best_so_far_h=best_h,
            depth=record.config.depth,
            wall_clock_s=self.clock.elapsed(),
        )
        self.records.append(out)
        if self._sink is not None:
            self._sink(out)
