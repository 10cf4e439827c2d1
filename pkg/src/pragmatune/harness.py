"""Experiment orchestration: config files, method dispatch, persistence.

An experiment file is JSON (``version`` 1) naming the nest description,
the evaluator, the method, the seed, and optional budget/space/reward/
search overrides. A run writes ``log.jsonl`` (one ResultRecord per
line) and ``summary.json`` into the output directory when one is given,
and is byte-reproducible for a fixed config and seed on the synthetic
evaluator.
"""

from __future__ import annotations

import functools
import hashlib
import json
import logging
import os
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import baselines, mcts
from .errors import ExperimentConfigError
from .evaluators import (
    CachedEvaluator,
    ExternalJobSpec,
    SyntheticLandscape,
    evaluate_external,
)
from .loops import load_loop_nest
from .mcts import MctsParams
from .reports import write_log
from .reward import EvalRecord, RewardParams
from .session import Budget, MonotonicClock, ResultRecord, SearchSession, SimulatedClock
from .space import SpaceParams

logger = logging.getLogger("pragmatune")

METHODS = ("mcts", "rs", "bf", "gg")

LOG_ENV_VAR = "PRAGMA_MCTS_LOG"


def configure_logging() -> None:
    """Honor the PRAGMA_MCTS_LOG environment variable (debug/info/...)."""
    level = os.environ.get(LOG_ENV_VAR)
    if level:
        logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO))


def derive_seed(master: int, label: str) -> int:
    """A stable per-component seed split off the master seed."""
    digest = hashlib.sha256(f"{master}/{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


@dataclass(frozen=True)
class ExperimentConfig:
    nest_text: str
    method: str = "mcts"
    seed: int = 0
    evaluator: dict = field(default_factory=lambda: {"type": "synthetic"})
    budget: Budget = field(default_factory=Budget)
    space: SpaceParams = field(default_factory=SpaceParams)
    reward: RewardParams = field(default_factory=RewardParams)
    search: MctsParams | None = None
    out_dir: str | None = None

    def mcts_params(self) -> MctsParams:
        base = self.search or MctsParams()
        return MctsParams(
            c=base.c,
            per_run_budget=base.per_run_budget,
            n_walks=base.n_walks,
            no_improve_limit=base.no_improve_limit,
            same_config_limit=base.same_config_limit,
            reward=self.reward,
            space=self.space,
            check_invariants=base.check_invariants,
        )


def _take(doc: dict, key: str, cls):
    section = doc.get(key, {})
    if not isinstance(section, dict):
        raise ExperimentConfigError(f"'{key}' must be an object")
    section = dict(section)
    try:
        if cls is SpaceParams:
            for name in ("tile_sizes", "unroll_factors", "peel_variants"):
                if name in section:
                    section[name] = tuple(section[name])
        return cls(**section)
    except (TypeError, ValueError) as exc:
        raise ExperimentConfigError(f"bad '{key}' section: {exc}") from exc


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Load and validate an experiment file; paths resolve beside it."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ExperimentConfigError(f"cannot read experiment file: {exc}") from exc
    if not isinstance(doc, dict):
        raise ExperimentConfigError("experiment file must hold a JSON object")
    if doc.get("version", 1) != 1:
        raise ExperimentConfigError(f"unsupported version {doc.get('version')!r}")
    if "nest" not in doc:
        raise ExperimentConfigError("experiment file needs a 'nest' path")
    base_dir = path.parent
    nest_path = base_dir / doc["nest"]
    try:
        nest_text = nest_path.read_text()
    except OSError as exc:
        raise ExperimentConfigError(f"cannot read nest file: {exc}") from exc
    method = doc.get("method", "mcts")
    if method not in METHODS:
        raise ExperimentConfigError(f"method must be one of {METHODS}, got {method!r}")
    evaluator = doc.get("evaluator", {"type": "synthetic"})
    if not isinstance(evaluator, dict) or evaluator.get("type", "synthetic") not in (
        "synthetic",
        "external",
    ):
        raise ExperimentConfigError("evaluator.type must be 'synthetic' or 'external'")
    evaluator = dict(evaluator)
    if evaluator.get("type", "synthetic") == "external":
        template_path = evaluator.get("source_template")
        if not template_path:
            raise ExperimentConfigError("external evaluator needs 'source_template'")
        try:
            evaluator["source_template"] = (base_dir / template_path).read_text()
        except OSError as exc:
            raise ExperimentConfigError(f"cannot read source template: {exc}") from exc
        for key in ("compile_cmd", "run_cmd"):
            if not evaluator.get(key):
                raise ExperimentConfigError(f"external evaluator needs '{key}'")
    search = None
    if "search" in doc:
        search = _take(doc, "search", MctsParams)
    return ExperimentConfig(
        nest_text=nest_text,
        method=method,
        seed=int(doc.get("seed", 0)),
        evaluator=evaluator,
        budget=_take(doc, "budget", Budget),
        space=_take(doc, "space", SpaceParams),
        reward=_take(doc, "reward", RewardParams),
        search=search,
        out_dir=doc.get("out"),
    )


@dataclass
class ExperimentSummary:
    """What a run produced; ``records`` is the in-memory log."""

    method: str
    seed: int
    best_key: str
    best_h: float
    best_depth: int
    best_pragmas: tuple[str, ...]
    unique_evaluations: int
    wall_clock_s: float
    phases: int
    records: list[ResultRecord] = field(repr=False, default_factory=list)
    history: list[EvalRecord] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "seed": self.seed,
            "best_key": self.best_key,
            "best_h": self.best_h,
            "best_depth": self.best_depth,
            "best_pragmas": list(self.best_pragmas),
            "unique_evaluations": self.unique_evaluations,
            "wall_clock_s": self.wall_clock_s,
            "phases": self.phases,
        }


def build_evaluator(config: ExperimentConfig):
    """The inner evaluator plus the clock matching its determinism."""
    spec = config.evaluator
    kind = spec.get("type", "synthetic")
    if kind == "synthetic":
        landscape = SyntheticLandscape(
            seed=spec.get("seed", derive_seed(config.seed, "landscape")),
            base_time=spec.get("base_time", 1.0),
            failure_rate=spec.get("failure_rate", 0.10),
        )
        return landscape, SimulatedClock()
    job = ExternalJobSpec(
        source_template=spec["source_template"],
        compile_cmd=spec["compile_cmd"],
        run_cmd=spec["run_cmd"],
        repetitions=int(spec.get("repetitions", 5)),
        timeout_s=float(spec.get("timeout_s", 300.0)),
        reject_pattern=spec.get("reject_pattern"),
    )
    return functools.partial(evaluate_external, job=job), MonotonicClock()


def run_experiment(config: ExperimentConfig) -> ExperimentSummary:
    """Run one method on one nest and return (and optionally persist) results."""
    nest = load_loop_nest(config.nest_text)
    evaluator, clock = build_evaluator(config)
    session = SearchSession(
        CachedEvaluator(evaluator), config.budget, clock, method=config.method
    )
    logger.info("run: method=%s seed=%d", config.method, config.seed)
    if config.method == "mcts":
        best, history = mcts.search(
            session,
            config.mcts_params(),
            nest,
            rng_walks=random.Random(derive_seed(config.seed, "walks")),
            rng_expand=random.Random(derive_seed(config.seed, "expand")),
        )
    elif config.method == "rs":
        best, history = baselines.random_search(
            session, nest, config.space, random.Random(derive_seed(config.seed, "search"))
        )
    elif config.method == "bf":
        best, history = baselines.breadth_first(session, nest, config.space)
    else:
        best, history = baselines.global_greedy(session, nest, config.space)

    best_record = next(r for r in session.records if r.iteration == best.iteration)
    summary = ExperimentSummary(
        method=config.method,
        seed=config.seed,
        best_key=best.key,
        best_h=best.h,
        best_depth=best.config.depth,
        best_pragmas=best_record.pragmas,
        unique_evaluations=session.unique_evaluations,
        wall_clock_s=session.clock.elapsed(),
        phases=len({r.phase for r in history}),
        records=session.records,
        history=history,
    )
    if config.out_dir is not None:
        out = Path(config.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_log(session.records, out / "log.jsonl")
        (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
        logger.info("wrote %s and %s", out / "log.jsonl", out / "summary.json")
    return summary
