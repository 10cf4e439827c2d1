"""Evaluators: measure a configuration and report an outcome.

Two implementations share one contract (a callable from Configuration
to Outcome): an external compile-and-run pipeline, and a deterministic
synthetic landscape for experiments without a toolchain. ``CachedEvaluator``
wraps either and memoizes by configuration key, failures included.
"""

from __future__ import annotations

import hashlib
import re
import shlex
import statistics
import subprocess
import tempfile
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable

from .loops import Configuration, Pack, Tile, pragma_identity
from .rendering import render_pragmas


@dataclass(frozen=True)
class Time:
    """A successful measurement, in seconds."""

    seconds: float
    ok = True


@dataclass(frozen=True)
class CompileFailure:
    reason: str = ""
    ok = False


@dataclass(frozen=True)
class RunFailure:
    reason: str = ""
    ok = False


Outcome = Time | CompileFailure | RunFailure

Evaluator = Callable[[Configuration], Outcome]

# Last float-looking token of a line of program output.
_FLOAT_TOKEN = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


@dataclass(frozen=True)
class ExternalJobSpec:
    """How to build and time one variant.

    ``source_template`` is the annotated template text (anchors of the
    form ``/*@loop:<id>*/``). ``compile_cmd`` takes ``{src}`` and
    ``{out}`` placeholders; ``run_cmd`` takes ``{out}``. A compile whose
    output matches ``reject_pattern`` counts as a compile failure even
    on exit 0 (Polly reports transformations it cannot prove safe that
    way rather than failing the build).
    """

    source_template: str
    compile_cmd: str
    run_cmd: str
    repetitions: int = 5
    timeout_s: float = 300.0
    reject_pattern: str | None = None


def _run(cmd: str, timeout_s: float) -> subprocess.CompletedProcess:
    return subprocess.run(
        shlex.split(cmd),
        capture_output=True,
        text=True,
        timeout=timeout_s,
    )


def evaluate_external(config: Configuration, job: ExternalJobSpec) -> Outcome:
    """Render, compile, run ``repetitions`` times, take the median time.

    Each run must print a time; the last float token on its stdout is
    used. Nonzero exits map to CompileFailure/RunFailure, timeouts and
    unparsable output to RunFailure.
    """
    source = render_pragmas(config, job.source_template)
    with tempfile.TemporaryDirectory(prefix="pragmatune-") as tmp:
        src = Path(tmp) / "variant.c"
        out = Path(tmp) / "variant.bin"
        src.write_text(source)
        try:
            built = _run(job.compile_cmd.format(src=src, out=out), job.timeout_s)
        except subprocess.TimeoutExpired:
            return CompileFailure("compile timeout")
        log = built.stdout + built.stderr
        if built.returncode != 0:
            return CompileFailure(log.strip()[-200:])
        if job.reject_pattern and re.search(job.reject_pattern, log):
            return CompileFailure(f"rejected: {job.reject_pattern}")
        times = []
        for _ in range(job.repetitions):
            try:
                ran = _run(job.run_cmd.format(out=out, src=src), job.timeout_s)
            except subprocess.TimeoutExpired:
                return RunFailure("run timeout")
            if ran.returncode != 0:
                return RunFailure(ran.stderr.strip()[-200:])
            tokens = _FLOAT_TOKEN.findall(ran.stdout)
            if not tokens:
                return RunFailure("no time on stdout")
            seconds = float(tokens[-1])
            if seconds <= 0:
                return RunFailure(f"non-positive time {seconds}")
            times.append(seconds)
        return Time(statistics.median(times))


class SyntheticLandscape:
    """Deterministic stand-in for compile-and-measure.

    A configuration's time is ``base_time`` times a per-step multiplier
    for every step and a pairwise interaction factor for every step
    pair, both keyed by the step's kind and parameters (loop ids
    ignored) and derived from ``seed`` by hashing, so an outcome is a
    pure function of (seed, configuration key). Explicit ``multipliers``
    and ``interactions`` override the hashed tables.

    Failures: a configuration packing after a tile of size >=
    ``pack_conflict_size`` fails to compile, as does a seeded
    ``failure_rate`` share of all non-root configurations. The root
    always succeeds. Default factor ranges straddle 1.0, so landscapes
    contain configurations both faster and slower than the baseline.
    """

    def __init__(
        self,
        seed: int,
        base_time: float = 1.0,
        failure_rate: float = 0.10,
        multipliers: dict[tuple, float] | None = None,
        interactions: dict[frozenset, float] | None = None,
        multiplier_range: tuple[float, float] = (0.5, 1.5),
        interaction_range: tuple[float, float] = (0.9, 1.1),
        pack_conflict_size: int | None = 128,
    ):
        if base_time <= 0:
            raise ValueError("base_time must be positive")
        if not 0.0 <= failure_rate < 1.0:
            raise ValueError("failure_rate must be in [0, 1)")
        self.seed = seed
        self.base_time = base_time
        self.failure_rate = failure_rate
        self.multiplier_range = multiplier_range
        self.interaction_range = interaction_range
        self.pack_conflict_size = pack_conflict_size
        self._multipliers = dict(multipliers or {})
        self._interactions = {frozenset(k): v for k, v in (interactions or {}).items()}

    def _unit(self, *parts: object) -> float:
        digest = hashlib.sha256(f"{self.seed}|{parts!r}".encode()).digest()
        return int.from_bytes(digest[:8], "big") / 2**64

    def _multiplier(self, identity: tuple) -> float:
        if identity in self._multipliers:
            return self._multipliers[identity]
        lo, hi = self.multiplier_range
        return lo + self._unit("mul", identity) * (hi - lo)

    def _interaction(self, a: tuple, b: tuple) -> float:
        pair = frozenset((a, b))
        if pair in self._interactions:
            return self._interactions[pair]
        lo, hi = self.interaction_range
        return lo + self._unit("pair", tuple(sorted((a, b), key=repr))) * (hi - lo)

    def _fails(self, config: Configuration) -> str | None:
        if not config.steps:
            return None
        if self.pack_conflict_size is not None:
            tiled_big = False
            for step in config.steps:
                if isinstance(step, Tile) and step.size >= self.pack_conflict_size:
                    tiled_big = True
                elif isinstance(step, Pack) and tiled_big:
                    return (
                        f"pack after tile size >= {self.pack_conflict_size}"
                    )
        if self._unit("fail", config.key) < self.failure_rate:
            return "rejected by seeded failure rule"
        return None

    def evaluate(self, config: Configuration) -> Outcome:
        reason = self._fails(config)
        if reason is not None:
            return CompileFailure(reason)
        identities = [pragma_identity(s) for s in config.steps]
        seconds = self.base_time
        for identity in identities:
            seconds *= self._multiplier(identity)
        for a, b in combinations(identities, 2):
            seconds *= self._interaction(a, b)
        return Time(seconds)

    __call__ = evaluate


class CachedEvaluator:
    """Memoize an evaluator by configuration key; failures cache too.

    ``unique_count`` is the number of distinct configurations measured,
    ``calls`` the number of times the inner evaluator actually ran
    (equal by construction, kept separate so tests can prove it).
    """

    def __init__(self, inner: Evaluator):
        self._inner = inner
        self._outcomes: dict[str, Outcome] = {}
        self.calls = 0

    @property
    def unique_count(self) -> int:
        return len(self._outcomes)

    def seen(self, config: Configuration) -> bool:
        return config.key in self._outcomes

    def evaluate(self, config: Configuration) -> Outcome:
        key = config.key
        if key not in self._outcomes:
            self.calls += 1
            self._outcomes[key] = self._inner(config)
        return self._outcomes[key]

    __call__ = evaluate
