"""Monte Carlo tree search over the transformation space.

The driver runs in phases: build a fresh tree, replay the lessons of
the accumulated history onto it (upper-tail paths reinforced, penalized
lower-tail paths discouraged, no evaluations spent), learn a target
depth from random walks, then iterate UCT selection at that depth until
the phase converges or exhausts its per-phase evaluation budget. The
history survives restarts; the tree does not.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, field

from . import space
from .loops import Configuration, LoopNest
from .reward import (
    EvalRecord,
    RewardParams,
    TargetState,
    penalty_filter,
    quantile_split,
    reward,
)
from .session import SearchSession
from .space import SpaceParams

# A phase whose iterations all hit the cache trips neither convergence
# counter, so cap total iterations per phase at a multiple of its
# evaluation budget.
_PHASE_ITERATION_CAP_FACTOR = 20


@dataclass(frozen=True)
class MctsParams:
    """Search knobs; ``c`` weighs exploration in the UCT score."""

    c: float = 0.1
    per_run_budget: int = 300
    n_walks: int = 10
    no_improve_limit: int = 50
    same_config_limit: int = 10
    reward: RewardParams = field(default_factory=RewardParams)
    space: SpaceParams = field(default_factory=SpaceParams)
    check_invariants: bool = False

    def __post_init__(self) -> None:
        if self.c < 0:
            raise ValueError("c must be >= 0")
        if min(self.per_run_budget, self.n_walks) < 1:
            raise ValueError("per_run_budget and n_walks must be >= 1")
        if min(self.no_improve_limit, self.same_config_limit) < 1:
            raise ValueError("convergence limits must be >= 1")


class SearchNode:
    """One tree node: a space node plus visit statistics.

    ``terminal_count`` counts backpropagated paths that ended here, so
    for every node visits == sum(child visits) + terminal_count.
    """

    __slots__ = ("space", "n_children", "visits", "total_reward", "terminal_count", "children")

    def __init__(self, space_node: space.SpaceNode, n_children: int):
        self.space = space_node
        self.n_children = n_children
        self.visits = 0
        self.total_reward = 0.0
        self.terminal_count = 0
        self.children: dict[int, SearchNode] = {}

    @property
    def mean_reward(self) -> float:
        return self.total_reward / self.visits if self.visits else 0.0


def make_root(nest: LoopNest, params: MctsParams) -> SearchNode:
    node = space.root_node(nest)
    return SearchNode(node, space.child_count(node, params.space))


def uct_score(child: SearchNode, parent_visits: int, c: float) -> float:
    """Mean reward plus the exploration term; unvisited children win outright."""
    if child.visits == 0:
        return math.inf
    return child.mean_reward + 2 * c * math.sqrt(
        2 * math.log(parent_visits) / child.visits
    )


def select(root: SearchNode, target_depth: int, c: float) -> list[SearchNode]:
    """Descend by best UCT score (ties to the lowest child index).

    Stops at the target depth, at the first node with an unexpanded
    child, or at a dead end.
    """
    path = [root]
    node = root
    while node.space.depth < target_depth:
        if node.n_children == 0 or len(node.children) < node.n_children:
            break
        best_idx = -1
        best = -math.inf
        for idx in sorted(node.children):
            score = uct_score(node.children[idx], max(node.visits, 1), c)
            if score > best:
                best, best_idx = score, idx
        node = node.children[best_idx]
        path.append(node)
    return path


def _get_or_create(node: SearchNode, index: int, params: MctsParams) -> SearchNode:
    child = node.children.get(index)
    if child is None:
        snode = space.child(node.space, index, params.space)
        child = SearchNode(snode, space.child_count(snode, params.space))
        node.children[index] = child
    return child


def expand(leaf: SearchNode, rng: random.Random, params: MctsParams) -> SearchNode:
    """Materialize one unexpanded child, chosen uniformly at random."""
    unexpanded = [i for i in range(leaf.n_children) if i not in leaf.children]
    if not unexpanded:
        raise ValueError("node has no unexpanded children")
    return _get_or_create(leaf, unexpanded[rng.randrange(len(unexpanded))], params)


def backpropagate(path: list[SearchNode], value: float) -> None:
    for node in path:
        node.visits += 1
        node.total_reward += value


def assert_consistent(node: SearchNode) -> None:
    """Debug check of the visit-count identity over a whole subtree."""
    child_visits = sum(c.visits for c in node.children.values())
    if node.visits != child_visits + node.terminal_count:
        raise AssertionError(
            f"node {node.space.key!r}: visits {node.visits} != "
            f"children {child_visits} + terminals {node.terminal_count}"
        )
    for child in node.children.values():
        assert_consistent(child)


class IterationLog:
    """Per-phase convergence bookkeeping.

    The no-improvement run counts evaluator-producing iterations only;
    the same-configuration window advances on every iteration, cache
    hits included.
    """

    def __init__(self, no_improve_limit: int, same_config_limit: int):
        self.no_improve_limit = no_improve_limit
        self.no_improve_run = 0
        self.recent_keys: deque[str] = deque(maxlen=same_config_limit)

    def note(self, key: str, improved: bool, fresh: bool = True) -> None:
        self.recent_keys.append(key)
        if fresh:
            self.no_improve_run = 0 if improved else self.no_improve_run + 1


def detect_convergence(log: IterationLog) -> bool:
    """True once best-h stalls for the limit or terminals stop moving."""
    if log.no_improve_run >= log.no_improve_limit:
        return True
    keys = log.recent_keys
    return len(keys) == keys.maxlen and len(set(keys)) == 1


@dataclass(frozen=True)
class WalkResult:
    config: Configuration
    h: float | None
    achieved_depth: int


def learn_depth(
    tree: SearchNode,
    session: SearchSession,
    params: MctsParams,
    target: TargetState,
    rng: random.Random,
    phase: int,
) -> tuple[int, list[WalkResult]]:
    """Sample random walks of uniform random depth and pick the best one's.

    Every walk's reward backpropagates along its path. Returns the
    achieved depth of the best-performing walk (ties to the earlier
    walk; 1 when every walk failed) plus the per-walk results.
    """
    results: list[WalkResult] = []
    best_h: float | None = None
    d_star = 1
    for _ in range(params.n_walks):
        if session.out_of_budget():
            break
        session.count_iteration()
        depth = rng.randint(1, params.space.d_max)
        path = [tree]
        node = tree
        for _ in range(depth):
            if node.n_children == 0:
                break
            node = _get_or_create(node, rng.randrange(node.n_children), params)
            path.append(node)
        measured = session.measure(node.space.config, phase)
        if measured is None:
            break
        if measured.h is not None:
            target.update(measured.h)
        value = reward(measured.outcome, measured.h, target.f, params.reward)
        backpropagate(path, value)
        node.terminal_count += 1
        if measured.record is not None:
            session.log(measured.record, target.f)
        achieved = node.space.depth
        results.append(WalkResult(node.space.config, measured.h, achieved))
        if measured.h is not None and (best_h is None or measured.h > best_h):
            best_h = measured.h
            d_star = max(1, achieved)
    return d_star, results


def _reinforce(tree: SearchNode, config: Configuration, value: float, params: MctsParams) -> None:
    path = [tree]
    node = tree
    for step in config.steps:
        index = space.child_index(node.space, step, params.space)
        node = _get_or_create(node, index, params)
        path.append(node)
    backpropagate(path, value)
    node.terminal_count += 1


def apply_transfer(tree: SearchNode, history: list[EvalRecord], params: MctsParams) -> None:
    """Replay history quantiles onto a fresh tree without evaluating.

    Upper-tail records get +1 along their re-created paths; lower-tail
    records surviving the penalty filter get r_penalty.
    """
    if not any(r.h is not None for r in history):
        return
    lower, upper = quantile_split(history, params.reward.alpha)
    for record in upper:
        _reinforce(tree, record.config, 1.0, params)
    for record in penalty_filter(lower, upper):
        _reinforce(tree, record.config, params.reward.r_penalty, params)


def search(
    session: SearchSession,
    params: MctsParams,
    nest: LoopNest,
    rng_walks: random.Random,
    rng_expand: random.Random,
) -> tuple[EvalRecord, list[EvalRecord]]:
    """Run the full phased search until the global budget is spent.

    Returns the best record and the complete evaluation history. The
    root is measured first; its failure is fatal.
    """
    root_record = session.evaluate_root(f=1.0)
    target = TargetState(params.reward)
    target.update(root_record.h)
    phase = 0
    while not session.out_of_budget():
        tree = make_root(nest, params)
        if tree.n_children == 0:
            break
        apply_transfer(tree, session.history, params)
        evals_before = len(session.history)
        d_star, _ = learn_depth(tree, session, params, target, rng_walks, phase)
        phase_evals = len(session.history) - evals_before
        log = IterationLog(params.no_improve_limit, params.same_config_limit)
        iteration_cap = params.per_run_budget * _PHASE_ITERATION_CAP_FACTOR
        phase_iterations = 0
        while (
            phase_evals < params.per_run_budget
            and phase_iterations < iteration_cap
            and not session.out_of_budget()
            and not detect_convergence(log)
        ):
            session.count_iteration()
            phase_iterations += 1
            path = select(tree, d_star, params.c)
            leaf = path[-1]
            if leaf.space.depth < d_star and len(leaf.children) < leaf.n_children and leaf.n_children > 0:
                path.append(expand(leaf, rng_expand, params))
            node = path[-1]
            while node.space.depth < d_star and node.n_children > 0:
                node = _get_or_create(node, rng_walks.randrange(node.n_children), params)
                path.append(node)
            best_before = session.best.h
            measured = session.measure(node.space.config, phase)
            if measured is None:
                break
            if measured.fresh:
                phase_evals += 1
            if measured.h is not None:
                target.update(measured.h)
            value = reward(measured.outcome, measured.h, target.f, params.reward)
            backpropagate(path, value)
            node.terminal_count += 1
            if measured.record is not None:
                session.log(measured.record, target.f)
            improved = measured.fresh and measured.h is not None and session.best.h > best_before
            log.note(node.space.key, improved, measured.fresh)
            if params.check_invariants:
                assert_consistent(tree)
        phase += 1
    return session.best, session.history
