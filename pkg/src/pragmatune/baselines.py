"""Baseline searchers: random sampling, breadth-first, global greedy.

All three share the session's budget accounting and evaluation cache
with the tree search, measure the root first, and return the best
record plus the history.
"""

from __future__ import annotations

import random
from collections import deque
from heapq import heappop, heappush

from .loops import LoopNest
from .reward import EvalRecord
from .session import SearchSession
from .space import SpaceParams, child, child_count, random_walk, root_node


def random_search(
    session: SearchSession,
    nest: LoopNest,
    params: SpaceParams,
    rng: random.Random,
) -> tuple[EvalRecord, list[EvalRecord]]:
    """Uniform random walks of uniform random depth, deduped by the cache.

    A finite space saturates the cache without consuming budget, so runs
    on small spaces should bound Budget.max_iterations.
    """
    session.evaluate_root()
    start = root_node(nest)
    while not session.out_of_budget():
        session.count_iteration()
        node = random_walk(start, rng.randint(1, params.d_max), rng, params)
        measured = session.measure(node.config, phase=0)
        if measured is None:
            break
        if measured.record is not None:
            session.log(measured.record, None)
    return session.best, session.history


def breadth_first(
    session: SearchSession,
    nest: LoopNest,
    params: SpaceParams,
) -> tuple[EvalRecord, list[EvalRecord]]:
    """Level-by-level sweep in child-index order.

    Children of failed configurations are still visited; the tree offers
    no guarantee that a failing prefix makes every extension fail.
    """
    session.evaluate_root()
    queue = deque([root_node(nest)])
    while queue and not session.out_of_budget():
        node = queue.popleft()
        for index in range(child_count(node, params)):
            if session.out_of_budget():
                return session.best, session.history
            session.count_iteration()
            successor = child(node, index, params)
            measured = session.measure(successor.config, phase=0)
            if measured is None:
                return session.best, session.history
            if measured.record is not None:
                session.log(measured.record, None)
            queue.append(successor)
    return session.best, session.history


def global_greedy(
    session: SearchSession,
    nest: LoopNest,
    params: SpaceParams,
) -> tuple[EvalRecord, list[EvalRecord]]:
    """Expand the best measured configuration anywhere in the tree.

    Pops the highest-h node (ties to insertion order), measures all its
    children, and pushes the successful ones; failures are never pushed,
    so their subtrees are abandoned.
    """
    root_record = session.evaluate_root()
    counter = 0
    heap: list[tuple[float, int, object]] = [(-root_record.h, counter, root_node(nest))]
    while heap and not session.out_of_budget():
        _, _, node = heappop(heap)
        for index in range(child_count(node, params)):
            if session.out_of_budget():
                return session.best, session.history
            session.count_iteration()
            successor = child(node, index, params)
            measured = session.measure(successor.config, phase=0)
            if measured is None:
                return session.best, session.history
            if measured.record is not None:
                session.log(measured.record, None)
            if measured.h is not None:
                counter += 1
                heappush(heap, (-measured.h, counter, successor))
    return session.best, session.history
