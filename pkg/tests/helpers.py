"""Shared test utilities: independent enumeration oracle and generators.

The oracle rebuilds a node's ordered child list from scratch (its own
chain detection, cross products over parameters, validity proven by
applying every candidate) so the sparse index arithmetic in
pragmatune.space is checked against something that cannot share its
bugs.
"""

from __future__ import annotations

import random
from itertools import permutations

from pragmatune.loops import (
    Interchange,
    Loop,
    LoopNest,
    Pack,
    ParallelizeThread,
    Reverse,
    Tile,
    Unroll,
    apply,
)
from pragmatune.space import SpaceParams


def oracle_children(nest: LoopNest, params: SpaceParams):
    """Ordered child transformations, built exhaustively.

    Kind order: tile, interchange, parallelize, unroll, reverse, pack.
    Within a kind: loop-id order, then parameter-list order. Every
    candidate is applied once to prove it is legal.
    """
    parents: dict[str, Loop | None] = {}

    def note_parents(loop: Loop, parent: Loop | None) -> None:
        parents[loop.id] = parent
        for child in loop.children:
            note_parents(child, loop)

    for root in nest.roots:
        note_parents(root, None)

    loops = sorted((l for l in nest.walk() if l.transformable), key=lambda l: l.id)

    heads = []
    for loop in loops:
        parent = parents[loop.id]
        if parent is None or not parent.transformable or len(parent.children) != 1:
            heads.append(loop)

    def chain_length(head: Loop) -> int:
        length, cursor = 1, head
        while len(cursor.children) == 1 and cursor.children[0].transformable:
            cursor = cursor.children[0]
            length += 1
        return length

    out = []
    for head in heads:
        for size in params.tile_sizes:
            for peel in params.peel_variants:
                out.append(Tile(head.id, size, peel))
    for head in heads:
        k = chain_length(head)
        if k < 2:
            continue
        if k <= params.max_permutation_depth:
            perms = [p for p in permutations(range(k)) if p != tuple(range(k))]
        else:
            perms = []
            for j in range(k - 1):
                perm = list(range(k))
                perm[j], perm[j + 1] = perm[j + 1], perm[j]
                perms.append(tuple(perm))
        out.extend(Interchange(head.id, p) for p in perms)
    for loop in loops:
        out.append(ParallelizeThread(loop.id))
    for loop in loops:
        if loop.unrollable:
            out.append(Unroll(loop.id, None))
            out.extend(Unroll(loop.id, f) for f in params.unroll_factors)
    for loop in loops:
        if loop.reversible:
            out.append(Reverse(loop.id))
    for loop in loops:
        for array in nest.arrays:
            if array not in loop.packed:
                out.append(Pack(loop.id, array))

    for candidate in out:
        apply(nest, candidate)
    return out


def random_nest(rng: random.Random, max_loops: int = 4, max_arrays: int = 2) -> LoopNest:
    """A random small forest with occasional frozen loops."""
    count = rng.randint(1, max_loops)
    labels = list("abcdefgh")[:count]
    children: dict[str, list[str]] = {label: [] for label in labels}
    roots = [labels[0]]
    for index, label in enumerate(labels[1:], start=1):
        if rng.random() < 0.25:
            roots.append(label)
        else:
            children[rng.choice(labels[:index])].append(label)

    def build(label: str) -> Loop:
        return Loop(
            id=label,
            children=tuple(build(c) for c in children[label]),
            transformable=rng.random() > 0.15,
        )

    arrays = tuple(f"A{k}" for k in range(rng.randint(0, max_arrays)))
    return LoopNest(tuple(build(r) for r in roots), arrays)


def random_params(rng: random.Random, d_max: int = 5) -> SpaceParams:
    """Small parameter sets keeping fan-outs test-sized."""
    sizes = tuple(rng.sample([2, 3, 4, 8, 16, 32, 64, 128], rng.randint(1, 2)))
    factors = tuple(rng.sample([2, 4, 8], rng.randint(0, 2)))
    peel = ((False,), (True,), (False, True))[rng.randrange(3)]
    return SpaceParams(
        tile_sizes=sizes, unroll_factors=factors, peel_variants=peel, d_max=d_max
    )


def chain_nest(depth: int, arrays: tuple[str, ...] = ()) -> LoopNest:
    """A perfect chain i0 -> i1 -> ... of the given depth."""
    loop = None
    for index in reversed(range(depth)):
        loop = Loop(id=f"i{index}", children=(loop,) if loop else ())
    return LoopNest((loop,), arrays)
