"""Sparse enumeration of the transformation search space.

A node is a configuration plus the nest it produces. Children are
indexed 0..child_count-1 in a fixed order so the tree never has to be
materialized: kinds are ordered tile < interchange < parallelize <
unroll < reverse < pack, and within a kind children follow loop-id
order, then parameter-list order (tile sizes outer, peel variants
inner; full unrolling before the partial factors).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import permutations

from .loops import (
    Configuration,
    Interchange,
    LoopNest,
    Pack,
    ParallelizeThread,
    Reverse,
    Tile,
    Transformation,
    Unroll,
    _chains,
    apply,
    step_key,
)


@dataclass(frozen=True)
class SpaceParams:
    """Knobs bounding the enumerated space.

    Chains deeper than ``max_permutation_depth`` enumerate only adjacent
    pair swaps instead of all permutations.
    """

    tile_sizes: tuple[int, ...] = (2, 3, 4, 5, 8, 16, 32, 64, 128, 256)
    unroll_factors: tuple[int, ...] = (2, 4, 8)
    peel_variants: tuple[bool, ...] = (False, True)
    d_max: int = 5
    max_permutation_depth: int = 4

    def __post_init__(self) -> None:
        if self.d_max < 1:
            raise ValueError("d_max must be >= 1")
        if any(s < 1 for s in self.tile_sizes):
            raise ValueError("tile sizes must be positive")
        if any(f < 2 for f in self.unroll_factors):
            raise ValueError("unroll factors must be >= 2")
        if not self.peel_variants or len(set(self.peel_variants)) != len(self.peel_variants):
            raise ValueError("peel_variants must be a non-empty set of booleans")
        if self.max_permutation_depth < 2:
            raise ValueError("max_permutation_depth must be >= 2")


@dataclass(frozen=True)
class SpaceNode:
    """A configuration and the nest it yields when applied to the root nest."""

    config: Configuration
    nest: LoopNest

    @property
    def depth(self) -> int:
        return self.config.depth

    @property
    def key(self) -> str:
        return self.config.key


def root_node(nest: LoopNest) -> SpaceNode:
    return SpaceNode(Configuration(), nest)


def _chain_permutations(k: int, params: SpaceParams) -> list[tuple[int, ...]]:
    if k < 2:
        return []
    if k <= params.max_permutation_depth:
        # permutations() is lexicographic and the identity comes first
        return list(permutations(range(k)))[1:]
    swaps = []
    for j in range(k - 1):
        perm = list(range(k))
        perm[j], perm[j + 1] = perm[j + 1], perm[j]
        swaps.append(tuple(perm))
    return swaps


class _Census:
    """Per-nest loop bookkeeping behind the child-index arithmetic."""

    def __init__(self, nest: LoopNest, params: SpaceParams):
        chains = sorted(_chains(nest), key=lambda c: c[0].id)
        self.chain_heads = [c[0].id for c in chains]
        self.chain_perms = [_chain_permutations(len(c), params) for c in chains]
        loops = sorted(
            (l for l in nest.walk() if l.transformable), key=lambda l: l.id
        )
        self.parallelizable = [l.id for l in loops]
        self.unrollable = [l.id for l in loops if l.unrollable]
        self.reversible = [l.id for l in loops if l.reversible]
        self.packable = [
            (l.id, tuple(a for a in nest.arrays if a not in l.packed))
            for l in loops
        ]
        self.tile_block = len(params.tile_sizes) * len(params.peel_variants)
        self.unroll_block = 1 + len(params.unroll_factors)
        self.section_sizes = (
            len(self.chain_heads) * self.tile_block,
            sum(len(p) for p in self.chain_perms),
            len(self.parallelizable),
            len(self.unrollable) * self.unroll_block,
            len(self.reversible),
            sum(len(arrays) for _, arrays in self.packable),
        )
        self.total = sum(self.section_sizes)


def child_count(node: SpaceNode, params: SpaceParams) -> int:
    """Number of children, computed arithmetically from the nest."""
    return _Census(node.nest, params).total


def child_transformation(node: SpaceNode, index: int, params: SpaceParams) -> Transformation:
    """The transformation behind child ``index`` without applying it."""
    census = _Census(node.nest, params)
    if not 0 <= index < census.total:
        raise IndexError(f"child index {index} out of range 0..{census.total - 1}")
    offset = index
    sizes = census.section_sizes

    if offset < sizes[0]:
        head = census.chain_heads[offset // census.tile_block]
        rest = offset % census.tile_block
        size = params.tile_sizes[rest // len(params.peel_variants)]
        peel = params.peel_variants[rest % len(params.peel_variants)]
        return Tile(head, size, peel)
    offset -= sizes[0]

    if offset < sizes[1]:
        for head, perms in zip(census.chain_heads, census.chain_perms):
            if offset < len(perms):
                return Interchange(head, perms[offset])
            offset -= len(perms)
    offset -= sizes[1]

    if offset < sizes[2]:
        return ParallelizeThread(census.parallelizable[offset])
    offset -= sizes[2]

    if offset < sizes[3]:
        loop = census.unrollable[offset // census.unroll_block]
        rest = offset % census.unroll_block
        factor = None if rest == 0 else params.unroll_factors[rest - 1]
        return Unroll(loop, factor)
    offset -= sizes[3]

    if offset < sizes[4]:
        return Reverse(census.reversible[offset])
    offset -= sizes[4]

    for loop, arrays in census.packable:
        if offset < len(arrays):
            return Pack(loop, arrays[offset])
        offset -= len(arrays)
    raise AssertionError("unreachable: index inside total but not in any section")


def child(node: SpaceNode, index: int, params: SpaceParams) -> SpaceNode:
    """Materialize child ``index``: extend the configuration, apply the step."""
    step = child_transformation(node, index, params)
    return SpaceNode(node.config.extended(step), apply(node.nest, step))


def child_index(node: SpaceNode, step: Transformation, params: SpaceParams) -> int:
    """Inverse of child_transformation for steps this node enumerates."""
    census = _Census(node.nest, params)
    sizes = census.section_sizes
    base = 0
    try:
        if isinstance(step, Tile):
            pos = census.chain_heads.index(step.nest_top)
            return (
                pos * census.tile_block
                + params.tile_sizes.index(step.size) * len(params.peel_variants)
                + params.peel_variants.index(step.peel)
            )
        base += sizes[0]
        if isinstance(step, Interchange):
            offset = 0
            for head, perms in zip(census.chain_heads, census.chain_perms):
                if head == step.nest_top:
                    return base + offset + perms.index(step.permutation)
                offset += len(perms)
            raise ValueError
        base += sizes[1]
        if isinstance(step, ParallelizeThread):
            return base + census.parallelizable.index(step.loop)
        base += sizes[2]
        if isinstance(step, Unroll):
            pos = census.unrollable.index(step.loop)
            rest = 0 if step.factor is None else 1 + params.unroll_factors.index(step.factor)
            return base + pos * census.unroll_block + rest
        base += sizes[3]
        if isinstance(step, Reverse):
            return base + census.reversible.index(step.loop)
        base += sizes[4]
        if isinstance(step, Pack):
            offset = 0
            for loop, arrays in census.packable:
                if loop == step.loop:
                    return base + offset + arrays.index(step.array)
                offset += len(arrays)
        raise ValueError
    except ValueError:
        raise ValueError(
            f"{step_key(step)} is not a child of configuration {node.key!r}"
        ) from None


def random_walk(
    node: SpaceNode, depth: int, rng: random.Random, params: SpaceParams
) -> SpaceNode:
    """Descend ``depth`` uniform-random children, stopping early at dead ends."""
    for _ in range(depth):
        n = child_count(node, params)
        if n == 0:
            break
        node = child(node, rng.randrange(n), params)
    return node


def level_counts(
    node: SpaceNode, params: SpaceParams, max_depth: int
) -> list[tuple[int, int]]:
    """(depth, node count) pairs from ``node`` down, materializing each level.

    Level sizes grow fast; keep ``max_depth`` small.
    """
    out = [(0, 1)]
    level = [node]
    for depth in range(1, max_depth + 1):
        level = [
            child(parent, i, params)
            for parent in level
            for i in range(child_count(parent, params))
        ]
        out.append((depth, len(level)))
        if not level:
            break
    return out
