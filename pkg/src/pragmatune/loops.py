"""Loop-nest model: loops, transformations, and configurations.

A nest is an immutable tree of loops plus the array names available for
packing. Loop bodies are not modeled; a nest records only the nesting
structure, per-loop transformability flags, and the origin of loops
created by tiling. Applying a transformation returns a new nest and
never mutates its input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from functools import reduce
from typing import Iterator, Union

from .errors import DuplicateLoopIdError, InvalidTargetError, NestParseError

# Joins a parent loop id with the "f"/"t" suffix of loops created by
# tiling, so document ids may not contain it.
ID_SEP = "."


@dataclass(frozen=True)
class Loop:
    """One loop in a nest.

    ``transformable`` gates every transformation and is cleared for a
    whole subtree by thread parallelization. ``unrollable`` and
    ``reversible`` are consumed by partial unrolling and by reversal.
    ``packed`` holds array names already packed at this loop. ``origin``
    tags loops created by tiling ("floor" or "tile").
    """

    id: str
    children: tuple[Loop, ...] = ()
    transformable: bool = True
    unrollable: bool = True
    reversible: bool = True
    packed: frozenset[str] = frozenset()
    origin: str | None = None

    def walk(self) -> Iterator[Loop]:
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class LoopNest:
    """A forest of loops and the arrays that Pack may copy."""

    roots: tuple[Loop, ...]
    arrays: tuple[str, ...] = ()

    def walk(self) -> Iterator[Loop]:
        for root in self.roots:
            yield from root.walk()

    def find(self, loop_id: str) -> Loop:
        for loop in self.walk():
            if loop.id == loop_id:
                return loop
        raise InvalidTargetError(f"no loop with id {loop_id!r} in nest")


@dataclass(frozen=True)
class Tile:
    """Tile the perfect nest headed by ``nest_top`` with one square size."""

    nest_top: str
    size: int
    peel: bool = False


@dataclass(frozen=True)
class Interchange:
    """Reorder the perfect nest headed by ``nest_top`` by a permutation."""

    nest_top: str
    permutation: tuple[int, ...]


@dataclass(frozen=True)
class ParallelizeThread:
    loop: str


@dataclass(frozen=True)
class Unroll:
    """Unroll a loop; ``factor`` None means full unrolling."""

    loop: str
    factor: int | None = None


@dataclass(frozen=True)
class Reverse:
    loop: str


@dataclass(frozen=True)
class Pack:
    loop: str
    array: str


Transformation = Union[Tile, Interchange, ParallelizeThread, Unroll, Reverse, Pack]


def target_loop(step: Transformation) -> str:
    """The loop id a transformation acts on (the chain head for Tile/Interchange)."""
    if isinstance(step, (Tile, Interchange)):
        return step.nest_top
    if isinstance(step, Pack):
        return step.loop
    return step.loop


def step_key(step: Transformation) -> str:
    """Injective text form of one transformation, used in configuration keys."""
    match step:
        case Tile(top, size, peel):
            return f"tile({top};{size};{'peel' if peel else 'nopeel'})"
        case Interchange(top, perm):
            return f"interchange({top};{','.join(map(str, perm))})"
        case ParallelizeThread(loop):
            return f"parallelize({loop})"
        case Unroll(loop, None):
            return f"unroll({loop};full)"
        case Unroll(loop, factor):
            return f"unroll({loop};{factor})"
        case Reverse(loop):
            return f"reverse({loop})"
        case Pack(loop, array):
            return f"pack({loop};{array})"
    raise TypeError(f"not a transformation: {step!r}")


def pragma_identity(step: Transformation) -> tuple:
    """Kind and parameters of a step, ignoring loop ids.

    Loop ids differ across branches of the search tree, so history
    comparisons (penalty filtering, the synthetic landscape's tables)
    key on this identity instead.
    """
    match step:
        case Tile(_, size, peel):
            return ("tile", size, peel)
        case Interchange(_, perm):
            return ("interchange", perm)
        case ParallelizeThread(_):
            return ("parallelize",)
        case Unroll(_, factor):
            return ("unroll", factor)
        case Reverse(_):
            return ("reverse",)
        case Pack(_, array):
            return ("pack", array)
    raise TypeError(f"not a transformation: {step!r}")


@dataclass(frozen=True)
class Configuration:
    """An ordered transformation sequence; the empty sequence is the root."""

    steps: tuple[Transformation, ...] = ()

    @property
    def key(self) -> str:
        return "|".join(step_key(s) for s in self.steps)

    @property
    def depth(self) -> int:
        return len(self.steps)

    def extended(self, step: Transformation) -> Configuration:
        return Configuration(self.steps + (step,))


def anchor_id(loop_id: str) -> str:
    """Template loop a (possibly tiled) loop id descends from."""
    return loop_id.split(ID_SEP, 1)[0]


def is_floor_lineage(loop_id: str) -> bool:
    """True for a template loop or a loop reached from one by floor loops only."""
    return all(part == "f" for part in loop_id.split(ID_SEP)[1:])


def load_loop_nest(text: str) -> LoopNest:
    """Parse a nest description document (JSON with ``loops`` and ``arrays``).

    Each loop entry holds ``id``, optional ``children`` (nested entries),
    and an optional ``transformable`` flag (default true). Ids must be
    unique, non-empty, and free of ".".
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NestParseError(f"invalid nest document: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("loops"), list):
        raise NestParseError("nest document must be an object with a 'loops' list")
    seen: set[str] = set()

    def build(entry: object) -> Loop:
        if not isinstance(entry, dict) or not isinstance(entry.get("id"), str):
            raise NestParseError(f"loop entry must be an object with an 'id': {entry!r}")
        loop_id = entry["id"]
        if not loop_id or ID_SEP in loop_id:
            raise NestParseError(f"loop id must be non-empty and contain no '.': {loop_id!r}")
        if loop_id in seen:
            raise DuplicateLoopIdError(f"duplicate loop id {loop_id!r}")
        seen.add(loop_id)
        children = entry.get("children", [])
        if not isinstance(children, list):
            raise NestParseError(f"'children' of {loop_id!r} must be a list")
        return Loop(
            id=loop_id,
            children=tuple(build(c) for c in children),
            transformable=bool(entry.get("transformable", True)),
        )

    roots = tuple(build(e) for e in doc["loops"])
    arrays = doc.get("arrays", [])
    if not isinstance(arrays, list) or not all(isinstance(a, str) and a for a in arrays):
        raise NestParseError("'arrays' must be a list of non-empty strings")
    if len(set(arrays)) != len(arrays):
        raise NestParseError("'arrays' must not repeat names")
    return LoopNest(roots=roots, arrays=tuple(arrays))


def _chains(nest: LoopNest) -> list[list[Loop]]:
    """Maximal perfect chains of transformable loops, in preorder."""
    heads: list[Loop] = []

    def visit(loop: Loop, parent: Loop | None) -> None:
        continues = (
            loop.transformable
            and parent is not None
            and parent.transformable
            and len(parent.children) == 1
        )
        if loop.transformable and not continues:
            heads.append(loop)
        for child in loop.children:
            visit(child, loop)

    for root in nest.roots:
        visit(root, None)

    chains = []
    for head in heads:
        chain = [head]
        while len(chain[-1].children) == 1 and chain[-1].children[0].transformable:
            chain.append(chain[-1].children[0])
        chains.append(chain)
    return chains


def perfect_nests(nest: LoopNest) -> list[list[str]]:
    """Loop-id chains of the maximal perfect nests of transformable loops.

    A fully frozen nest yields an empty list; a loop with two children
    ends its own chain and each child starts a new one.
    """
    return [[loop.id for loop in chain] for chain in _chains(nest)]


def _replace_subtree(roots, target_id, fn):
    """Rebuild the forest with ``fn(loop)`` substituted for the target loop.

    ``fn`` returns a tuple of replacement loops (possibly empty, for full
    unrolling of a leaf).
    """
    found = False

    def visit(loop: Loop) -> tuple[Loop, ...]:
        nonlocal found
        if loop.id == target_id:
            found = True
            return fn(loop)
        new_children: list[Loop] = []
        for child in loop.children:
            new_children.extend(visit(child))
        if tuple(new_children) == loop.children:
            return (loop,)
        return (replace(loop, children=tuple(new_children)),)

    out: list[Loop] = []
    for root in roots:
        out.extend(visit(root))
    if not found:
        raise InvalidTargetError(f"no loop with id {target_id!r} in nest")
    return tuple(out)


def _freeze(loop: Loop) -> Loop:
    return replace(
        loop,
        transformable=False,
        children=tuple(_freeze(c) for c in loop.children),
    )


def _chain_for(nest: LoopNest, head_id: str) -> list[Loop]:
    for chain in _chains(nest):
        if chain[0].id == head_id:
            return chain
    raise InvalidTargetError(
        f"loop {head_id!r} does not head a perfect nest of transformable loops"
    )


def apply(nest: LoopNest, step: Transformation) -> LoopNest:
    """Apply one transformation and return the resulting nest.

    Raises InvalidTargetError when the target is missing, frozen, or
    fails the kind-specific rules (chain headship, permutation shape,
    consumed unroll/reverse/pack eligibility).
    """
    target = nest.find(target_loop(step))
    if not target.transformable:
        raise InvalidTargetError(f"loop {target.id!r} is not transformable")

    if isinstance(step, Tile):
        if step.size < 1:
            raise InvalidTargetError(f"tile size must be positive, got {step.size}")
        chain = _chain_for(nest, step.nest_top)
        body = chain[-1].children
        inner = body
        for orig in reversed(chain):
            inner = (Loop(id=orig.id + ID_SEP + "t", children=inner, origin="tile"),)
        for orig in reversed(chain):
            inner = (Loop(id=orig.id + ID_SEP + "f", children=inner, origin="floor"),)
        roots = _replace_subtree(nest.roots, chain[0].id, lambda _: inner)
        return replace(nest, roots=roots)

    if isinstance(step, Interchange):
        chain = _chain_for(nest, step.nest_top)
        k = len(chain)
        perm = step.permutation
        if sorted(perm) != list(range(k)):
            raise InvalidTargetError(
                f"permutation {perm!r} does not fit a perfect nest of depth {k}"
            )
        if perm == tuple(range(k)):
            raise InvalidTargetError("identity permutation is not a transformation")
        body = chain[-1].children
        inner = body
        for pos in reversed(perm):
            inner = (replace(chain[pos], children=inner),)
        roots = _replace_subtree(nest.roots, chain[0].id, lambda _: inner)
        return replace(nest, roots=roots)

    if isinstance(step, ParallelizeThread):
        roots = _replace_subtree(nest.roots, target.id, lambda l: (_freeze(l),))
        return replace(nest, roots=roots)

    if isinstance(step, Unroll):
        if not target.unrollable:
            raise InvalidTargetError(f"loop {target.id!r} may not be unrolled again")
        if step.factor is None:
            roots = _replace_subtree(nest.roots, target.id, lambda l: l.children)
            return replace(nest, roots=roots)
        if step.factor < 2:
            raise InvalidTargetError(f"unroll factor must be >= 2, got {step.factor}")
        roots = _replace_subtree(
            nest.roots, target.id, lambda l: (replace(l, unrollable=False),)
        )
        return replace(nest, roots=roots)

    if isinstance(step, Reverse):
        if not target.reversible:
            raise InvalidTargetError(f"loop {target.id!r} may not be reversed again")
        roots = _replace_subtree(
            nest.roots, target.id, lambda l: (replace(l, reversible=False),)
        )
        return replace(nest, roots=roots)

    if isinstance(step, Pack):
        if step.array not in nest.arrays:
            raise InvalidTargetError(f"unknown array {step.array!r}")
        if step.array in target.packed:
            raise InvalidTargetError(
                f"array {step.array!r} is already packed at loop {target.id!r}"
            )
        roots = _replace_subtree(
            nest.roots,
            target.id,
            lambda l: (replace(l, packed=l.packed | {step.array}),),
        )
        return replace(nest, roots=roots)

    raise TypeError(f"not a transformation: {step!r}")


def apply_all(nest: LoopNest, config: Configuration) -> LoopNest:
    """Fold a whole configuration over a nest."""
    return reduce(apply, config.steps, nest)
