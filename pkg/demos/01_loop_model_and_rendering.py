"""
The loop model: transformations and pragma rendering
====================================================

A configuration is an ordered sequence of loop transformations. Each
step rewrites the abstract nest (so later steps can target the loops an
earlier step created) and contributes one pragma line to the annotated
C source.
"""

from pathlib import Path

from pragmatune import (
    Configuration,
    Interchange,
    Loop,
    LoopNest,
    ParallelizeThread,
    Tile,
    Unroll,
    apply_all,
    load_loop_nest,
    perfect_nests,
    render_pragmas,
)

HERE = Path(__file__).parent

# A two-deep nest over one array, built directly ...
nest = LoopNest((Loop("i", children=(Loop("j"),)),), arrays=("A",))

# ... or parsed from the JSON description the harness uses.
same = load_loop_nest((HERE / "matscale_nest.json").read_text())
assert [l.id for l in same.walk()] == [l.id for l in nest.walk()]

# The i->j chain is perfectly nested, so it can be tiled as a unit.
print("perfect chains:", perfect_nests(nest))

# Tiling replaces the chain with floor loops (.f) over tile loops (.t).
tiled = apply_all(nest, Configuration((Tile("i", 32),)))
print("after tiling: ", [l.id for l in tiled.walk()])

# The fresh loops are transformable themselves. Interchange permutes
# the whole four-deep chain (here: swap the two floor loops), unrolling
# targets the innermost tile loop, and parallelizing goes last because
# it freezes the target's subtree against further transformation.
config = Configuration(
    (
        Tile("i", 32),
        Interchange("i.f", (1, 0, 2, 3)),
        Unroll("j.t", 4),
        ParallelizeThread("j.f"),
    )
)
final = apply_all(nest, config)
print("final loops:  ", [l.id for l in final.walk()])
print("key:          ", config.key)

# Rendering inserts one pragma line per step above the target's anchor
# comment, later steps stacking above earlier ones. Loops that exist
# only after a rewrite (here j.t, a tile loop) are named by an explicit
# id(...) clause.
template = (HERE / "matscale.c").read_text()
print()
print(render_pragmas(config, template))
