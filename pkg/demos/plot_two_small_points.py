"""
Two hand-built points on four nodes
===================================

Node 4 is the root of a complete graph on four nodes, with hop limit 2.
We look at two points and see which relaxation accepts them.
"""

from fractions import Fraction

from hoptree import build_aht, build_pht
from hoptree.formulations import apply_hstp, pop_to_assignment, separate_walk_cuts
from hoptree.instances import Instance
from hoptree.milp import G, L, X, Y, relax, violated_constraints

H = 2
edges = tuple((u, v, 1.0) for u in range(1, 5) for v in range(u + 1, 5))
inst = Instance(4, root=4, edges=edges, terminals=frozenset(range(1, 5)), hop_limit=H, name="k4")
pht = relax(apply_hstp(build_pht(inst)).model)
aht = relax(apply_hstp(build_aht(inst)).model)

###############################################################################
# A star whose leaves claim position 2
# ------------------------------------
# Every non-root node hangs directly off the root, yet its threshold
# variables place it at position 2. The partial-ordering rows only ask that
# a child sits later than its parent, so this is fine for them.

star = {X(u, v): float(u == 4) for u in range(1, 5) for v in range(1, 5) if u != v}
for v in range(1, 5):
    pos = 0 if v == 4 else 2
    for i in range(H + 1):
        star[L(v, i)] = float(pos < i)
        star[G(v, i)] = float(pos > i)

print("partial-ordering violations:", violated_constraints(pht, star, tol=1e-9))

# Mapped to one-hot positions, the same point breaks the arc rows that
# tie a child to exactly one position after its parent.
for cid, excess in violated_constraints(aht, pop_to_assignment(star), tol=1e-9):
    print(f"assignment violation {cid}: {excess:g}")

###############################################################################
# A fractional cycle
# ------------------
# Two opposite 3-cycles among the non-roots, weighted 2/3 and 1/3, with
# positions spread as (0, 2/3, 1/3). The assignment relaxation is happy.

two, one = Fraction(2, 3), Fraction(1, 3)
cycle = {X(u, v): Fraction(0) for u in range(1, 5) for v in range(1, 5) if u != v}
for u, v in ((1, 2), (2, 3), (3, 1)):
    cycle[X(u, v)], cycle[X(v, u)] = two, one
cycle[Y(4, 0)], cycle[Y(4, 1)], cycle[Y(4, 2)] = 1, 0, 0
for v in (1, 2, 3):
    cycle[Y(v, 0)], cycle[Y(v, 1)], cycle[Y(v, 2)] = 0, two, one

print("assignment violations:", violated_constraints(aht, cycle, tol=0))

# A walk of H arcs avoiding the root can carry at most H - 1 units of arc
# flow in any tree. Separation finds the walk breaking that.
walk, excess = separate_walk_cuts(inst, cycle)[0]
print("most violated walk", walk.nodes, "by", excess)
