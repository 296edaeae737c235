"""
Comparing the two relaxations in arc space
==========================================

Eliminating the position variables leaves each relaxation as a polytope
over the arc variables alone. On tiny graphs we can compute that exactly
with Fourier-Motzkin elimination and compare the two.
"""

from hoptree import build_model, certify_inclusion
from hoptree.bench import prepare_instance
from hoptree.instances import generate_random
from hoptree.polyhedra import support_dominance

###############################################################################
# Check that the partial-ordering projection sits inside the assignment one.
# Every projected row of the assignment model gets a nonnegative slack
# certified in rational arithmetic.

for n, H in ((3, 1), (3, 2), (4, 1), (4, 2)):
    inst = prepare_instance(generate_random(n, 0), "hstp", H)
    rep = certify_inclusion(build_model(inst, "A", "hstp"), build_model(inst, "P", "hstp"))
    print(f"n={n} H={H}: {rep.verdict}, worst slack {rep.worst_slack} over {rep.checked} rows")

###############################################################################
# The other direction fails: the projected partial-ordering model has a row
# that some point of the assignment relaxation breaks.

inst = prepare_instance(generate_random(4, 0), "hstp", 2)
a, p = build_model(inst, "A", "hstp"), build_model(inst, "P", "hstp")
rep = certify_inclusion(p, a)
print(rep.verdict, "violated row:", rep.violated_row)

###############################################################################
# A cheaper, sampled view: maximise random linear functions of the arcs
# over both relaxations. A nonnegative margin is what inclusion predicts.

print("support margin", support_dominance(a, p, trials=30, seed=1))
