"""Hand-built points on the four-node complete graph used in several tests.

Node 4 is the root; 1, 2, 3 play the roles of the three other nodes.
"""

from fractions import Fraction

from hoptree.instances import Instance
from hoptree.milp import G, L, X, Y

R, A, B, C = 4, 1, 2, 3
OTHERS = (A, B, C)


def k4(cost=lambda u, v: 1.0, hop=2, terminals=None) -> Instance:
    edges = tuple((u, v, float(cost(u, v))) for u in range(1, 5) for v in range(u + 1, 5))
    return Instance(
        node_count=4,
        root=R,
        edges=edges,
        terminals=frozenset(terminals or range(1, 5)),
        hop_limit=hop,
        name="k4",
    )


def star_point_pop(H=2):
    """All non-roots hang off the root but sit at position 2."""
    p = {}
    for u in range(1, 5):
        for v in range(1, 5):
            if u != v:
                p[X(u, v)] = 1.0 if u == R else 0.0
    for v in range(1, 5):
        pos = 0 if v == R else 2
        for i in range(H + 1):
            p[L(v, i)] = 1.0 if pos < i else 0.0
            p[G(v, i)] = 1.0 if pos > i else 0.0
    return p


def fractional_point_assignment(exact=False):
    """x on the 3-cycle a->b->c->a at 2/3 and the reverse cycle at 1/3."""
    two, one = (Fraction(2, 3), Fraction(1, 3)) if exact else (2 / 3, 1 / 3)
    zero, unit = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
    p = {}
    for u in range(1, 5):
        for v in range(1, 5):
            if u != v:
                p[X(u, v)] = zero
    for u, v in ((A, B), (B, C), (C, A)):
        p[X(u, v)] = two
        p[X(v, u)] = one
    p[Y(R, 0)], p[Y(R, 1)], p[Y(R, 2)] = unit, zero, zero
    for v in OTHERS:
        p[Y(v, 0)], p[Y(v, 1)], p[Y(v, 2)] = zero, two, one
    return p
