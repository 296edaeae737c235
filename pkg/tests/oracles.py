"""Independent reference implementations used only by the tests.

None of these share code with the package's solvers: trees are enumerated
by brute force over parent assignments, LPs go through scipy's HiGHS and
spanning trees through networkx.
"""

from __future__ import annotations

import itertools
import math

import networkx as nx
import numpy as np
from scipy.optimize import linprog


def rooted_trees(inst):
    """Yield ``(parent, depth)`` for every rooted tree of depth <= H.

    ``parent`` maps each non-root tree node to its parent. Every subtree
    containing the root is produced exactly once.
    """
    r, H = inst.root, inst.hop_limit
    others = [v for v in inst.nodes if v != r]
    options = [[None] + [u for u in inst.nodes if u != v and inst.has_edge(u, v)] for v in others]
    for choice in itertools.product(*options):
        parent = {v: u for v, u in zip(others, choice) if u is not None}
        depth = {r: 0}
        ok = True
        for v in parent:
            chain = []
            w = v
            while w not in depth:
                if w in chain or w not in parent:
                    ok = False
                    break
                chain.append(w)
                w = parent[w]
            if not ok:
                break
            d = depth[w]
            for w in reversed(chain):
                d += 1
                depth[w] = d
        if ok and max(depth.values()) <= H:
            yield parent, depth


def brute_force_optimum(inst, problem):
    """Optimal value of HMSTP/HSTP (min cost) or STPRBH (max revenue)."""
    best = None
    need = set(inst.nodes) if problem == "hmstp" else set(inst.terminals)
    for parent, depth in rooted_trees(inst):
        cost = sum(inst.cost(v, u) for v, u in parent.items())
        if problem == "stprbh":
            if cost > inst.budget:
                continue
            value = sum(inst.revenue(v) for v in depth)
            best = value if best is None else max(best, value)
        else:
            if not need <= set(depth):
                continue
            best = cost if best is None else min(best, cost)
    return best


def tree_point(model, parent, depth, kind):
    """Integral model point for a given rooted tree."""
    H = max([0] + [k.b for k in model.keys if k.family in "lgy"])
    out = {}
    for k in model.keys:
        fam, a, b = k
        if fam == "x":
            out[k] = 1.0 if parent.get(b) == a else 0.0
            continue
        # nodes outside the tree take an arbitrary position; use H
        pos = depth.get(a, H)
        if fam == "y":
            out[k] = 1.0 if b == pos else 0.0
        elif fam == "l":
            out[k] = 1.0 if pos < b else 0.0
        else:
            out[k] = 1.0 if pos > b else 0.0
    return out


def highs_lp(model):
    """LP relaxation value via scipy/HiGHS, in the model's own sense."""
    a = model.arrays
    sign = -1.0 if model.objective.sense == "max" else 1.0
    le, ge, eq = a.senses == "<=", a.senses == ">=", a.senses == "="
    A_ub = np.vstack([a.A[le], -a.A[ge]])
    b_ub = np.concatenate([a.b[le], -a.b[ge]])
    res = linprog(
        sign * a.c,
        A_ub=A_ub if len(b_ub) else None,
        b_ub=b_ub if len(b_ub) else None,
        A_eq=a.A[eq] if eq.any() else None,
        b_eq=a.b[eq] if eq.any() else None,
        bounds=list(zip(a.lb, a.ub)),
        method="highs",
    )
    if res.status == 2:
        return "Infeasible", math.nan
    assert res.status == 0, res.message
    return "Optimal", model.objective.constant + sign * res.fun


def kruskal_cost(inst):
    g = nx.Graph()
    g.add_nodes_from(inst.nodes)
    for u, v, c in inst.edges:
        g.add_edge(u, v, weight=c)
    tree = nx.minimum_spanning_tree(g, algorithm="kruskal")
    return sum(d["weight"] for _, _, d in tree.edges(data=True))


def all_walks(inst, length, avoid_start=None):
    """Every directed walk with ``length`` arcs, as node tuples."""
    out_nbrs = {v: [] for v in inst.nodes}
    for a in inst.arcs:
        out_nbrs[a.tail].append(a.head)
    walks = [(v,) for v in inst.nodes if v != avoid_start]
    for _ in range(length):
        walks = [w + (u,) for w in walks for u in out_nbrs[w[-1]]]
    return walks
