"""Assignment (A) and partial-ordering (P) models for hop-constrained trees.

Both models share binary arc variables ``x[u,v]``. The assignment model
places every node on a level with one-hot variables ``y[v,i]``; the
partial-ordering model uses threshold variables ``l[v,i]`` ("level < i")
and ``g[v,i]`` ("level > i"). Levels run over ``0..H``.

Constraint ids carry a family tag, e.g. ``F-arc[u=1,v=2,i=0]``:

========== ==============================================================
P model    F-root, F-interval, F-mono, F-excl, F-arc, F-indeg, F-outdeg
A model    F-rootY, F-rootYi, F-zeroY0, F-assign, F-arcdir, F-arcdirH,
           F-indeg, F-outdeg
variants   F-term (HSTP terminals), F-budget (STPRBH)
cuts       W-walk (walk inequalities)
========== ==============================================================

Only arcs of existing edges get variables; on complete graphs this is the
usual all-pairs model.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

from .instances import Arc, Instance, Walk
from .milp import (
    EQ,
    GE,
    LE,
    MAX,
    MIN,
    Constraint,
    G,
    L,
    Model,
    Objective,
    Variable,
    VarKey,
    X,
    Y,
)

__all__ = [
    "DecodedTree",
    "FormulationError",
    "HopTreeModel",
    "SoundnessError",
    "apply_hstp",
    "apply_stprbh",
    "arc_cost_terms",
    "assignment_to_pop",
    "build_aht",
    "build_model",
    "build_pht",
    "decode_tree",
    "pop_to_assignment",
    "separate_walk_cuts",
    "walk_cut",
]

P_FAMILIES = ("F-root", "F-interval", "F-mono", "F-excl", "F-arc", "F-indeg", "F-outdeg")
A_FAMILIES = (
    "F-rootY", "F-rootYi", "F-zeroY0", "F-assign", "F-arcdir", "F-arcdirH", "F-indeg", "F-outdeg",
)


class FormulationError(ValueError):
    pass


class SoundnessError(RuntimeError):
    """A supposedly feasible integral point does not describe a hop-constrained tree."""


@dataclass(frozen=True)
class HopTreeModel:
    model: Model
    instance: Instance
    kind: str  # "P" or "A"
    problem: str = "HT"

    @property
    def hop_limit(self) -> int:
        return self.instance.hop_limit

    def x_keys(self) -> list[VarKey]:
        return [X(a.tail, a.head) for a in self.instance.arcs]

    def with_model(self, model: Model, problem: str | None = None) -> "HopTreeModel":
        return replace(self, model=model, problem=problem or self.problem)


@dataclass(frozen=True)
class DecodedTree:
    arcs: frozenset[Arc]
    depth: dict[int, int]

    @property
    def nodes(self) -> set[int]:
        return set(self.depth)

    def cost(self, inst: Instance) -> float:
        return sum(inst.cost(a.tail, a.head) for a in self.arcs)

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted((a.tail, a.head) for a in self.arcs)


def _c(id, terms, sense, rhs) -> Constraint:
    return Constraint(id, tuple(terms), sense, rhs)


def _degree_rows(inst: Instance) -> list[Constraint]:
    r = inst.root
    into: dict[int, list[int]] = {v: [] for v in inst.nodes}
    for a in inst.arcs:
        into[a.head].append(a.tail)
    rows = []
    for v in inst.nodes:
        rows.append(_c(f"F-indeg[v={v}]", [(X(u, v), 1) for u in into[v]], LE, 1))
    for a in inst.arcs:
        v, w = a
        if v == r:
            continue
        terms = [(X(v, w), 1)] + [(X(u, v), -1) for u in into[v] if u != w]
        rows.append(_c(f"F-outdeg[v={v},w={w}]", terms, LE, 0))
    return rows


def _x_variables(inst: Instance) -> list[Variable]:
    return [Variable(X(a.tail, a.head)) for a in inst.arcs]


def build_pht(inst: Instance) -> HopTreeModel:
    """Partial-ordering model of hop-constrained trees, without objective."""
    H, r = inst.hop_limit, inst.root
    levels = range(H + 1)
    variables = _x_variables(inst)
    variables += [Variable(L(v, i)) for v in inst.nodes for i in levels]
    variables += [Variable(G(v, i)) for v in inst.nodes for i in levels]

    rows = [
        _c(f"F-root[l,v={r}]", [(L(r, 0), 1)], EQ, 0),
        _c(f"F-root[g,v={r}]", [(G(r, 0), 1)], EQ, 0),
    ]
    for v in inst.nodes:
        if v == r:
            continue
        # with H = 0 there is no level 1; l[v,0] = 0 is what the level-1
        # fixing would have implied through F-mono
        lvl = 1 if H >= 1 else 0
        rows.append(_c(f"F-interval[l,v={v}]", [(L(v, lvl), 1)], EQ, 0))
        rows.append(_c(f"F-interval[g,v={v}]", [(G(v, H), 1)], EQ, 0))
    for v in inst.nodes:
        for i in range(H):
            rows.append(_c(f"F-mono[v={v},i={i}]", [(L(v, i), 1), (L(v, i + 1), -1)], LE, 0))
    for v in inst.nodes:
        for i in range(H):
            rows.append(_c(f"F-excl[v={v},i={i}]", [(G(v, i), 1), (L(v, i + 1), 1)], EQ, 1))
    for u, v in inst.arcs:
        for i in levels:
            rows.append(
                _c(f"F-arc[u={u},v={v},i={i}]", [(X(u, v), 1), (L(u, i), -1), (G(v, i), -1)], LE, 0)
            )
    rows += _degree_rows(inst)
    return HopTreeModel(Model(tuple(variables), tuple(rows)), inst, "P")


def build_aht(inst: Instance) -> HopTreeModel:
    """Assignment model of hop-constrained trees, without objective."""
    H, r = inst.hop_limit, inst.root
    if H == 0 and inst.node_count > 1:
        raise FormulationError("the assignment model needs H >= 1 when there are non-root nodes")
    levels = range(H + 1)
    variables = _x_variables(inst) + [Variable(Y(v, i)) for v in inst.nodes for i in levels]
    rows = [_c(f"F-rootY[v={r}]", [(Y(r, 0), 1)], EQ, 1)]
    for i in range(1, H + 1):
        rows.append(_c(f"F-rootYi[v={r},i={i}]", [(Y(r, i), 1)], EQ, 0))
    for v in inst.nodes:
        if v != r:
            rows.append(_c(f"F-zeroY0[v={v}]", [(Y(v, 0), 1)], EQ, 0))
    for v in inst.nodes:
        if v != r:
            rows.append(_c(f"F-assign[v={v}]", [(Y(v, i), 1) for i in range(1, H + 1)], EQ, 1))
    for u, v in inst.arcs:
        for i in range(H):
            rows.append(
                _c(
                    f"F-arcdir[u={u},v={v},i={i}]",
                    [(Y(u, i), 1), (Y(v, i + 1), -1), (X(u, v), 1)],
                    LE,
                    1,
                )
            )
    for u, v in inst.arcs:
        rows.append(_c(f"F-arcdirH[u={u},v={v}]", [(Y(u, H), 1), (X(u, v), 1)], LE, 1))
    rows += _degree_rows(inst)
    return HopTreeModel(Model(tuple(variables), tuple(rows)), inst, "A")


def arc_cost_terms(inst: Instance) -> list[tuple[VarKey, float]]:
    terms = []
    for u, v, c in inst.edges:
        terms.append((X(u, v), c))
        terms.append((X(v, u), c))
    return terms


def apply_hstp(m: HopTreeModel, inst: Instance | None = None) -> HopTreeModel:
    """Add terminal coverage rows and the edge-cost objective (minimise).

    With every node a terminal this is the HMSTP.
    """
    inst = inst or m.instance
    into: dict[int, list[int]] = {v: [] for v in inst.nodes}
    for a in inst.arcs:
        into[a.head].append(a.tail)
    rows = [
        _c(f"F-term[v={v}]", [(X(u, v), 1) for u in into[v]], GE, 1)
        for v in sorted(inst.terminals)
        if v != inst.root
    ]
    model = m.model.with_constraints(rows).with_objective(
        Objective(MIN, tuple(arc_cost_terms(inst)), 0.0)
    )
    problem = "HMSTP" if inst.terminals == frozenset(inst.nodes) else "HSTP"
    return m.with_model(model, problem)


def apply_stprbh(m: HopTreeModel, inst: Instance | None = None) -> HopTreeModel:
    """Add the budget row and the revenue objective (maximise)."""
    inst = inst or m.instance
    if inst.revenues is None or inst.budget is None:
        raise FormulationError("STPRBH needs revenues and a budget")
    budget = _c("F-budget", arc_cost_terms(inst), LE, inst.budget)
    terms = []
    for u, v, _ in inst.edges:
        terms.append((X(u, v), inst.revenue(v)))
        terms.append((X(v, u), inst.revenue(u)))
    objective = Objective(MAX, tuple(terms), inst.revenue(inst.root))
    model = m.model.with_constraints([budget]).with_objective(objective)
    return m.with_model(model, "STPRBH")


def build_model(inst: Instance, kind: str, problem: str) -> HopTreeModel:
    """Convenience: ``build_pht``/``build_aht`` plus the problem variant.

    ``problem`` is ``"hmstp"`` (terminals forced to all nodes), ``"hstp"``
    (terminals as given) or ``"stprbh"``.
    """
    problem = problem.lower()
    if problem == "hmstp":
        inst = inst.spanning()
    builder = {"P": build_pht, "A": build_aht}[kind.upper()]
    base = builder(inst)
    if problem in ("hmstp", "hstp"):
        return apply_hstp(base, inst)
    if problem == "stprbh":
        return apply_stprbh(base, inst)
    raise FormulationError(f"unknown problem {problem!r}")


# -- transforms between the two variable spaces ------------------------------

def _levels(p: Mapping[VarKey, float], family: str) -> dict[int, dict[int, float]]:
    out: dict[int, dict[int, float]] = {}
    for k, val in p.items():
        if k.family == family:
            out.setdefault(k.a, {})[k.b] = val
    return out


def pop_to_assignment(p: Mapping[VarKey, float]) -> dict[VarKey, float]:
    """``y[v,i] = 1 - (l[v,i] + g[v,i])``; x values are copied."""
    out = {k: val for k, val in p.items() if k.family == "x"}
    l_vals, g_vals = _levels(p, "l"), _levels(p, "g")
    for v, row in l_vals.items():
        for i, lv in row.items():
            out[Y(v, i)] = 1 - (lv + g_vals[v][i])
    return out


def assignment_to_pop(p: Mapping[VarKey, float]) -> dict[VarKey, float]:
    """Prefix/suffix sums ``l[v,i] = sum_{j<i} y[v,j]``, ``g[v,i] = sum_{j>i} y[v,j]``.

    Inverts :func:`pop_to_assignment` when every node's y values sum to one.
    """
    out = {k: val for k, val in p.items() if k.family == "x"}
    for v, row in _levels(p, "y").items():
        H = max(row)
        ys = [row[i] for i in range(H + 1)]
        for i in range(H + 1):
            out[L(v, i)] = sum(ys[:i], 0)
            out[G(v, i)] = sum(ys[i + 1:], 0)
    return out


# -- decoding ----------------------------------------------------------------

def decode_tree(m: HopTreeModel, p: Mapping[VarKey, float], tol: float = 1e-6) -> DecodedTree:
    """Read the tree selected by the x values of an integral point.

    Raises :class:`SoundnessError` when the selected arcs are not an
    arborescence rooted at the root with depth at most H.
    """
    inst = m.instance
    r, H = inst.root, inst.hop_limit
    chosen = [a for a in inst.arcs if p[X(a.tail, a.head)] > 1 - tol]
    for a in inst.arcs:
        val = p[X(a.tail, a.head)]
        if tol < val < 1 - tol:
            raise SoundnessError(f"x{tuple(a)} = {val} is fractional")
    parent: dict[int, int] = {}
    for u, v in chosen:
        if v in parent:
            raise SoundnessError(f"node {v} has two parents")
        if v == r:
            raise SoundnessError("an arc enters the root")
        parent[v] = u
    depth = {r: 0}

    def resolve(v, seen):
        if v in depth:
            return depth[v]
        if v not in parent:
            raise SoundnessError(f"node {v} is not connected to the root")
        if v in seen:
            raise SoundnessError(f"cycle through node {v}")
        seen.add(v)
        d = resolve(parent[v], seen) + 1
        depth[v] = d
        return d

    for v in list(parent):
        resolve(v, set())
    too_deep = [v for v, d in depth.items() if d > H]
    if too_deep:
        raise SoundnessError(f"nodes {sorted(too_deep)} exceed the hop limit {H}")
    return DecodedTree(frozenset(Arc(u, v) for u, v in chosen), dict(sorted(depth.items())))


# -- walk inequalities -------------------------------------------------------

def walk_cut(w: Walk, H: int, root: int | None = None, id: str | None = None) -> Constraint:
    """``sum of x over the walk's arcs <= H - 1`` for a walk with H arcs.

    Repeated arcs accumulate coefficients.
    """
    if not isinstance(w, Walk):
        w = Walk(w)
    if len(w) != H:
        raise FormulationError(f"walk has {len(w)} arcs, expected H = {H}")
    if root is not None and w.start == root:
        raise FormulationError("walk cuts do not apply to walks starting at the root")
    if id is None:
        id = "W-walk[" + ",".join(map(str, w.nodes)) + "]"
    return Constraint(id, tuple((X(a.tail, a.head), 1) for a in w), LE, H - 1)


def separate_walk_cuts(
    inst: Instance, p: Mapping[VarKey, float], tol: float = 1e-6
) -> list[tuple[Walk, float]]:
    """Most violated walk inequality ending at each node, by layered DP.

    ``f_1(v) = max_{u != r} x[u,v]`` and ``f_k(v) = max_u f_{k-1}(u) + x[u,v]``.
    Value ties are broken towards the lexicographically smallest node
    sequence. Returns ``(walk, violation)`` pairs with violation above
    ``tol``, most violated first; an empty list proves no walk cut is
    violated.
    """
    H, r = inst.hop_limit, inst.root
    if H < 1:
        return []
    tie = 1e-12
    into: dict[int, list[int]] = {v: [] for v in inst.nodes}
    for a in inst.arcs:
        into[a.head].append(a.tail)
    xv = {(a.tail, a.head): p[X(a.tail, a.head)] for a in inst.arcs}

    # best[v] = (value, node sequence) of the best k-arc walk ending at v
    best: dict[int, tuple[float, tuple[int, ...]]] = {}
    for v in inst.nodes:
        cand = [(xv[u, v], (u, v)) for u in into[v] if u != r]
        if cand:
            best[v] = _pick(cand, tie)
    for _ in range(H - 1):
        nxt = {}
        for v in inst.nodes:
            cand = [(best[u][0] + xv[u, v], best[u][1] + (v,)) for u in into[v] if u in best]
            if cand:
                nxt[v] = _pick(cand, tie)
        best = nxt
    found = []
    for v, (val, seq) in best.items():
        viol = val - (H - 1)
        if viol > tol:
            found.append((Walk.from_nodes(seq), viol, seq))
    found.sort(key=lambda t: (-round(t[1], 12), t[2]))
    return [(w, viol) for w, viol, _ in found]


def _pick(cand, tie):
    top = max(val for val, _ in cand)
    return min((c for c in cand if c[0] >= top - tie), key=lambda c: c[1])
