"""Exact Fourier-Motzkin projection and polyhedral certification.

A :class:`RationalSystem` is a list of ``<=`` rows over integers. Every row
remembers how it was derived: ``scale * row == sum(weight * original)``
with nonnegative integer weights, so eliminations can be audited after the
fact (:meth:`RationalSystem.check_provenance`). Model data is converted
exactly, and each original row is scaled to integer coefficients first.

Equalities are kept as pairs of opposite rows. Before any Fourier-Motzkin
step, variables that occur in such a pair are substituted out, which is the
cheap way to eliminate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .formulations import HopTreeModel
from .instances import Instance, InstanceError, Walk
from .milp import EQ, GE, LE, MAX, Constraint, Model, Objective, Variable, VarKey, X, relax
from .simplex import LpOutcome, dual_bound, maximize_expr_over, solve_lp

__all__ = [
    "INCLUDED",
    "COUNTEREXAMPLE",
    "INCONCLUSIVE",
    "InclusionReport",
    "ProjectionLimitError",
    "RationalSystem",
    "Row",
    "certify_inclusion",
    "fme_eliminate",
    "lemma1_bound_check",
    "project_x",
    "rationalize",
    "support_dominance",
    "walk_family_bound",
]

INCLUDED = "Included"
COUNTEREXAMPLE = "CounterexampleFound"
INCONCLUSIVE = "Inconclusive"

DEFAULT_ROW_CAP = 200_000


class ProjectionLimitError(RuntimeError):
    """Raised when an elimination would exceed the configured row cap."""


def _to_fraction(value) -> Fraction:
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite coefficient {value}")
    return Fraction(repr(value))


@dataclass(frozen=True)
class Row:
    """``sum(coeffs[k] * k) <= rhs`` with integer data."""

    coeffs: tuple[tuple[VarKey, int], ...]  # sorted by key, nonzero
    rhs: int
    prov: tuple[tuple[int, int], ...]  # (original index, weight)
    scale: int = 1

    def coef(self, key: VarKey) -> int:
        for k, c in self.coeffs:
            if k == key:
                return c
        return 0

    def as_dict(self) -> dict[VarKey, int]:
        return dict(self.coeffs)

    def direction(self) -> tuple[tuple[tuple[VarKey, int], ...], Fraction]:
        """Coefficient direction reduced by its gcd, and the matching rhs."""
        g = 0
        for _, c in self.coeffs:
            g = math.gcd(g, abs(c))
        if g == 0:
            return (), Fraction(self.rhs)
        return tuple((k, c // g) for k, c in self.coeffs), Fraction(self.rhs, g)

    def negated_key(self):
        return tuple((k, -c) for k, c in self.coeffs), -self.rhs

    def evaluate(self, point: Mapping[VarKey, float]):
        return sum(c * point[k] for k, c in self.coeffs)

    def __str__(self):
        lhs = " + ".join(f"{c}*{k}" for k, c in self.coeffs) or "0"
        return f"{lhs} <= {self.rhs}"


def _make_row(coeffs: Mapping[VarKey, int], rhs: int, prov: Mapping[int, int], scale: int) -> Row:
    coeffs = {k: c for k, c in coeffs.items() if c != 0}
    g = abs(rhs)
    for c in coeffs.values():
        g = math.gcd(g, abs(c))
    if g > 1:
        coeffs = {k: c // g for k, c in coeffs.items()}
        rhs //= g
        scale *= g
    h = scale
    for w in prov.values():
        h = math.gcd(h, w)
    if h > 1:
        prov = {i: w // h for i, w in prov.items()}
        scale //= h
    return Row(
        tuple(sorted(coeffs.items())),
        rhs,
        tuple(sorted((i, w) for i, w in prov.items() if w)),
        scale,
    )


def _combine(p: Row, alpha: int, n: Row, beta: int) -> Row:
    """``alpha * p + beta * n`` with provenance bookkeeping (alpha, beta > 0)."""
    coeffs: dict[VarKey, int] = {}
    for k, c in p.coeffs:
        coeffs[k] = coeffs.get(k, 0) + alpha * c
    for k, c in n.coeffs:
        coeffs[k] = coeffs.get(k, 0) + beta * c
    rhs = alpha * p.rhs + beta * n.rhs
    prov: dict[int, int] = {}
    for i, w in p.prov:
        prov[i] = prov.get(i, 0) + alpha * n.scale * w
    for i, w in n.prov:
        prov[i] = prov.get(i, 0) + beta * p.scale * w
    return _make_row(coeffs, rhs, prov, p.scale * n.scale)


@dataclass(frozen=True)
class RationalSystem:
    """Integer inequality system with provenance back to ``origins``."""

    columns: tuple[VarKey, ...]
    rows: tuple[Row, ...]
    origins: tuple[tuple[str, tuple[tuple[VarKey, int], ...], int], ...]
    infeasible: bool = False

    def __len__(self):
        return len(self.rows)

    @classmethod
    def from_rows(
        cls, columns: Sequence[VarKey], rows: Sequence[tuple[Mapping[VarKey, object], object]]
    ) -> "RationalSystem":
        """System of ``coeffs . x <= rhs`` rows (numbers converted exactly)."""
        origins = tuple(_origin_row(f"row[{i}]", c.items(), b) for i, (c, b) in enumerate(rows))
        built = tuple(_make_row(dict(c), b, {i: 1}, 1) for i, (_, c, b) in enumerate(origins))
        return cls(tuple(columns), built, origins)

    def satisfied_by(self, point: Mapping[VarKey, float], tol: float = 0.0) -> bool:
        return all(r.evaluate(point) <= r.rhs + tol for r in self.rows)

    def check_provenance(self) -> bool:
        """Recompute every row from its provenance, exactly."""
        for row in self.rows:
            total: dict[VarKey, int] = {}
            rhs = 0
            for i, w in row.prov:
                if w < 0:
                    return False
                _, coeffs, b = self.origins[i]
                for k, c in coeffs:
                    total[k] = total.get(k, 0) + w * c
                rhs += w * b
            total = {k: c for k, c in total.items() if c}
            expect = {k: row.scale * c for k, c in row.coeffs}
            if total != expect or rhs != row.scale * row.rhs:
                return False
        return True

    def mentions(self) -> set[VarKey]:
        return {k for r in self.rows for k, _ in r.coeffs}

    def to_constraints(self, prefix: str = "proj") -> list[Constraint]:
        return [
            Constraint(f"{prefix}[{i}]", tuple((k, float(c)) for k, c in r.coeffs), LE, float(r.rhs))
            for i, r in enumerate(self.rows)
        ]


def _origin_row(label: str, terms, rhs) -> tuple[str, tuple, int]:
    fr = {k: _to_fraction(c) for k, c in terms}
    b = _to_fraction(rhs)
    den = b.denominator
    for c in fr.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    coeffs = tuple(sorted((k, int(c * den)) for k, c in fr.items() if c != 0))
    return label, coeffs, int(b * den)


def rationalize(m: Model) -> RationalSystem:
    """Exact integer system for the LP relaxation of ``m``.

    Rows ``>=`` are negated, equalities become a pair of opposite rows and
    every variable contributes the two bound rows ``x <= ub``, ``-x <= -lb``.
    """
    origins = []
    for con in m.constraints:
        if con.sense in (LE, EQ):
            origins.append(_origin_row(con.id + ("+" if con.sense == EQ else ""), con.terms, con.rhs))
        if con.sense in (GE, EQ):
            neg = tuple((k, -_to_fraction(c)) for k, c in con.terms)
            origins.append(_origin_row(con.id + "-" if con.sense == EQ else con.id, neg, -_to_fraction(con.rhs)))
    for var in m.variables:
        origins.append(_origin_row(f"ub[{var.key}]", [(var.key, 1)], var.ub))
        origins.append(_origin_row(f"lb[{var.key}]", [(var.key, -1)], -_to_fraction(var.lb)))
    rows = tuple(_make_row(dict(c), b, {i: 1}, 1) for i, (_, c, b) in enumerate(origins))
    return RationalSystem(tuple(m.keys), rows, tuple(origins))


def _prune(rows: Iterable[Row]) -> tuple[list[Row], bool]:
    """Drop trivial rows and keep the tightest row per coefficient direction."""
    best: dict = {}
    infeasible = False
    for r in rows:
        if not r.coeffs:
            if r.rhs < 0:
                infeasible = True
                best.setdefault(("__empty__",), (Fraction(r.rhs), r))
            continue
        key, rhs = r.direction()
        cur = best.get(key)
        if cur is None or rhs < cur[0]:
            best[key] = (rhs, r)
    return [r for _, r in best.values()], infeasible


def _substitute(rows: list[Row], pos: Row, neg: Row, v: VarKey) -> list[Row]:
    """Eliminate ``v`` using the equality given by the opposite pair (pos, neg)."""
    e = pos.coef(v)  # > 0
    out = []
    for r in rows:
        if r is pos or r is neg:
            continue
        a = r.coef(v)
        if a == 0:
            out.append(r)
        elif a > 0:
            out.append(_combine(r, e, neg, a))
        else:
            out.append(_combine(r, e, pos, -a))
    return out


def _find_equality(rows: Sequence[Row], keep: set[VarKey]):
    lookup = {(r.coeffs, r.rhs): r for r in rows}
    best = None
    for r in rows:
        twin = lookup.get(r.negated_key())
        if twin is None:
            continue
        for k, c in r.coeffs:
            if k in keep or c <= 0:
                continue
            score = (abs(c) != 1, sum(1 for q in rows if q.coef(k) != 0))
            if best is None or score < best[0]:
                best = (score, r, twin, k)
    return None if best is None else best[1:]


def fme_eliminate(s: RationalSystem, v: VarKey, row_cap: int = DEFAULT_ROW_CAP) -> RationalSystem:
    """Fourier-Motzkin elimination of ``v``.

    Rows without ``v`` pass through; every positive row is combined with
    every negative row. Duplicates and parallel rows with looser
    right-hand sides are pruned afterwards.
    """
    if v not in s.columns:
        raise KeyError(v)
    zero, pos, neg = [], [], []
    for r in s.rows:
        c = r.coef(v)
        (pos if c > 0 else neg if c < 0 else zero).append(r)
    if len(zero) + len(pos) * len(neg) > row_cap:
        raise ProjectionLimitError(
            f"eliminating {v} would create {len(pos) * len(neg)} rows (cap {row_cap}); "
            "use a smaller instance"
        )
    new = list(zero)
    for p in pos:
        a = p.coef(v)
        for n in neg:
            b = -n.coef(v)
            new.append(_combine(p, b, n, a))
    rows, infeasible = _prune(new)
    cols = tuple(k for k in s.columns if k != v)
    return RationalSystem(cols, tuple(rows), s.origins, s.infeasible or infeasible)


def substitute_equalities(s: RationalSystem, keep: set[VarKey]) -> RationalSystem:
    """Gaussian elimination of non-``keep`` variables occurring in equality pairs."""
    rows = list(s.rows)
    cols = list(s.columns)
    infeasible = s.infeasible
    while True:
        found = _find_equality(rows, keep)
        if found is None:
            break
        pos, neg, v = found
        rows, inf = _prune(_substitute(rows, pos, neg, v))
        infeasible |= inf
        cols.remove(v)
    return RationalSystem(tuple(cols), tuple(rows), s.origins, infeasible)


def project(
    s: RationalSystem, keep: Iterable[VarKey], row_cap: int = DEFAULT_ROW_CAP, prune_lp: bool = False
) -> RationalSystem:
    """Eliminate every column not in ``keep``.

    Equality pairs are used first; the remaining columns go by fewest
    positive-times-negative combinations, recomputed after each step. With
    ``prune_lp`` every surviving row is additionally tested for redundancy
    with an LP (slower, smaller result).
    """
    keep = set(keep)
    s = substitute_equalities(s, keep)
    while True:
        todo = [k for k in s.columns if k not in keep]
        if not todo:
            break
        mentioned = s.mentions()
        idle = [k for k in todo if k not in mentioned]
        if idle:
            s = RationalSystem(tuple(k for k in s.columns if k not in idle), s.rows, s.origins, s.infeasible)
            continue

        def cost(k):
            p = sum(1 for r in s.rows if r.coef(k) > 0)
            n = sum(1 for r in s.rows if r.coef(k) < 0)
            return (p * n, str(k))

        v = min(todo, key=cost)
        s = fme_eliminate(s, v, row_cap)
        s = substitute_equalities(s, keep)
    if prune_lp:
        s = _lp_prune(s)
    return s


def project_x(s: RationalSystem, row_cap: int = DEFAULT_ROW_CAP, prune_lp: bool = False) -> RationalSystem:
    """Projection onto the arc variables ``x``."""
    return project(s, [k for k in s.columns if k.family == "x"], row_cap, prune_lp)


def _lp_prune(s: RationalSystem) -> RationalSystem:
    rows = list(s.rows)
    variables = tuple(Variable(k, -1e9, 1e9, False) for k in s.columns)
    i = 0
    while i < len(rows):
        others = rows[:i] + rows[i + 1:]
        cons = tuple(
            Constraint(f"r{j}", tuple((k, float(c)) for k, c in r.coeffs), LE, float(r.rhs))
            for j, r in enumerate(others)
        )
        model = Model(variables, cons)
        res = maximize_expr_over(model, [(k, float(c)) for k, c in rows[i].coeffs])
        if res.optimal and res.objective <= rows[i].rhs + 1e-9:
            rows.pop(i)
        else:
            i += 1
    return RationalSystem(s.columns, tuple(rows), s.origins, s.infeasible)


# -- certification ------------------------------------------------------------

@dataclass
class InclusionReport:
    verdict: str
    checked: int
    worst_slack: float | Fraction | None
    counterexample: dict | None = None
    violated_row: Row | None = None
    exact: bool = False
    projected_rows: int = 0
    message: str = ""

    @property
    def included(self) -> bool:
        return self.verdict == INCLUDED


def _exact_row_max(res: LpOutcome, expr_model: Model) -> Fraction | None:
    """Rational upper bound on an LP maximum from rounded duals, if it is tight."""
    duals = {cid: Fraction(val).limit_denominator(1000) for cid, val in res.duals.items()}
    bound = dual_bound(expr_model, duals, exact=True)
    if abs(float(bound) - res.objective) <= 1e-7:
        return bound
    return None


def certify_inclusion(
    source: HopTreeModel,
    target: HopTreeModel,
    tol: float = 1e-7,
    row_cap: int = DEFAULT_ROW_CAP,
) -> InclusionReport:
    """Check ``proj_x(target) subset proj_x(source)``.

    ``source`` is projected onto x exactly; each projected row is then
    maximised over the LP relaxation of ``target``. ``certify_inclusion(A, P)``
    therefore checks that the P relaxation's x-shadow lies inside the A
    relaxation's x-shadow. Where the rounded LP duals give a rational
    certificate the slack is exact.
    """
    try:
        proj = project_x(rationalize(relax(source.model)), row_cap=row_cap)
    except ProjectionLimitError as exc:
        return InclusionReport(INCONCLUSIVE, 0, None, message=str(exc))

    base = relax(target.model)
    worst = None
    all_exact = True
    checked = 0
    if proj.infeasible:
        # empty source shadow: inclusion holds only if the target is empty too
        res = solve_lp(base.with_objective(Objective()))
        if res.optimal:
            return InclusionReport(COUNTEREXAMPLE, 0, None, res.point, None, message="source is empty")
        return InclusionReport(INCLUDED, 0, None, exact=False)
    for row in proj.rows:
        expr = [(k, float(c)) for k, c in row.coeffs]
        expr_model = base.with_objective(Objective(MAX, tuple(expr), 0.0))
        res = solve_lp(expr_model)
        checked += 1
        if not res.optimal:
            if res.status == "Infeasible":
                return InclusionReport(INCLUDED, checked, None, message="target relaxation is empty")
            return InclusionReport(INCONCLUSIVE, checked, worst, message=f"LP status {res.status}")
        slack_f = row.rhs - res.objective
        if slack_f < -tol:
            return InclusionReport(
                COUNTEREXAMPLE, checked, slack_f, res.point, row, projected_rows=len(proj)
            )
        exact = _exact_row_max(res, expr_model)
        if exact is not None and exact <= row.rhs:
            slack = Fraction(row.rhs) - exact
        else:
            all_exact = False
            slack = slack_f
        if worst is None or slack < worst:
            worst = slack
    if not all_exact and isinstance(worst, Fraction):
        worst = float(worst)
    return InclusionReport(INCLUDED, checked, worst, exact=all_exact, projected_rows=len(proj))


def support_dominance(
    outer: HopTreeModel,
    inner: HopTreeModel,
    trials: int = 50,
    seed: int = 0,
    directions: Sequence[Mapping[VarKey, float]] | None = None,
) -> float:
    """Smallest ``max_outer c.x - max_inner c.x`` over sampled directions ``c``.

    Random directions are uniform on the unit sphere of the x-space. If
    the inner x-shadow lies in the outer one, every margin is >= 0.
    """
    keys = outer.x_keys()
    if set(keys) != set(inner.x_keys()):
        raise ValueError("models do not share the same x variables")
    outer_m, inner_m = relax(outer.model), relax(inner.model)
    if directions is None:
        rng = np.random.default_rng(seed)
        directions = []
        for _ in range(trials):
            v = rng.standard_normal(len(keys))
            v /= np.linalg.norm(v)
            directions.append(dict(zip(keys, v)))
    worst = math.inf
    for c in directions:
        expr = [(k, float(val)) for k, val in c.items() if val != 0]
        ro = maximize_expr_over(outer_m, expr)
        ri = maximize_expr_over(inner_m, expr)
        if not (ro.optimal and ri.optimal):
            raise RuntimeError(f"LP failed: {ro.status}/{ri.status}")
        worst = min(worst, ro.objective - ri.objective)
    return worst


# -- walk families -------------------------------------------------------------

def _check_walk_family(inst: Instance, walks: Sequence[Walk]):
    if not walks:
        raise InstanceError("need at least one walk")
    t = walks[0].end
    for w in walks:
        if w.end != t:
            raise InstanceError(f"{w} does not end in {t}")
        for a in w:
            if not inst.has_edge(a.tail, a.head):
                raise InstanceError(f"{w} uses missing arc {tuple(a)}")
    for i, w in enumerate(walks):
        for w2 in walks[i + 1:]:
            nodes = set(w.nodes) | set(w2.nodes)
            if not any(len(w.incoming(v) | w2.incoming(v)) >= 2 for v in nodes):
                raise InstanceError(f"walks {w} and {w2} share no node with two distinct incoming arcs")


def walk_family_bound(inst: Instance, walks: Sequence[Walk]) -> tuple[float, int]:
    """LP maximum of ``sum_W x(W)`` under in-degree rows and ``0 <= x <= 1``, and the bound."""
    walks = [w if isinstance(w, Walk) else Walk(w) for w in walks]
    _check_walk_family(inst, walks)
    variables = tuple(Variable(X(a.tail, a.head), 0.0, 1.0, False) for a in inst.arcs)
    into: dict[int, list] = {v: [] for v in inst.nodes}
    for a in inst.arcs:
        into[a.head].append(X(a.tail, a.head))
    rows = tuple(
        Constraint(f"F-indeg[v={v}]", tuple((k, 1) for k in ks), LE, 1) for v, ks in into.items() if ks
    )
    expr = [(X(a.tail, a.head), 1.0) for w in walks for a in w]
    res = maximize_expr_over(Model(variables, rows), expr)
    if not res.optimal:
        raise RuntimeError(f"LP failed with status {res.status}")
    rhs = sum(len(w) for w in walks) - len(walks) + 1
    return res.objective, rhs


def lemma1_bound_check(inst: Instance, walks: Sequence[Walk], tol: float = 1e-6) -> bool:
    """Whether the in-degree rows bound ``sum_W x(W)`` by ``sum_W len(W) - |W| + 1``."""
    value, rhs = walk_family_bound(inst, walks)
    return value <= rhs + tol
