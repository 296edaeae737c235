"""Bounded-variable primal simplex and best-bound branch and bound.

The LP solver is a dense revised simplex with an explicit basis inverse.
Variable bounds are handled directly (nonbasic columns sit at a bound), so
no extra rows are created for them. Each row gets one slack column; rows
whose slack basis is infeasible get an artificial column for phase 1.

Pricing is Dantzig's rule (largest reduced cost). When the objective stalls
for ``stall_limit`` consecutive degenerate pivots the solver switches to
Bland's rule until it makes progress again.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .milp import GE, LE, MAX, MIN, Constraint, Model, Objective, VarKey, relax

__all__ = [
    "LpOutcome",
    "MipOutcome",
    "SimplexOptions",
    "dual_bound",
    "maximize_expr_over",
    "solve_lp",
    "solve_mip",
]

OPTIMAL = "Optimal"
INFEASIBLE = "Infeasible"
UNBOUNDED = "Unbounded"
ITERATION_LIMIT = "IterationLimit"
FEASIBLE = "Feasible"
TIME_LIMIT = "TimeLimit"


@dataclass(frozen=True)
class SimplexOptions:
    pivot_tol: float = 1e-7
    primal_tol: float = 1e-9
    dual_tol: float = 1e-9
    phase1_tol: float = 1e-7
    refactor_every: int = 100
    stall_limit: int = 50
    max_iterations: int = 100_000


@dataclass
class LpOutcome:
    status: str
    objective: float = math.nan
    point: dict | None = None
    iterations: int = 0
    duals: dict | None = None  # constraint id -> multiplier

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class MipOutcome:
    status: str
    incumbent: float | None
    bound: float
    point: dict | None
    nodes: int
    wall_time: float
    lp_iterations: int = 0
    sense: str = MIN

    @property
    def interval(self) -> tuple[float, float]:
        """``(lb, ub)`` on the optimum."""
        inc = self.incumbent
        if self.sense == MIN:
            return (self.bound, inc if inc is not None else math.inf)
        return (inc if inc is not None else -math.inf, self.bound)


class _Result:
    __slots__ = ("status", "x", "obj", "y", "iterations")

    def __init__(self, status, x=None, obj=math.nan, y=None, iterations=0):
        self.status = status
        self.x = x
        self.obj = obj
        self.y = y
        self.iterations = iterations


def _solve_arrays(A, senses, b, c, lb, ub, opts: SimplexOptions) -> _Result:
    """``min c.x`` s.t. ``A x (senses) b``, ``lb <= x <= ub``.

    Lower bounds must be finite; an infinite upper bound is allowed.
    """
    m, n = A.shape
    fixed = lb == ub
    if fixed.any():
        free = ~fixed
        shift = A[:, fixed] @ lb[fixed]
        sub = _solve_core(A[:, free], senses, b - shift, c[free], lb[free], ub[free], opts)
        if sub.status != OPTIMAL:
            return sub
        x = lb.copy()
        x[free] = sub.x
        return _Result(OPTIMAL, x, float(c @ x), sub.y, sub.iterations)
    return _solve_core(A, senses, b, c, lb, ub, opts)


def _solve_core(A, senses, b, c, lb, ub, opts: SimplexOptions) -> _Result:
    m, n = A.shape
    if not np.all(np.isfinite(lb)):
        raise ValueError("the simplex needs finite lower bounds")
    if m == 0:
        x = np.where(c < 0, ub, lb)
        if not np.all(np.isfinite(x)):
            return _Result(UNBOUNDED)
        return _Result(OPTIMAL, x, float(c @ x), np.zeros(0), 0)

    # slack s_i with a_i x + s_i = b_i
    s_lo = np.where(senses == LE, 0.0, np.where(senses == GE, -np.inf, 0.0))
    s_hi = np.where(senses == LE, np.inf, 0.0)

    x0 = lb.copy()
    resid = b - A @ x0
    infeasible = (resid < s_lo - opts.primal_tol) | (resid > s_hi + opts.primal_tol)
    art_rows = np.flatnonzero(infeasible)
    k = len(art_rows)
    art_sign = np.sign(resid[art_rows])

    N = n + m + k
    M = np.zeros((m, N))
    M[:, :n] = A
    M[:, n:n + m] = np.eye(m)
    M[art_rows, n + m + np.arange(k)] = art_sign
    lo = np.concatenate([lb, s_lo, np.zeros(k)])
    hi = np.concatenate([ub, s_hi, np.full(k, np.inf)])

    xval = np.concatenate([x0, np.zeros(m), np.zeros(k)])
    basis = np.arange(n, n + m)
    basis[art_rows] = n + m + np.arange(k)
    xval[n:n + m] = np.where(infeasible, 0.0, resid)
    xval[n + m:] = np.abs(resid[art_rows])
    B_inv = np.eye(m)
    for j, r in enumerate(art_rows):
        B_inv[r, r] = art_sign[j]

    state = _State(M, b, lo, hi, xval, basis, B_inv, opts, n, art_rows, art_sign)
    if k:
        cost1 = np.zeros(N)
        cost1[n + m:] = 1.0
        status = state.run(cost1)
        if status != OPTIMAL:
            return _Result(status, iterations=state.iterations)
        if xval[n + m:].sum() > opts.phase1_tol * max(1.0, np.abs(b).max()):
            return _Result(INFEASIBLE, iterations=state.iterations)
        hi[n + m:] = 0.0
        xval[n + m:] = np.clip(xval[n + m:], 0.0, 0.0)
        state.refactor()

    cost2 = np.concatenate([c, np.zeros(m + k)])
    status = state.run(cost2)
    if status != OPTIMAL:
        return _Result(status, iterations=state.iterations)
    x = np.clip(xval[:n], lb, ub)
    y = state.duals(cost2)
    return _Result(OPTIMAL, x, float(c @ x), y, state.iterations)


class _State:
    def __init__(self, M, b, lo, hi, xval, basis, B_inv, opts, n, art_rows, art_sign):
        self.M, self.b, self.lo, self.hi = M, b, lo, hi
        self.n, self.art_rows, self.art_sign = n, art_rows, art_sign
        self.A = np.ascontiguousarray(M[:, :n])
        self.col_nz = [np.flatnonzero(M[:, j]) for j in range(M.shape[1])]
        self.x, self.basis, self.B_inv = xval, basis, B_inv
        self.opts = opts
        self.iterations = 0
        self.since_refactor = 0
        self.in_basis = np.zeros(M.shape[1], dtype=bool)
        self.in_basis[basis] = True

    def refactor(self):
        self.B_inv = self._basis_inverse()
        xn = np.where(self.in_basis, 0.0, self.x)
        rhs = self.b - self.M @ xn
        self.x[self.basis] = self.B_inv @ rhs
        self.since_refactor = 0

    def _basis_inverse(self):
        # Slack and artificial columns are signed unit vectors; only the block
        # of structural columns against the rows they cover needs inverting.
        n, m = self.n, len(self.b)
        basis = self.basis
        struct = np.flatnonzero(basis < n)
        unit = np.flatnonzero(basis >= n)
        unit_rows = np.where(basis[unit] < n + m, basis[unit] - n, 0)
        is_art = basis[unit] >= n + m
        unit_rows[is_art] = self.art_rows[basis[unit][is_art] - n - m]
        unit_sign = np.ones(len(unit))
        unit_sign[is_art] = self.art_sign[basis[unit][is_art] - n - m]
        covered = np.zeros(m, dtype=bool)
        covered[unit_rows] = True
        rest = np.flatnonzero(~covered)
        B_inv = np.zeros((m, m))
        if len(struct):
            cols = basis[struct]
            K_inv = np.linalg.inv(self.A[np.ix_(rest, cols)])
            B_inv[np.ix_(struct, rest)] = K_inv
            B_inv[np.ix_(unit, rest)] = -(self.A[np.ix_(unit_rows, cols)] @ K_inv) / unit_sign[:, None]
        B_inv[unit, unit_rows] = 1.0 / unit_sign
        return B_inv

    def duals(self, cost):
        cb = cost[self.basis]
        nz = np.flatnonzero(cb)
        return cb[nz] @ self.B_inv[nz]

    def reduced_costs(self, cost, y):
        # slack and artificial columns are unit vectors, so price them directly
        n, m = self.n, len(y)
        d = np.empty_like(cost)
        d[:n] = cost[:n] - y @ self.A
        d[n:n + m] = cost[n:n + m] - y
        d[n + m:] = cost[n + m:] - y[self.art_rows] * self.art_sign
        return d

    def column(self, j):
        nz = self.col_nz[j]
        return self.B_inv[:, nz] @ self.M[nz, j]

    def run(self, cost) -> str:
        opts = self.opts
        lo, hi, x = self.lo, self.hi, self.x
        bland = False
        stalled = 0
        movable = hi > lo
        while True:
            if self.iterations >= opts.max_iterations:
                return ITERATION_LIMIT
            if self.since_refactor >= opts.refactor_every:
                self.refactor()
            y = self.duals(cost)
            d = self.reduced_costs(cost, y)
            at_upper = (x >= hi - opts.primal_tol) & np.isfinite(hi)
            at_lower = (x <= lo + opts.primal_tol) & np.isfinite(lo)
            cand_up = ~self.in_basis & movable & at_lower & (d < -opts.dual_tol)
            cand_dn = ~self.in_basis & movable & at_upper & ~at_lower & (d > opts.dual_tol)
            # a fixed-at-lower column that is also at upper is not movable
            eligible = cand_up | cand_dn
            if not eligible.any():
                if self.since_refactor:
                    self.refactor()
                    y = self.duals(cost)
                    d = self.reduced_costs(cost, y)
                    at_upper = (x >= hi - opts.primal_tol) & np.isfinite(hi)
                    at_lower = (x <= lo + opts.primal_tol) & np.isfinite(lo)
                    cand_up = ~self.in_basis & movable & at_lower & (d < -opts.dual_tol)
                    cand_dn = ~self.in_basis & movable & at_upper & ~at_lower & (d > opts.dual_tol)
                    if (cand_up | cand_dn).any():
                        continue
                return OPTIMAL
            if bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                j = int(np.argmax(score))
            direction = 1.0 if cand_up[j] else -1.0

            alpha = self.column(j)
            # x_B(t) = x_B - direction * t * alpha
            rate = direction * alpha
            xb = x[self.basis]
            lob, hib = lo[self.basis], hi[self.basis]
            ratios = np.full(len(rate), np.inf)
            dec = rate > opts.pivot_tol
            inc = rate < -opts.pivot_tol
            with np.errstate(divide="ignore", invalid="ignore"):
                ratios[dec] = (xb[dec] - lob[dec]) / rate[dec]
                ratios[inc] = (hib[inc] - xb[inc]) / -rate[inc]
            ratios = np.maximum(ratios, 0.0)
            t_row = ratios.min() if len(ratios) else np.inf
            t_flip = hi[j] - lo[j]
            if not np.isfinite(t_row) and not np.isfinite(t_flip):
                return UNBOUNDED

            if t_flip <= t_row:
                t = t_flip
                x[j] = hi[j] if direction > 0 else lo[j]
                x[self.basis] = xb - direction * t * alpha
                self.iterations += 1
                stalled = 0
                bland = False
                continue

            # Harris-style: among near-minimal ratios take the largest pivot
            near = np.flatnonzero(ratios <= t_row + 1e-12)
            if bland:
                r = int(near[np.argmin(self.basis[near])])
            else:
                r = int(near[np.argmax(np.abs(alpha[near]))])
            t = ratios[r]
            leaving = self.basis[r]
            x[self.basis] = xb - direction * t * alpha
            x[j] = x[j] + direction * t
            x[leaving] = lo[leaving] if rate[r] > 0 else hi[leaving]

            piv = alpha[r]
            row = self.B_inv[r] / piv
            rows_nz = np.flatnonzero(alpha)
            cols_nz = np.flatnonzero(row)
            if len(rows_nz) * len(cols_nz) < 0.3 * row.size * row.size:
                self.B_inv[np.ix_(rows_nz, cols_nz)] -= np.outer(alpha[rows_nz], row[cols_nz])
            else:
                self.B_inv -= np.outer(alpha, row)
            self.B_inv[r] = row
            self.in_basis[leaving] = False
            self.in_basis[j] = True
            self.basis[r] = j
            self.iterations += 1
            self.since_refactor += 1

            if t * abs(d[j]) <= 1e-12:
                stalled += 1
                if stalled >= opts.stall_limit:
                    bland = True
            else:
                stalled = 0
                bland = False


def solve_lp(m: Model, options: SimplexOptions | None = None) -> LpOutcome:
    """Solve the LP relaxation of ``m`` (integrality flags are ignored)."""
    opts = options or SimplexOptions()
    arr = m.arrays
    sign = -1.0 if m.objective.sense == MAX else 1.0
    res = _solve_arrays(arr.A, arr.senses, arr.b, sign * arr.c, arr.lb, arr.ub, opts)
    if res.status != OPTIMAL:
        return LpOutcome(res.status, iterations=res.iterations)
    obj = m.objective.constant + float(arr.c @ res.x)
    duals = {con.id: float(sign * yi) for con, yi in zip(m.constraints, res.y)}
    return LpOutcome(OPTIMAL, obj, m.point(res.x), res.iterations, duals)


def dual_bound(m: Model, duals: Mapping[str, float], exact: bool = False):
    """Objective bound implied by row multipliers ``duals`` (weak duality).

    For a minimisation the result is a lower bound on the LP optimum, for a
    maximisation an upper bound. Multipliers with the wrong sign for their
    row are treated as zero. With ``exact=True`` the computation is carried
    out in rationals (multipliers and data are converted with
    :class:`fractions.Fraction`).
    """
    conv = Fraction if exact else float
    maximize = m.objective.sense == MAX
    red = {v.key: conv(0) for v in m.variables}
    for k, c in m.objective.terms:
        red[k] += conv(c)
    total = conv(m.objective.constant)
    for con in m.constraints:
        u = conv(duals.get(con.id, 0))
        # sign convention: min -> <= rows carry u <= 0; max -> <= rows u >= 0
        if con.sense == LE:
            u = max(u, 0) if maximize else min(u, 0)
        elif con.sense == GE:
            u = min(u, 0) if maximize else max(u, 0)
        if u == 0:
            continue
        total += u * conv(con.rhs)
        for k, a in con.terms:
            red[k] -= u * conv(a)
    for v in m.variables:
        d = red[v.key]
        lo, hi = conv(v.lb), conv(v.ub)
        if maximize:
            total += d * (hi if d > 0 else lo)
        else:
            total += d * (lo if d > 0 else hi)
    return total


def maximize_expr_over(
    m: Model, expr: Iterable[tuple[VarKey, float]], options: SimplexOptions | None = None
) -> LpOutcome:
    """Maximise a linear expression over the LP relaxation of ``m``."""
    objective = Objective(MAX, tuple(expr), 0.0)
    return solve_lp(relax(m).with_objective(objective), options)


# -- branch and bound ---------------------------------------------------------

RootCutCallback = Callable[[dict], Sequence[Constraint]]


def solve_mip(
    m: Model,
    time_limit: float = 60.0,
    gap_tol: float = 1e-6,
    root_cuts: RootCutCallback | None = None,
    options: SimplexOptions | None = None,
) -> MipOutcome:
    """Best-bound branch and bound on the most fractional variable.

    ``root_cuts`` may return rows violated by the root LP point; they are
    added and the root LP is re-solved until the callback returns nothing.
    On a timeout the outcome carries the incumbent (if any) and the best
    remaining bound.
    """
    opts = options or SimplexOptions()
    start = time.perf_counter()
    maximize = m.objective.sense == MAX
    sign = -1.0 if maximize else 1.0
    const = m.objective.constant
    lp_iters = 0

    def finish(status, inc_key, bound_key, point, nodes):
        to_user = lambda key: const + sign * key  # noqa: E731
        inc = None if inc_key is None else to_user(inc_key)
        return MipOutcome(
            status, inc, to_user(bound_key), point, nodes,
            time.perf_counter() - start, lp_iters, m.objective.sense,
        )

    if root_cuts is not None:
        while True:
            res = solve_lp(relax(m), opts)
            lp_iters += res.iterations
            if not res.optimal:
                break
            cuts = list(root_cuts(res.point))
            if not cuts:
                break
            m = m.with_constraints(cuts)

    arr = m.arrays
    A, senses, b, lb0, ub0 = arr.A, arr.senses, arr.b, arr.lb, arr.ub
    c = sign * arr.c
    integer = arr.integer
    int_obj = bool(
        np.all(integer[c != 0]) and np.all(np.abs(c - np.round(c)) < 1e-12)
    )

    def key_of(obj):
        # integral objective coefficients on integer variables admit rounding up
        return math.ceil(obj - 1e-6) if int_obj else obj

    res = _solve_arrays(A, senses, b, c, lb0, ub0, opts)
    lp_iters += res.iterations
    nodes = 1
    if res.status == INFEASIBLE:
        return finish(INFEASIBLE, None, math.inf, None, nodes)
    if res.status != OPTIMAL:
        raise RuntimeError(f"root LP ended with status {res.status}")

    inc_key = None
    inc_x = None
    heap = []
    counter = 0
    heapq.heappush(heap, (key_of(res.obj), counter, lb0, ub0, res.x))

    while heap:
        key, _, lb, ub, x = heap[0]
        if inc_key is not None and key >= inc_key - gap_tol:
            break
        if time.perf_counter() - start > time_limit:
            point = m.point(inc_x) if inc_x is not None else None
            return finish(TIME_LIMIT, inc_key, key, point, nodes)
        heapq.heappop(heap)

        frac = np.abs(x - np.round(x))
        frac[~integer] = 0.0
        j = int(np.argmax(frac))
        if frac[j] <= 1e-6:
            xr = np.where(integer, np.round(x), x)
            obj = float(c @ xr)
            if inc_key is None or obj < inc_key:
                inc_key, inc_x = obj, xr
            continue

        for lo_j, hi_j in ((lb[j], math.floor(x[j])), (math.ceil(x[j]), ub[j])):
            clb, cub = lb.copy(), ub.copy()
            clb[j], cub[j] = lo_j, hi_j
            child = _solve_arrays(A, senses, b, c, clb, cub, opts)
            lp_iters += child.iterations
            nodes += 1
            if child.status != OPTIMAL:
                continue
            ck = key_of(child.obj)
            if inc_key is not None and ck >= inc_key - gap_tol:
                continue
            cfrac = np.abs(child.x - np.round(child.x))
            cfrac[~integer] = 0.0
            if cfrac.max() <= 1e-6:
                xr = np.where(integer, np.round(child.x), child.x)
                obj = float(c @ xr)
                if inc_key is None or obj < inc_key:
                    inc_key, inc_x = obj, xr
                continue
            counter += 1
            heapq.heappush(heap, (ck, counter, clb, cub, child.x))

    if inc_key is None:
        return finish(INFEASIBLE, None, math.inf, None, nodes)
    bound = heap[0][0] if heap else inc_key
    bound = min(bound, inc_key)
    return finish(OPTIMAL, inc_key, bound, m.point(inc_x), nodes)
