import math
from fractions import Fraction

import numpy as np
import pytest

from hoptree.formulations import build_aht, build_model, build_pht, decode_tree, walk_cut
from hoptree.instances import Walk, attach_revenues, derive_hstp_terminals, generate_euclidean, generate_random
from hoptree.milp import EQ, GE, LE, MAX, MIN, Constraint, Model, Objective, Variable, X, relax, violated_constraints
from hoptree.simplex import (
    INFEASIBLE,
    OPTIMAL,
    TIME_LIMIT,
    UNBOUNDED,
    SimplexOptions,
    dual_bound,
    maximize_expr_over,
    solve_lp,
    solve_mip,
)

from cases import A, B, C, R, k4
from oracles import brute_force_optimum, highs_lp


def one_var(lb=0.0, ub=1.0, rows=(), sense=MIN, coef=1.0):
    x = X(1, 2)
    cons = tuple(Constraint(f"c{i}", ((x, a),), s, b) for i, (a, s, b) in enumerate(rows))
    return Model((Variable(x, lb, ub, False),), cons, Objective(sense, ((x, coef),)))


def test_single_variable_lower_row():
    res = solve_lp(one_var(rows=[(1, GE, 0.3)]))
    assert res.status == OPTIMAL and res.objective == pytest.approx(0.3)


def test_infeasible_and_unbounded():
    assert solve_lp(one_var(rows=[(1, GE, 2)])).status == INFEASIBLE
    assert solve_lp(one_var(ub=math.inf, sense=MAX)).status == UNBOUNDED
    assert solve_lp(one_var(ub=math.inf, sense=MAX, rows=[(1, GE, 0.5)])).status == UNBOUNDED
    assert solve_lp(one_var(ub=math.inf, rows=[(1, GE, 0.5)])).objective == pytest.approx(0.5)


def test_equality_and_fixed_columns():
    x, y, z = X(1, 2), X(2, 1), X(1, 3)
    m = Model(
        (Variable(x, 0, 4, False), Variable(y, 0, 4, False), Variable(z, 0.5, 0.5, False)),
        (Constraint("e", ((x, 1), (y, 1), (z, 2)), EQ, 3), Constraint("l", ((x, 1), (y, -1)), LE, 0.5)),
        Objective(MIN, ((x, -1), (y, 2), (z, 3))),
    )
    res = solve_lp(m)
    assert res.objective == pytest.approx(highs_lp(m)[1])
    assert res.point[z] == 0.5


def test_star_costs_give_star_lp():
    inst = k4(cost=lambda u, v: 1 if R in (u, v) else 10)
    for kind in "PA":
        assert solve_lp(build_model(inst, kind, "hmstp").model).objective == pytest.approx(3)


def test_walk_expression_maxima():
    expr = [(X(A, B), 1.0), (X(B, C), 1.0)]
    assert maximize_expr_over(build_pht(k4()).model, expr).objective == pytest.approx(1)
    # the fractional 3-cycle point reaches 4/3; the A relaxation allows more
    a_max = maximize_expr_over(build_aht(k4()).model, expr).objective
    assert a_max >= 4 / 3 - 1e-9
    assert a_max == pytest.approx(highs_lp(build_aht(k4()).model.with_objective(Objective(MAX, tuple(expr))))[1])
    assert maximize_expr_over(build_aht(k4()).model, []).objective == 0


def battery():
    for n in (4, 5, 6, 7):
        for H in (2, 3):
            for problem in ("hmstp", "hstp", "stprbh"):
                inst = generate_random(n, 10 * n + H).with_hop_limit(H)
                if problem == "hstp":
                    inst = derive_hstp_terminals(inst)
                if problem == "stprbh":
                    inst = attach_revenues(inst, n)
                yield inst, problem


@pytest.mark.parametrize("inst,problem", list(battery()), ids=lambda v: getattr(v, "name", v))
def test_lp_matches_highs_with_dual_certificate(inst, problem):
    for kind in "AP":
        m = build_model(inst, kind, problem).model
        res = solve_lp(m)
        status, ref = highs_lp(m)
        assert res.status == status == OPTIMAL
        assert abs(res.objective - ref) <= 1e-6 * max(1, abs(ref))
        assert violated_constraints(relax(m), res.point, tol=1e-6) == []
        bound = dual_bound(m, res.duals)
        assert abs(bound - res.objective) <= 1e-6 * max(1, abs(ref))


def test_dual_bound_is_a_bound_for_any_multipliers():
    m = build_model(generate_random(5, 3).with_hop_limit(2), "P", "hmstp").model
    opt = solve_lp(m).objective
    rng = np.random.default_rng(1)
    for _ in range(20):
        duals = {c.id: float(rng.normal()) for c in m.constraints}
        assert dual_bound(m, duals) <= opt + 1e-9
    exact = dual_bound(m, {c.id: Fraction(1, 3) for c in m.constraints}, exact=True)
    assert isinstance(exact, Fraction) and exact <= opt + 1e-9


def test_lp_deterministic():
    m = build_model(generate_euclidean(6, 2).with_hop_limit(3), "A", "hmstp").model
    a, b = solve_lp(m), solve_lp(m)
    assert a.objective == b.objective and a.point == b.point and a.iterations == b.iterations


def test_bland_fallback_and_refactor_settings_agree():
    m = build_model(generate_random(6, 8).with_hop_limit(3), "P", "hmstp").model
    base = solve_lp(m).objective
    for opts in (SimplexOptions(stall_limit=0), SimplexOptions(refactor_every=5)):
        assert solve_lp(m, opts).objective == pytest.approx(base, abs=1e-7)


def test_iteration_limit_reported():
    m = build_model(generate_random(6, 8).with_hop_limit(3), "P", "hmstp").model
    assert solve_lp(m, SimplexOptions(max_iterations=3)).status == "IterationLimit"


def test_integral_lp_solves_at_root():
    inst = k4(cost=lambda u, v: 1 if R in (u, v) else 10, hop=1)
    out = solve_mip(build_model(inst, "P", "hmstp").model)
    assert out.status == OPTIMAL and out.nodes == 1 and out.incumbent == 3


@pytest.mark.parametrize("seed", range(6))
def test_mip_matches_brute_force(seed):
    n, H = 4 + seed % 3, 2 + seed % 2
    inst = generate_random(n, seed, 1, 30).with_hop_limit(H)
    for problem in ("hmstp", "hstp"):
        target = derive_hstp_terminals(inst) if problem == "hstp" else inst
        expected = brute_force_optimum(target, problem)
        for kind in "AP":
            hm = build_model(target, kind, problem)
            out = solve_mip(hm.model)
            assert out.status == OPTIMAL
            assert out.incumbent == expected
            assert out.bound <= out.incumbent + 1e-6
            assert violated_constraints(hm.model, out.point, tol=1e-6) == []
            tree = decode_tree(hm, out.point)
            assert target.terminals <= tree.nodes
            assert tree.cost(target) == expected


def test_six_nodes_hop_three_brute_force():
    inst = generate_random(6, 11, 1, 50).with_hop_limit(3)
    expected = brute_force_optimum(inst, "hmstp")
    assert solve_mip(build_model(inst, "P", "hmstp").model).incumbent == expected


def test_stprbh_mip_matches_brute_force():
    inst = attach_revenues(generate_random(5, 3, 1, 30).with_hop_limit(2), seed=3)
    expected = brute_force_optimum(inst, "stprbh")
    for kind in "AP":
        out = solve_mip(build_model(inst, kind, "stprbh").model)
        assert out.incumbent == expected and out.bound >= out.incumbent - 1e-6


def test_time_limit_returns_interval():
    inst = generate_euclidean(8, 3).with_hop_limit(3)
    out = solve_mip(build_model(inst, "A", "hmstp").model, time_limit=0.0)
    assert out.status == TIME_LIMIT
    lo, hi = out.interval
    assert lo <= hi


def test_mip_infeasible():
    m = one_var(rows=[(1, GE, 0.2), (1, LE, 0.8)])
    m = Model(tuple(v._replace(integer=True) for v in m.variables), m.constraints, m.objective)
    out = solve_mip(m)
    assert out.status == INFEASIBLE and out.incumbent is None


@pytest.mark.parametrize("seed", range(5))
def test_adding_walk_cuts_never_lowers_the_bound(seed):
    rng = np.random.default_rng(seed)
    inst = generate_random(5, seed).with_hop_limit(2)
    m = build_model(inst, "A", "hmstp").model
    base = solve_lp(m).objective
    nodes = [v for v in inst.nodes if v != inst.root]
    cuts = []
    for j in range(4):
        a, b, c = rng.choice(nodes, 3, replace=False)
        cuts.append(walk_cut(Walk.from_nodes([int(a), int(b), int(c)]), 2, id=f"W-rand[{j}]"))
        value = solve_lp(m.with_constraints(cuts)).objective
        assert value >= base - 1e-9
        base = value


def test_root_cut_callback_is_used():
    inst = k4(hop=2)
    m = build_model(inst, "A", "hmstp").model
    calls = []

    def cb(point):
        calls.append(point)
        return [] if len(calls) > 1 else [walk_cut(Walk.from_nodes([A, B, C]), 2)]

    out = solve_mip(m, root_cuts=cb)
    assert len(calls) == 2 and out.status == OPTIMAL and out.incumbent == 3
