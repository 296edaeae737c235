"""Experiment driver: solve both models over a battery and summarise LP gaps.

One :class:`ExperimentRecord` is produced per (instance, problem, H, model).
:func:`summarize` groups records by (n, H) and reports mean LP gaps per
model and how often the partial-ordering relaxation is strictly tighter.
The gap of model M is ``(opt - lp_M) / opt`` where ``opt`` is the best
integer value found by either model; for maximisation the sign is flipped
so the gap stays nonnegative.
"""

from __future__ import annotations

import csv
import io
import math
import os
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .formulations import (
    HopTreeModel,
    SoundnessError,
    build_model,
    decode_tree,
    separate_walk_cuts,
    walk_cut,
)
from .instances import Instance, derive_hstp_terminals
from .milp import MAX, relax
from .simplex import solve_lp, solve_mip

__all__ = [
    "CSV_HEADER",
    "ExperimentRecord",
    "GapSummary",
    "default_time_limit",
    "prepare_instance",
    "root_walk_cut_loop",
    "run_battery",
    "run_experiment",
    "summarize",
    "write_csv",
]

CSV_HEADER = ("instance", "problem", "H", "model", "lp", "status", "incumbent", "bound", "time_s")
PROBLEMS = ("hmstp", "hstp", "stprbh")
DEFAULT_TIME_LIMIT = 60.0


def default_time_limit() -> float:
    raw = os.environ.get("HOPTREE_TIME_LIMIT")
    if raw is None:
        return DEFAULT_TIME_LIMIT
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"HOPTREE_TIME_LIMIT must be a number, got {raw!r}") from None
    if not value > 0:
        raise ValueError("HOPTREE_TIME_LIMIT must be positive")
    return value


@dataclass
class ExperimentRecord:
    instance: str
    problem: str  # HMSTP, HSTP or STPRBH
    H: int
    model: str  # A or P
    lp: float | None
    status: str  # IP status, or "LP" when only the relaxation was solved
    incumbent: float | None
    bound: float | None
    time_s: float
    node_count: int = 0
    sense: str = "min"

    def __post_init__(self):
        if (
            self.sense == "min"
            and self.incumbent is not None
            and self.bound is not None
            and self.bound > self.incumbent + 1e-6
        ):
            raise ValueError(f"bound {self.bound} above incumbent {self.incumbent}")

    def row(self, precision: str = "table") -> list[str]:
        def num(v, digits):
            if v is None or (isinstance(v, float) and math.isnan(v)):
                return ""
            if precision == "full":
                return repr(float(v))
            return f"{v:.{digits}f}"

        integral = lambda v: num(v, 0) if v is not None and float(v).is_integer() else num(v, 2)  # noqa: E731
        return [
            self.instance,
            self.problem,
            str(self.H),
            self.model,
            num(self.lp, 2),
            self.status,
            integral(self.incumbent),
            integral(self.bound),
            f"{self.time_s:.3f}",
        ]


@dataclass
class GapSummary:
    """Mean LP gap per model for each (n, H), plus strict-dominance counts per H."""

    mean_gap: dict[tuple[int, int], dict[str, float | None]] = field(default_factory=dict)
    strict: dict[int, int] = field(default_factory=dict)
    counts: dict[tuple[int, int], int] = field(default_factory=dict)
    compared: dict[int, int] = field(default_factory=dict)

    def format(self) -> str:
        out = io.StringIO()
        out.write("# gap summary\n")
        out.write("n,H,instances,gap_A,gap_P\n")
        for (n, H) in sorted(self.mean_gap):
            g = self.mean_gap[n, H]
            cell = lambda v: "" if v is None else f"{v:.4f}"  # noqa: E731
            out.write(f"{n},{H},{self.counts[n, H]},{cell(g.get('A'))},{cell(g.get('P'))}\n")
        out.write("# strict dominance (P relaxation strictly tighter)\n")
        out.write("H,strict,compared\n")
        for H in sorted(self.compared):
            out.write(f"{H},{self.strict.get(H, 0)},{self.compared[H]}\n")
        return out.getvalue()


def prepare_instance(inst: Instance, problem: str, hop: int | None = None) -> Instance:
    """Apply the hop limit and the terminal convention for ``problem``.

    HSTP on a file where every node is a terminal uses the derived terminal
    set (first half of the nodes plus the root).
    """
    problem = problem.lower()
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    if hop is not None:
        inst = inst.with_hop_limit(hop)
    if problem == "hstp" and inst.terminals == frozenset(inst.nodes):
        inst = derive_hstp_terminals(inst)
    if problem == "stprbh" and not inst.has_revenues:
        raise ValueError(f"instance {inst.name or '?'} has no revenues/budget for STPRBH")
    return inst


def root_walk_cut_loop(hm: HopTreeModel, max_rounds: int = 100, tol: float = 1e-6):
    """Add violated walk cuts at the root LP until none remain.

    Returns ``(lp_outcome, model_with_cuts, cuts_added)``.
    """
    model = hm.model
    added = []
    res = solve_lp(relax(model))
    for _ in range(max_rounds):
        if not res.optimal:
            break
        found = separate_walk_cuts(hm.instance, res.point, tol=tol)
        fresh = [walk_cut(w, hm.hop_limit) for w, _ in found]
        have = {c.id for c in model.constraints}
        fresh = [c for c in fresh if c.id not in have]
        if not fresh:
            break
        added.extend(fresh)
        model = model.with_constraints(fresh)
        res = solve_lp(relax(model))
    return res, hm.with_model(model), added


def run_experiment(
    inst: Instance,
    problem: str,
    kind: str,
    time_limit: float | None = None,
    lp_only: bool = False,
) -> ExperimentRecord:
    """Solve one model on an already prepared instance."""
    time_limit = default_time_limit() if time_limit is None else time_limit
    start = time.perf_counter()
    hm = build_model(inst, kind, problem)
    lp = solve_lp(relax(hm.model))
    lp_value = lp.objective if lp.optimal else None
    incumbent = bound = None
    status = "LP" if lp.optimal else lp.status
    if not lp_only and lp.optimal:
        remaining = max(0.0, time_limit - (time.perf_counter() - start))
        mip = solve_mip(hm.model, time_limit=remaining)
        status, incumbent, bound = mip.status, mip.incumbent, mip.bound
        if bound is not None and math.isinf(bound):
            bound = None
    return ExperimentRecord(
        instance=inst.name,
        problem=hm.problem,
        H=inst.hop_limit,
        model=kind.upper(),
        lp=lp_value,
        status=status,
        incumbent=incumbent,
        bound=bound,
        time_s=time.perf_counter() - start,
        node_count=inst.node_count,
        sense="max" if hm.model.objective.sense == MAX else "min",
    )


def _job(args):
    return run_experiment(*args)


def run_battery(
    instances: Iterable[Instance],
    hops: Sequence[int],
    problems: Sequence[str],
    time_limit: float | None = None,
    lp_only: bool = False,
    jobs: int = 1,
) -> list[ExperimentRecord]:
    """Every (instance, problem, H) with both models, in a stable order."""
    tasks = []
    for inst in instances:
        for problem in problems:
            for H in hops:
                prepared = prepare_instance(inst, problem, H)
                for kind in ("A", "P"):
                    tasks.append((prepared, problem, kind, time_limit, lp_only))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_job, tasks))
    return [_job(t) for t in tasks]


def _gap(opt: float, lp: float, sense: str) -> float | None:
    if opt == 0:
        return None
    gap = (opt - lp) / abs(opt)
    return -gap if sense == "max" else gap


def summarize(records: Sequence[ExperimentRecord], strict_tol: float = 1e-6) -> GapSummary:
    """Group records by (instance, problem, H) and compare the two models."""
    groups: dict[tuple, dict[str, ExperimentRecord]] = defaultdict(dict)
    for rec in records:
        groups[rec.instance, rec.problem, rec.H][rec.model] = rec
    gaps: dict[tuple[int, int], dict[str, list[float]]] = defaultdict(lambda: defaultdict(list))
    summary = GapSummary()
    for (_, _, H), pair in sorted(groups.items()):
        any_rec = next(iter(pair.values()))
        n, sense = any_rec.node_count, any_rec.sense
        summary.counts[n, H] = summary.counts.get((n, H), 0) + 1
        incumbents = [r.incumbent for r in pair.values() if r.incumbent is not None]
        if incumbents:
            opt = max(incumbents) if sense == "max" else min(incumbents)
            for kind, rec in pair.items():
                if rec.lp is not None:
                    g = _gap(opt, rec.lp, sense)
                    if g is not None:
                        gaps[n, H][kind].append(g)
        a, p = pair.get("A"), pair.get("P")
        if a is not None and p is not None and a.lp is not None and p.lp is not None:
            summary.compared[H] = summary.compared.get(H, 0) + 1
            better = p.lp - a.lp if sense == "min" else a.lp - p.lp
            if better > strict_tol:
                summary.strict[H] = summary.strict.get(H, 0) + 1
    for key in summary.counts:
        per = gaps.get(key, {})
        summary.mean_gap[key] = {
            kind: (sum(per[kind]) / len(per[kind]) if per.get(kind) else None) for kind in ("A", "P")
        }
    return summary


def write_csv(records: Sequence[ExperimentRecord], stream, precision: str = "table") -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rec in records:
        writer.writerow(rec.row(precision))


def decoded_edges(hm: HopTreeModel, point) -> list[tuple[int, int]] | None:
    try:
        return decode_tree(hm, point).edge_list()
    except SoundnessError:
        return None
