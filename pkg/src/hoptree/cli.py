"""``hoptree`` command line: generate, solve, compare, certify, export.

Exit codes: 0 on success, 2 on usage or input errors, 3 when a
certification run is inconclusive.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import bench
from .formulations import FormulationError, build_model
from .instances import (
    InstanceError,
    attach_revenues,
    derive_hstp_terminals,
    generate_euclidean,
    generate_random,
    read_instance,
    write_instance,
)
from .lpfile import export_lp
from .milp import relax
from .polyhedra import COUNTEREXAMPLE, INCONCLUSIVE, certify_inclusion, support_dominance
from .simplex import solve_lp, solve_mip

EXIT_OK, EXIT_USAGE, EXIT_INCONCLUSIVE = 0, 2, 3


class UsageError(Exception):
    pass


def _range(text: str) -> list[int]:
    """``"2..10"`` or ``"2,4,6"`` or ``"5"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}") from None


def _pair(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.replace("..", ",").split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; use LO,HI") from None
    return lo, hi


def _problems(text: str) -> list[str]:
    names = [t.strip().lower() for t in text.split(",") if t.strip()]
    bad = [n for n in names if n not in bench.PROBLEMS]
    if bad or not names:
        raise argparse.ArgumentTypeError(f"unknown problem(s) {','.join(bad) or text!r}")
    return names


def _num(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float) and (math.isinf(v) or math.isnan(v)):
        return str(v)
    return f"{float(v):.6g}" if not float(v).is_integer() else str(int(v))


# -- subcommands ---------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.family == "tc":
        if args.cost_range is not None:
            raise UsageError("--cost-range applies to the tr family")
        inst = generate_euclidean(args.n, args.seed, grid=args.grid or 100)
    else:
        if args.grid is not None:
            raise UsageError("--grid applies to the tc family")
        lo, hi = args.cost_range or (1, 100)
        inst = generate_random(args.n, args.seed, lo, hi)
    inst = inst.with_hop_limit(args.hop)
    if args.hstp_terminals:
        inst = derive_hstp_terminals(inst)
    if args.revenues:
        inst = attach_revenues(inst, args.seed)
    data = write_instance(inst)
    if args.out:
        out = Path(args.out)
        if out.is_dir():
            out = out / f"{inst.name}.txt"
        out.write_bytes(data)
        print(out)
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = bench.prepare_instance(read_instance(args.instance), args.problem, args.hop)
    hm = build_model(inst, args.model, args.problem)
    time_limit = args.time_limit if args.time_limit is not None else bench.default_time_limit()
    print(f"instance {inst.name}  problem {hm.problem}  model {hm.kind}  H {inst.hop_limit}")

    model = hm.model
    if args.cuts == "root-walk":
        res, cut_hm, cuts = bench.root_walk_cut_loop(hm)
        print(f"walk cuts added {len(cuts)}")
        if hm.kind == "P" and cuts:
            print("error: walk cuts were violated by the partial-ordering relaxation", file=sys.stderr)
            return 1
        model = cut_hm.model
    else:
        res = solve_lp(relax(model))
    print(f"lp status {res.status}")
    if not res.optimal:
        return EXIT_OK
    print(f"lp {res.objective:.6f}")
    if args.lp_only:
        return EXIT_OK
    mip = solve_mip(model, time_limit=time_limit)
    lo, hi = mip.interval
    print(f"status {mip.status}")
    print(f"incumbent {_num(mip.incumbent)}  bound {_num(mip.bound)}  interval [{_num(lo)}, {_num(hi)}]")
    print(f"nodes {mip.nodes}  time_s {mip.wall_time:.3f}")
    if mip.point is not None:
        edges = bench.decoded_edges(hm, mip.point)
        print("tree " + " ".join(f"{u}-{v}" for u, v in edges) if edges is not None else "tree ?")
    return EXIT_OK


def cmd_compare(args) -> int:
    folder = Path(args.instances)
    if not folder.is_dir():
        raise UsageError(f"{folder} is not a directory")
    files = sorted(p for p in folder.iterdir() if p.is_file() and not p.name.startswith("."))
    if not files:
        raise UsageError(f"no instance files in {folder}")
    instances = []
    for path in files:
        try:
            instances.append(read_instance(path))
        except InstanceError as exc:
            raise UsageError(f"{path}: {exc}") from None
    records = bench.run_battery(
        instances, args.hops, args.problems, args.time_limit, args.lp_only, args.jobs
    )
    precision = "full" if args.precision == "full" else "table"
    if args.out:
        with open(args.out, "w", newline="") as fh:
            bench.write_csv(records, fh, precision)
    else:
        bench.write_csv(records, sys.stdout, precision)
    summary = bench.summarize(records).format()
    if args.summary:
        Path(args.summary).write_text(summary)
    (sys.stdout if args.out else sys.stderr).write(summary)
    return EXIT_OK


def cmd_certify(args) -> int:
    inst = generate_random(args.n, args.seed).with_hop_limit(args.hop)
    inst = bench.prepare_instance(inst, args.problem)
    a = build_model(inst, "A", args.problem)
    p = build_model(inst, "P", args.problem)
    source, target = (a, p) if args.direction == "ap" else (p, a)
    report = certify_inclusion(source, target)
    print(f"instance {inst.name}  H {inst.hop_limit}  direction {args.direction}")
    print(f"verdict {report.verdict}")
    if report.message:
        print(f"note {report.message}")
    if report.worst_slack is not None:
        label = "exact" if report.exact else "float"
        print(f"worst slack {report.worst_slack} ({label}, {report.checked} rows)")
    if report.verdict == COUNTEREXAMPLE and report.violated_row is not None:
        print(f"violated row {report.violated_row}")
    if args.trials:
        margin = support_dominance(source, target, trials=args.trials, seed=args.seed)
        print(f"support margin {margin:.3e} over {args.trials} directions")
    return EXIT_INCONCLUSIVE if report.verdict == INCONCLUSIVE else EXIT_OK


def cmd_export(args) -> int:
    inst = bench.prepare_instance(read_instance(args.instance), args.problem, args.hop)
    hm = build_model(inst, args.model, args.problem)
    export_lp(hm.model, args.out)
    print(args.out)
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hoptree", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random instance file")
    g.add_argument("--family", choices=("tc", "tr"), required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--grid", type=int, help="coordinate range for tc instances")
    g.add_argument("--cost-range", type=_pair, metavar="LO,HI", help="cost range for tr instances")
    g.add_argument("--hop", type=int, default=0, help="hop limit stored in the file")
    g.add_argument("--hstp-terminals", action="store_true")
    g.add_argument("--revenues", action="store_true", help="attach revenues and a budget")
    g.add_argument("--out", help="file or directory (default: stdout)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve one model on one instance")
    s.add_argument("--instance", required=True)
    s.add_argument("--problem", choices=bench.PROBLEMS, required=True)
    s.add_argument("--model", choices=("a", "p", "A", "P"), required=True)
    s.add_argument("--hop", type=int)
    s.add_argument("--lp-only", action="store_true")
    s.add_argument("--time-limit", type=float)
    s.add_argument("--cuts", choices=("root-walk",))
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("compare", help="run both models over a directory of instances")
    c.add_argument("--instances", required=True)
    c.add_argument("--hops", type=_range, default=list(range(2, 11)))
    c.add_argument("--problems", type=_problems, default=["hmstp", "hstp"])
    c.add_argument("--time-limit", type=float)
    c.add_argument("--out", help="CSV file (default: stdout)")
    c.add_argument("--summary", help="also write the gap summary to this file")
    c.add_argument("--precision", choices=("table", "full"), default="table")
    c.add_argument("--lp-only", action="store_true")
    c.add_argument("--jobs", type=int, default=1)
    c.set_defaults(func=cmd_compare)

    k = sub.add_parser("certify", help="compare the models' projections exactly")
    k.add_argument("--n", type=int, choices=range(3, 6), required=True, metavar="{3..5}")
    k.add_argument("--hop", type=int, choices=range(1, 4), required=True, metavar="{1..3}")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--problem", choices=("hstp", "hmstp"), default="hstp")
    k.add_argument("--direction", choices=("ap", "pa"), default="ap")
    k.add_argument("--trials", type=int, default=0)
    k.set_defaults(func=cmd_certify)

    e = sub.add_parser("export", help="write a model in LP format")
    e.add_argument("--instance", required=True)
    e.add_argument("--problem", choices=bench.PROBLEMS, required=True)
    e.add_argument("--model", choices=("a", "p", "A", "P"), required=True)
    e.add_argument("--hop", type=int)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except (UsageError, InstanceError, FormulationError, ValueError, OSError) as exc:
        print(f"hoptree: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
