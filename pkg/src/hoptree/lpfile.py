"""Reading and writing models in the CPLEX LP text format.

Only the subset needed for our models is supported: one objective, linear
rows, finite bounds and a ``Generals`` section. Numbers are written with
17 significant digits so a write/read cycle reproduces every coefficient.
An empty objective is written as ``obj: 0``.

Constraint ids such as ``F-arc[u=1,v=2,i=0]`` contain characters that LP
readers reject, so they are encoded reversibly: ``-`` becomes ``_``, ``[``
``]`` become ``(`` ``)`` and ``=`` becomes ``.``.
"""

from __future__ import annotations

import re
from pathlib import Path

from .milp import EQ, GE, LE, MAX, MIN, Constraint, Model, Objective, Variable, VarKey

__all__ = ["LpFormatError", "decode_name", "encode_name", "export_lp", "parse_lp", "read_lp", "write_lp"]

_ENCODE = str.maketrans({"-": "_", "[": "(", "]": ")", "=": "."})
_DECODE = str.maketrans({"_": "-", "(": "[", ")": "]", ".": "="})


class LpFormatError(ValueError):
    pass


def encode_name(id: str) -> str:
    if any(ch in id for ch in "_().:") or " " in id:
        raise LpFormatError(f"constraint id {id!r} cannot be encoded")
    return id.translate(_ENCODE)


def decode_name(name: str) -> str:
    return name.translate(_DECODE)


def _num(c: float) -> str:
    return format(float(c), ".17g")


def _expr(terms) -> str:
    parts = []
    for k, c in terms:
        c = float(c)
        sign = "-" if c < 0 else "+"
        parts.append(f"{sign} {_num(abs(c))} {k.name}")
    if not parts:
        return "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def write_lp(m: Model) -> str:
    lines = [r"\ hop-constrained tree model"]
    lines.append("Maximize" if m.objective.sense == MAX else "Minimize")
    obj = _expr(m.objective.terms)
    const = float(m.objective.constant)
    if const and obj == "0":
        obj = _num(const)
    elif const:
        obj += f" {'-' if const < 0 else '+'} {_num(abs(const))}"
    lines.append(f" obj: {obj}")
    lines.append("Subject To")
    for con in m.constraints:
        op = {LE: "<=", GE: ">=", EQ: "="}[con.sense]
        lines.append(f" {encode_name(con.id)}: {_expr(con.terms)} {op} {_num(con.rhs)}")
    lines.append("Bounds")
    for v in m.variables:
        lines.append(f" {_num(v.lb)} <= {v.key.name} <= {_num(v.ub)}")
    ints = [v.key.name for v in m.variables if v.integer]
    if ints:
        lines.append("Generals")
        for i in range(0, len(ints), 8):
            lines.append(" " + " ".join(ints[i:i + 8]))
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(m: Model, path) -> Path:
    path = Path(path)
    path.write_text(write_lp(m), encoding="utf-8")
    return path


_TOKEN = re.compile(
    r"\s*(?:(?P<op>[+-])|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?|inf)|(?P<name>[A-Za-z]\w*))\s*"
)


def _parse_expr(text: str, lineno: int):
    """Parse ``+ 3 x_1_2 - 1 l_2_0 + 5`` into terms and a constant."""
    terms: list[tuple[VarKey, float]] = []
    const = 0.0
    text = text.strip()
    if text == "0":
        return terms, const
    sign = 1.0
    coef = None
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise LpFormatError(f"line {lineno}: cannot parse {text[pos:]!r}")
        pos = m.end()
        op, number, name = m.group("op"), m.group("num"), m.group("name")
        if op:
            if coef is not None:
                const += sign * coef
                coef = None
            sign = 1.0 if op == "+" else -1.0
        elif number:
            coef = float(number)
        elif name:
            try:
                key = VarKey.parse(name)
            except ValueError:
                raise LpFormatError(f"line {lineno}: bad variable name {name!r}") from None
            terms.append((key, sign * (1.0 if coef is None else coef)))
            coef = None
            sign = 1.0
    if coef is not None:
        const += sign * coef
    return terms, const


def parse_lp(text: str) -> Model:
    """Parse the LP subset written by :func:`write_lp`."""
    section = None
    sense = None
    objective = Objective()
    rows = []
    bounds = {}
    order: list[VarKey] = []
    bound_order: list[VarKey] = []
    generals = set()

    def note(k):
        if k not in bounds:
            bounds[k] = (0.0, float("inf"))
            order.append(k)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("minimize", "maximize", "minimum", "maximum", "min", "max"):
            section, sense = "obj", (MAX if low.startswith("max") else MIN)
            continue
        if low in ("subject to", "such that", "st", "s.t."):
            section = "rows"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low in ("generals", "general", "gen", "integers"):
            section = "generals"
            continue
        if low == "end":
            section = "end"
            continue
        if section == "obj":
            body = line.split(":", 1)[1] if ":" in line else line
            terms, const = _parse_expr(body, lineno)
            for k, _ in terms:
                note(k)
            objective = Objective(sense, tuple(terms), const)
        elif section == "rows":
            if ":" not in line:
                raise LpFormatError(f"line {lineno}: unnamed row")
            name, body = line.split(":", 1)
            m = re.match(r"(.*?)(<=|>=|=)\s*(\S+)\s*$", body)
            if not m:
                raise LpFormatError(f"line {lineno}: row without sense")
            terms, const = _parse_expr(m.group(1), lineno)
            if const:
                raise LpFormatError(f"line {lineno}: constant on the left-hand side")
            for k, _ in terms:
                note(k)
            rows.append(Constraint(decode_name(name.strip()), tuple(terms), m.group(2), float(m.group(3))))
        elif section == "bounds":
            m = re.fullmatch(r"(\S+)\s*<=\s*(\S+)\s*<=\s*(\S+)", line)
            if not m:
                raise LpFormatError(f"line {lineno}: unsupported bound {line!r}")
            key = VarKey.parse(m.group(2))
            note(key)
            bound_order.append(key)
            bounds[key] = (float(m.group(1)), float(m.group(3)))
        elif section == "generals":
            for tok in line.split():
                key = VarKey.parse(tok)
                note(key)
                generals.add(key)
        elif section == "end":
            raise LpFormatError(f"line {lineno}: content after End")
        else:
            raise LpFormatError(f"line {lineno}: content outside any section")
    # the writer lists every column under Bounds, so that order is the column order
    seen = set(bound_order)
    order = bound_order + [k for k in order if k not in seen]
    variables = tuple(Variable(k, bounds[k][0], bounds[k][1], k in generals) for k in order)
    return Model(variables, tuple(rows), objective)


def read_lp(path) -> Model:
    return parse_lp(Path(path).read_text(encoding="utf-8"))
