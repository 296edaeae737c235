"""A small immutable linear-program representation.

Variables are addressed by :class:`VarKey` values (``x`` arc variables and
``l``, ``g``, ``y`` level variables) instead of bare column numbers, so
constraints read close to their algebraic form and tests can target
individual rows by id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

__all__ = [
    "Constraint",
    "G",
    "L",
    "Model",
    "ModelError",
    "Objective",
    "Point",
    "VarKey",
    "Variable",
    "X",
    "Y",
    "evaluate_objective",
    "relax",
    "violated_constraints",
]

LE, GE, EQ = "<=", ">=", "="
MIN, MAX = "min", "max"


class ModelError(ValueError):
    pass


class VarKey(NamedTuple):
    """Structured variable name.

    ``family`` is one of ``"x"``, ``"l"``, ``"g"``, ``"y"``. For ``x`` the
    two indices are (tail, head); otherwise (node, level).
    """

    family: str
    a: int
    b: int

    @property
    def name(self) -> str:
        return f"{self.family}_{self.a}_{self.b}"

    @classmethod
    def parse(cls, name: str) -> "VarKey":
        fam, a, b = name.split("_")
        if fam not in ("x", "l", "g", "y"):
            raise ModelError(f"unknown variable family in {name!r}")
        return cls(fam, int(a), int(b))

    def __str__(self):
        return self.name


def X(u: int, v: int) -> VarKey:
    return VarKey("x", u, v)


def L(v: int, i: int) -> VarKey:
    return VarKey("l", v, i)


def G(v: int, i: int) -> VarKey:
    return VarKey("g", v, i)


def Y(v: int, i: int) -> VarKey:
    return VarKey("y", v, i)


Point = dict  # VarKey -> number


class Variable(NamedTuple):
    key: VarKey
    lb: float = 0.0
    ub: float = 1.0
    integer: bool = True


@dataclass(frozen=True)
class Constraint:
    """``sum(coef * var) <sense> rhs`` with an id such as ``F-excl[v=3,i=1]``."""

    id: str
    terms: tuple[tuple[VarKey, float], ...]
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in (LE, GE, EQ):
            raise ModelError(f"bad sense {self.sense!r} in {self.id}")
        merged: dict[VarKey, float] = {}
        for k, c in self.terms:
            merged[k] = merged.get(k, 0) + c
        object.__setattr__(
            self, "terms", tuple((k, c) for k, c in merged.items() if c != 0)
        )

    @classmethod
    def make(cls, id: str, terms: Iterable[tuple[VarKey, float]], sense: str, rhs: float):
        return cls(id, tuple(terms), sense, rhs)

    def lhs(self, p: Mapping[VarKey, float]):
        total = 0
        for k, c in self.terms:
            try:
                total += c * p[k]
            except KeyError:
                raise ModelError(f"point has no value for {k}") from None
        return total

    def violation(self, p: Mapping[VarKey, float]):
        """Amount by which ``p`` violates the row (<= 0 means satisfied)."""
        lhs = self.lhs(p)
        if self.sense == LE:
            return lhs - self.rhs
        if self.sense == GE:
            return self.rhs - lhs
        return abs(lhs - self.rhs)

    def family(self) -> str:
        return self.id.split("[", 1)[0]


@dataclass(frozen=True)
class Objective:
    sense: str = MIN
    terms: tuple[tuple[VarKey, float], ...] = ()
    constant: float = 0.0

    def __post_init__(self):
        if self.sense not in (MIN, MAX):
            raise ModelError(f"bad objective sense {self.sense!r}")


@dataclass(frozen=True)
class Model:
    """Variables, constraints and an objective. Never mutated in place."""

    variables: tuple[Variable, ...]
    constraints: tuple[Constraint, ...] = ()
    objective: Objective = field(default_factory=Objective)

    def __post_init__(self):
        index = {}
        for j, var in enumerate(self.variables):
            if var.key in index:
                raise ModelError(f"duplicate variable {var.key}")
            if var.lb > var.ub:
                raise ModelError(f"empty bounds on {var.key}")
            index[var.key] = j
        object.__setattr__(self, "_index", index)
        ids = set()
        for con in self.constraints:
            if con.id in ids:
                raise ModelError(f"duplicate constraint id {con.id}")
            ids.add(con.id)
            for k, _ in con.terms:
                if k not in index:
                    raise ModelError(f"{con.id} references undeclared {k}")
        for k, _ in self.objective.terms:
            if k not in index:
                raise ModelError(f"objective references undeclared {k}")

    @property
    def keys(self) -> list[VarKey]:
        return [v.key for v in self.variables]

    def column(self, key: VarKey) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise ModelError(f"unknown variable {key}") from None

    def __contains__(self, key) -> bool:
        return key in self._index

    def constraint(self, id: str) -> Constraint:
        for con in self.constraints:
            if con.id == id:
                return con
        raise KeyError(id)

    def family(self, tag: str) -> list[Constraint]:
        return [c for c in self.constraints if c.family() == tag]

    def families(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.constraints:
            out[c.family()] = out.get(c.family(), 0) + 1
        return out

    def with_constraints(self, extra: Iterable[Constraint]) -> "Model":
        return replace(self, constraints=self.constraints + tuple(extra))

    def with_objective(self, objective: Objective) -> "Model":
        return replace(self, objective=objective)

    def with_bounds(self, bounds: Mapping[VarKey, tuple[float, float]]) -> "Model":
        variables = tuple(
            v._replace(lb=bounds[v.key][0], ub=bounds[v.key][1]) if v.key in bounds else v
            for v in self.variables
        )
        return replace(self, variables=variables)

    @property
    def integer_count(self) -> int:
        return sum(v.integer for v in self.variables)

    @cached_property
    def arrays(self) -> "DenseArrays":
        """Dense matrix form used by the solvers."""
        n, m = len(self.variables), len(self.constraints)
        A = np.zeros((m, n))
        b = np.zeros(m)
        senses = []
        for i, con in enumerate(self.constraints):
            for k, c in con.terms:
                A[i, self._index[k]] += c
            b[i] = con.rhs
            senses.append(con.sense)
        c = np.zeros(n)
        for k, coef in self.objective.terms:
            c[self._index[k]] += coef
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        integer = np.array([v.integer for v in self.variables], dtype=bool)
        return DenseArrays(A, np.array(senses, dtype=object), b, c, lb, ub, integer)

    def point(self, values: Sequence[float]) -> Point:
        return {v.key: float(x) for v, x in zip(self.variables, values)}


class DenseArrays(NamedTuple):
    A: np.ndarray
    senses: np.ndarray
    b: np.ndarray
    c: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray


def evaluate_objective(m: Model, p: Mapping[VarKey, float]):
    total = m.objective.constant
    for k, c in m.objective.terms:
        try:
            total += c * p[k]
        except KeyError:
            raise ModelError(f"point has no value for {k}") from None
    return total


def violated_constraints(
    m: Model, p: Mapping[VarKey, float], tol: float = 1e-9
) -> list[tuple[str, float]]:
    """Rows and bounds of the LP relaxation that ``p`` violates by more than ``tol``.

    Bound violations are reported with ids ``bound[<var>]``.
    """
    if tol < 0:
        raise ModelError("tolerance must be nonnegative")
    out = []
    for var in m.variables:
        try:
            val = p[var.key]
        except KeyError:
            raise ModelError(f"point has no value for {var.key}") from None
        amount = max(var.lb - val, val - var.ub)
        if amount > tol:
            out.append((f"bound[{var.key}]", amount))
    for con in m.constraints:
        amount = con.violation(p)
        if amount > tol:
            out.append((con.id, amount))
    return out


def relax(m: Model) -> Model:
    if not any(v.integer for v in m.variables):
        return m
    return replace(m, variables=tuple(v._replace(integer=False) for v in m.variables))


def integrality_violations(m: Model, p: Mapping[VarKey, float], tol: float = 1e-6) -> list[VarKey]:
    return [
        v.key
        for v in m.variables
        if v.integer and abs(p[v.key] - math.floor(p[v.key] + 0.5)) > tol
    ]
