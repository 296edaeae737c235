"""Problem instances for hop-constrained tree problems.

An :class:`Instance` is a rooted, edge-weighted undirected graph together
with a terminal set and a hop limit. STPRBH instances additionally carry
node revenues and a budget. Nodes are numbered ``1..n``.

Instances are read from and written to a small line-oriented text format::

    HOPTREE 1
    nodes <n> root <r> hop <H>
    terminals <k> <v1> ... <vk>
    budget <B>
    revenues <rho_1> ... <rho_n>
    edges <m>
    <u> <v> <cost>

The ``terminals``, ``budget`` and ``revenues`` lines are optional; a missing
terminal line means every node is a terminal.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence

__all__ = [
    "Arc",
    "Instance",
    "InstanceError",
    "ParseError",
    "Walk",
    "attach_revenues",
    "derive_hstp_terminals",
    "euclidean_points",
    "generate_euclidean",
    "generate_random",
    "parse_instance",
    "read_instance",
    "write_instance",
]


class InstanceError(ValueError):
    """Raised for invalid instance data or generator arguments."""


class ParseError(InstanceError):
    """Raised when an instance file is malformed."""

    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class Arc(NamedTuple):
    tail: int
    head: int


class Walk(tuple):
    """A directed walk given by its arcs. Nodes and arcs may repeat."""

    def __new__(cls, arcs: Iterable[Sequence[int]]):
        arcs = tuple(Arc(*a) for a in arcs)
        if not arcs:
            raise InstanceError("a walk needs at least one arc")
        for a in arcs:
            if a.tail == a.head:
                raise InstanceError(f"arc {a} is a self-loop")
        for a, b in zip(arcs, arcs[1:]):
            if a.head != b.tail:
                raise InstanceError(f"arcs {a} and {b} do not chain")
        return super().__new__(cls, arcs)

    @classmethod
    def from_nodes(cls, nodes: Sequence[int]) -> "Walk":
        return cls(zip(nodes, nodes[1:]))

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self[0].tail,) + tuple(a.head for a in self)

    @property
    def start(self) -> int:
        return self[0].tail

    @property
    def end(self) -> int:
        return self[-1].head

    def incoming(self, v: int) -> set[Arc]:
        """Arcs of the walk entering ``v``."""
        return {a for a in self if a.head == v}

    def __repr__(self):
        return "Walk(" + "->".join(map(str, self.nodes)) + ")"


@dataclass(frozen=True)
class Instance:
    """Rooted weighted graph with terminals and a hop limit.

    ``edges`` holds ``(u, v, cost)`` triples with ``u < v``, sorted.
    ``revenues`` is a tuple indexed by ``node - 1`` when present.
    """

    node_count: int
    root: int
    edges: tuple[tuple[int, int, float], ...]
    terminals: frozenset[int]
    hop_limit: int
    revenues: tuple[float, ...] | None = None
    budget: float | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        n = self.node_count
        if n < 1:
            raise InstanceError("an instance needs at least one node")
        if not 1 <= self.root <= n:
            raise InstanceError(f"root {self.root} out of range 1..{n}")
        if self.hop_limit < 0:
            raise InstanceError("hop limit must be nonnegative")
        edges = []
        seen = set()
        for u, v, c in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise InstanceError(f"self-loop at node {u}")
            if u > v:
                u, v = v, u
            if not (1 <= u <= n and 1 <= v <= n):
                raise InstanceError(f"edge ({u}, {v}) has an endpoint out of range")
            if (u, v) in seen:
                raise InstanceError(f"duplicate edge ({u}, {v})")
            if not c >= 0 or math.isinf(c):
                raise InstanceError(f"edge ({u}, {v}) has invalid cost {c}")
            seen.add((u, v))
            edges.append((u, v, c))
        object.__setattr__(self, "edges", tuple(sorted(edges)))
        terminals = frozenset(int(t) for t in self.terminals)
        if any(not 1 <= t <= n for t in terminals):
            raise InstanceError("terminal out of range")
        if self.root not in terminals:
            raise InstanceError("the root must be a terminal")
        object.__setattr__(self, "terminals", terminals)
        if (self.revenues is None) != (self.budget is None):
            raise InstanceError("revenues and budget must be given together")
        if self.revenues is not None:
            revenues = tuple(self.revenues)
            if len(revenues) != n:
                raise InstanceError(f"expected {n} revenues, got {len(revenues)}")
            if any(not r >= 0 for r in revenues):
                raise InstanceError("revenues must be nonnegative")
            if not self.budget >= 0:
                raise InstanceError("budget must be nonnegative")
            object.__setattr__(self, "revenues", revenues)

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    @property
    def arcs(self) -> list[Arc]:
        """Both orientations of every edge, sorted by (tail, head)."""
        out = []
        for u, v, _ in self.edges:
            out.append(Arc(u, v))
            out.append(Arc(v, u))
        out.sort()
        return out

    def cost(self, u: int, v: int) -> float:
        return self._costs[(min(u, v), max(u, v))]

    @property
    def _costs(self) -> dict[tuple[int, int], float]:
        cache = self.__dict__.get("_cost_cache")
        if cache is None:
            cache = {(u, v): c for u, v, c in self.edges}
            object.__setattr__(self, "_cost_cache", cache)
        return cache

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self._costs

    def revenue(self, v: int) -> float:
        if self.revenues is None:
            raise InstanceError("instance has no revenues")
        return self.revenues[v - 1]

    @property
    def is_complete(self) -> bool:
        n = self.node_count
        return len(self.edges) == n * (n - 1) // 2

    @property
    def has_revenues(self) -> bool:
        return self.revenues is not None

    def with_hop_limit(self, hop_limit: int) -> "Instance":
        return replace(self, hop_limit=hop_limit)

    def with_terminals(self, terminals: Iterable[int]) -> "Instance":
        return replace(self, terminals=frozenset(terminals) | {self.root})

    def spanning(self) -> "Instance":
        """Copy with every node a terminal (the HMSTP special case)."""
        return replace(self, terminals=frozenset(self.nodes))


def _complete(n: int, root: int, costs: Iterable[float], name: str) -> Instance:
    pairs = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)]
    edges = tuple((u, v, c) for (u, v), c in zip(pairs, costs))
    return Instance(
        node_count=n,
        root=root,
        edges=edges,
        terminals=frozenset(range(1, n + 1)),
        hop_limit=0,
        name=name,
    )


def generate_euclidean(n: int, seed: int, grid: int = 100) -> Instance:
    """Complete graph on random grid points with rounded Euclidean costs.

    Coordinates are drawn uniformly from ``{0..grid}^2``. Costs are rounded
    to the nearest integer with a floor of 1 so coincident points still
    give positive costs. The root is node ``n`` and every node is a
    terminal. The hop limit is left at 0; set it with
    :meth:`Instance.with_hop_limit`.
    """
    if n < 2:
        raise InstanceError("need n >= 2")
    if grid < 1:
        raise InstanceError("need grid >= 1")
    pts = euclidean_points(n, seed, grid)
    costs = []
    for u in range(n):
        for v in range(u + 1, n):
            d = math.dist(pts[u], pts[v])
            costs.append(float(max(1, int(math.floor(d + 0.5)))))
    return _complete(n, n, costs, f"tc{n}-s{seed}")


def euclidean_points(n: int, seed: int, grid: int = 100) -> list[tuple[int, int]]:
    """The node coordinates used by :func:`generate_euclidean`."""
    rng = random.Random(seed)
    return [(rng.randint(0, grid), rng.randint(0, grid)) for _ in range(n)]


def generate_random(n: int, seed: int, cost_min: int = 1, cost_max: int = 100) -> Instance:
    """Complete graph with i.i.d. uniform integer costs in ``[cost_min, cost_max]``."""
    if n < 2:
        raise InstanceError("need n >= 2")
    if not 0 <= cost_min <= cost_max:
        raise InstanceError(f"invalid cost range [{cost_min}, {cost_max}]")
    rng = random.Random(seed)
    m = n * (n - 1) // 2
    costs = [float(rng.randint(cost_min, cost_max)) for _ in range(m)]
    return _complete(n, n, costs, f"tr{n}-s{seed}")


def derive_hstp_terminals(inst: Instance) -> Instance:
    """Terminals become the first ``floor(n/2)`` nodes plus the root."""
    k = inst.node_count // 2
    terms = frozenset(range(1, k + 1)) | {inst.root}
    return replace(inst, terminals=terms)


def attach_revenues(
    inst: Instance,
    seed: int,
    revenue_min: int = 1,
    revenue_max: int = 50,
    budget_fraction: float = 0.3,
) -> Instance:
    """Attach integer node revenues and a budget for STPRBH experiments.

    The budget is ``budget_fraction`` times the total edge cost, rounded
    down to an integer.
    """
    if not 0 <= revenue_min <= revenue_max:
        raise InstanceError("invalid revenue range")
    if budget_fraction < 0:
        raise InstanceError("budget fraction must be nonnegative")
    rng = random.Random(seed)
    revenues = tuple(float(rng.randint(revenue_min, revenue_max)) for _ in inst.nodes)
    total = sum(c for _, _, c in inst.edges)
    budget = float(math.floor(budget_fraction * total))
    return replace(inst, revenues=revenues, budget=budget)


def _fmt(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def write_instance(inst: Instance) -> bytes:
    """Serialize to the canonical text format (UTF-8)."""
    lines = ["HOPTREE 1"]
    if inst.name:
        lines.append(f"# {inst.name}")
    lines.append(f"nodes {inst.node_count} root {inst.root} hop {inst.hop_limit}")
    if inst.terminals != frozenset(inst.nodes):
        terms = sorted(inst.terminals)
        lines.append(f"terminals {len(terms)} " + " ".join(map(str, terms)))
    if inst.revenues is not None:
        lines.append(f"budget {_fmt(inst.budget)}")
        lines.append("revenues " + " ".join(_fmt(r) for r in inst.revenues))
    lines.append(f"edges {len(inst.edges)}")
    for u, v, c in inst.edges:
        lines.append(f"{u} {v} {_fmt(c)}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def _number(tok: str, lineno: int) -> float:
    try:
        value = float(tok)
    except ValueError:
        raise ParseError(lineno, f"expected a number, got {tok!r}") from None
    if not math.isfinite(value):
        raise ParseError(lineno, f"non-finite number {tok!r}")
    return value


def _integer(tok: str, lineno: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(lineno, f"expected an integer, got {tok!r}") from None


def parse_instance(data: bytes | str, name: str = "") -> Instance:
    """Parse the canonical text format.

    Raises :class:`ParseError` naming the offending line.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    records = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            records.append((lineno, line.split()))
    if not records:
        raise ParseError(1, "empty file")

    it = iter(records)
    lineno, toks = next(it)
    if toks != ["HOPTREE", "1"]:
        raise ParseError(lineno, "expected header 'HOPTREE 1'")

    lineno, toks = next(it, (lineno + 1, []))
    if len(toks) != 6 or toks[0::2] != ["nodes", "root", "hop"]:
        raise ParseError(lineno, "expected 'nodes <n> root <r> hop <H>'")
    n = _integer(toks[1], lineno)
    root = _integer(toks[3], lineno)
    hop = _integer(toks[5], lineno)
    if n < 1:
        raise ParseError(lineno, "node count must be positive")
    if not 1 <= root <= n:
        raise ParseError(lineno, f"root {root} out of range 1..{n}")
    if hop < 0:
        raise ParseError(lineno, "hop limit must be nonnegative")

    terminals = None
    budget = None
    revenues = None
    budget_line = None
    revenue_line = None
    edges = None
    m = None
    for lineno, toks in it:
        key = toks[0]
        if key == "terminals":
            k = _integer(toks[1], lineno) if len(toks) > 1 else -1
            if k != len(toks) - 2:
                raise ParseError(lineno, "terminal count does not match list")
            terminals = [_integer(t, lineno) for t in toks[2:]]
            for t in terminals:
                if not 1 <= t <= n:
                    raise ParseError(lineno, f"terminal {t} out of range")
            if root not in terminals:
                raise ParseError(lineno, "root must be a terminal")
        elif key == "budget":
            if len(toks) != 2:
                raise ParseError(lineno, "expected 'budget <B>'")
            budget = _number(toks[1], lineno)
            budget_line = lineno
            if budget < 0:
                raise ParseError(lineno, "budget must be nonnegative")
        elif key == "revenues":
            if len(toks) != n + 1:
                raise ParseError(lineno, f"expected {n} revenues")
            revenues = [_number(t, lineno) for t in toks[1:]]
            if any(r < 0 for r in revenues):
                raise ParseError(lineno, "revenues must be nonnegative")
            revenue_line = lineno
        elif key == "edges":
            if len(toks) != 2:
                raise ParseError(lineno, "expected 'edges <m>'")
            m = _integer(toks[1], lineno)
            edges = []
            seen = set()
            for _ in range(m):
                rec = next(it, None)
                if rec is None:
                    raise ParseError(lineno + 1, f"expected {m} edge lines")
                lineno, toks = rec
                if len(toks) != 3:
                    raise ParseError(lineno, "expected '<u> <v> <cost>'")
                u, v = _integer(toks[0], lineno), _integer(toks[1], lineno)
                c = _number(toks[2], lineno)
                if u == v:
                    raise ParseError(lineno, f"self-loop at node {u}")
                if not (1 <= u <= n and 1 <= v <= n):
                    raise ParseError(lineno, f"endpoint out of range 1..{n}")
                if u > v:
                    raise ParseError(lineno, "edges must be written with u < v")
                if (u, v) in seen:
                    raise ParseError(lineno, f"duplicate edge ({u}, {v})")
                if c < 0:
                    raise ParseError(lineno, "edge costs must be nonnegative")
                seen.add((u, v))
                edges.append((u, v, c))
            extra = next(it, None)
            if extra is not None:
                raise ParseError(extra[0], "unexpected content after edge list")
            break
        else:
            raise ParseError(lineno, f"unknown record {key!r}")

    if edges is None:
        raise ParseError(lineno, "missing 'edges' section")
    if revenues is not None and budget is None:
        raise ParseError(revenue_line, "revenues given without a budget")
    if budget is not None and revenues is None:
        raise ParseError(budget_line, "budget given without revenues")
    return Instance(
        node_count=n,
        root=root,
        edges=tuple(edges),
        terminals=frozenset(terminals) if terminals is not None else frozenset(range(1, n + 1)),
        hop_limit=hop,
        revenues=tuple(revenues) if revenues is not None else None,
        budget=budget,
        name=name,
    )


def read_instance(path) -> Instance:
    from pathlib import Path

    path = Path(path)
    return parse_instance(path.read_bytes(), name=path.stem)
