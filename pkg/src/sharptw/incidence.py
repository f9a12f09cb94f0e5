"""The bipartite incidence graph of a CNF formula.

Vertices are ``Vertex(kind, id)`` pairs: ``kind`` is ``VAR`` (id = variable
number) or ``CLAUSE`` (id = clause index). Tuple ordering puts every
variable before every clause, which is the order bag layouts rely on.

PACE numbering (used by the ``.gr`` and ``.td`` files): variable ``v`` is
vertex ``v`` and clause ``i`` is vertex ``n + 1 + i``, where ``n`` is the
formula's declared variable count.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple

from .formula import Formula

VAR = 0
CLAUSE = 1


class Vertex(NamedTuple):
    kind: int
    id: int

    @property
    def is_var(self) -> bool:
        return self.kind == VAR

    @property
    def is_clause(self) -> bool:
        return self.kind == CLAUSE

    def __str__(self):
        return f"x{self.id}" if self.kind == VAR else f"C{self.id}"


def var(x: int) -> Vertex:
    return Vertex(VAR, x)


def clause(i: int) -> Vertex:
    return Vertex(CLAUSE, i)


class IncidenceGraph:
    """G*(F). ``adjacency`` maps every vertex to its frozenset of neighbours."""

    def __init__(self, num_vars: int, num_clauses: int,
                 adjacency: dict[Vertex, frozenset[Vertex]]):
        self.num_vars = num_vars
        self.num_clauses = num_clauses
        self.adjacency = adjacency

    @property
    def vertices(self) -> frozenset[Vertex]:
        return frozenset(self.adjacency)

    @property
    def edges(self) -> set[tuple[Vertex, Vertex]]:
        """Edges as ``(variable, clause)`` pairs."""
        return {(v, c) for v, nbrs in self.adjacency.items() if v.is_var
                for c in nbrs}

    def num_edges(self) -> int:
        return sum(len(n) for v, n in self.adjacency.items() if v.is_var)

    def __len__(self):
        return len(self.adjacency)

    def __contains__(self, v):
        return v in self.adjacency

    def with_isolated(self, variables: Iterable[int]) -> "IncidenceGraph":
        """Copy of the graph with extra isolated variable vertices."""
        adjacency = dict(self.adjacency)
        for x in variables:
            if not 1 <= x <= self.num_vars:
                raise ValueError(f"variable {x} out of range")
            adjacency.setdefault(var(x), frozenset())
        return IncidenceGraph(self.num_vars, self.num_clauses, adjacency)

    def is_bipartite(self) -> bool:
        return all(v.kind != w.kind for v, nbrs in self.adjacency.items()
                   for w in nbrs)

    # PACE numbering

    def pace_id(self, v: Vertex) -> int:
        return v.id if v.is_var else self.num_vars + 1 + v.id

    def from_pace_id(self, i: int) -> Vertex:
        if 1 <= i <= self.num_vars:
            return var(i)
        if self.num_vars < i <= self.num_vars + self.num_clauses:
            return clause(i - self.num_vars - 1)
        raise ValueError(f"vertex id {i} outside 1..{self.num_vars + self.num_clauses}")


def build_incidence(formula: Formula, strict: bool = False) -> IncidenceGraph:
    """Incidence graph of ``formula``.

    With ``strict`` the variable side is var(F); otherwise every declared
    variable is present and unused ones are isolated.
    """
    adjacency: dict[Vertex, set[Vertex]] = {
        var(x): set() for x in sorted(formula.counted_variables(strict))}
    for i, cl in enumerate(formula.clauses):
        c = clause(i)
        nbrs = adjacency[c] = set()
        for lit in cl:
            v = var(abs(lit))
            nbrs.add(v)
            adjacency[v].add(c)
    return IncidenceGraph(formula.num_vars, len(formula.clauses),
                          {v: frozenset(n) for v, n in adjacency.items()})


def write_gr(graph: IncidenceGraph) -> str:
    """PACE ``.gr`` text. The vertex count covers the whole id space n + m."""
    edges = sorted((graph.pace_id(v), graph.pace_id(c)) for v, c in graph.edges)
    lines = [f"p tw {graph.num_vars + graph.num_clauses} {len(edges)}"]
    lines.extend(f"{a} {b}" for a, b in edges)
    return "\n".join(lines) + "\n"


def parse_gr(text: str) -> tuple[int, list[tuple[int, int]]]:
    """Read PACE ``.gr`` text into ``(vertex_count, edges)``."""
    n = None
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "tw":
                raise ValueError(f"line {lineno}: malformed header {line!r}")
            n, m = int(parts[2]), int(parts[3])
            continue
        if n is None or len(parts) != 2:
            raise ValueError(f"line {lineno}: unexpected {line!r}")
        a, b = int(parts[0]), int(parts[1])
        if not (1 <= a <= n and 1 <= b <= n):
            raise ValueError(f"line {lineno}: vertex out of range")
        edges.append((a, b))
    if n is None:
        raise ValueError("missing 'p tw' header")
    if len(edges) != m:
        raise ValueError(f"header announces {m} edges, found {len(edges)}")
    return n, edges
