"""Tree-decompositions: validation, elimination heuristics and PACE ``.td`` I/O.

The graph arguments only need an ``adjacency`` attribute mapping each
vertex to its neighbours, so everything here also works on plain graphs
(see ``Graph``) as well as on ``IncidenceGraph``.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Hashable, Iterable, Mapping

from .incidence import Vertex, clause, var


class NotATreeError(ValueError):
    pass


class TdFormatError(ValueError):
    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        super().__init__((f"line {lineno}: " if lineno else "") + message)


class Strategy(str, Enum):
    MIN_FILL = "min-fill"
    MIN_DEGREE = "min-degree"


class Graph:
    """Minimal undirected graph, for decomposing things that are not formulas."""

    def __init__(self, vertices: Iterable[Hashable] = (),
                 edges: Iterable[tuple[Hashable, Hashable]] = ()):
        adj: dict = {v: set() for v in vertices}
        for a, b in edges:
            if a == b:
                continue
            adj.setdefault(a, set()).add(b)
            adj.setdefault(b, set()).add(a)
        self.adjacency = {v: frozenset(n) for v, n in adj.items()}

    @property
    def vertices(self):
        return frozenset(self.adjacency)


def graph_edges(graph) -> list[tuple]:
    adj = graph.adjacency
    return sorted({tuple(sorted((v, w))) for v in adj for w in adj[v]})


@dataclass(frozen=True)
class TreeDecomposition:
    """Bags keyed by node id plus the tree edges as ``(small, large)`` pairs."""

    bags: Mapping[int, frozenset]
    edges: frozenset[tuple[int, int]]

    @classmethod
    def build(cls, bags: Mapping[int, Iterable], edges: Iterable[tuple[int, int]]):
        return cls({t: frozenset(b) for t, b in bags.items()},
                   frozenset((min(a, b), max(a, b)) for a, b in edges))

    def __len__(self):
        return len(self.bags)

    def neighbors(self) -> dict[int, list[int]]:
        nbrs: dict[int, list[int]] = {t: [] for t in self.bags}
        for a, b in sorted(self.edges):
            nbrs[a].append(b)
            nbrs[b].append(a)
        return nbrs

    def width(self) -> int:
        return width(self)

    def check_tree(self):
        """Raise ``NotATreeError`` unless the node/edge structure is a tree."""
        if not self.bags:
            raise NotATreeError("decomposition has no nodes")
        for a, b in self.edges:
            if a not in self.bags or b not in self.bags:
                raise NotATreeError(f"edge {a}-{b} references an unknown node")
            if a == b:
                raise NotATreeError(f"self-loop at node {a}")
        if len(self.edges) != len(self.bags) - 1:
            raise NotATreeError(
                f"{len(self.edges)} edges for {len(self.bags)} nodes")
        nbrs = self.neighbors()
        start = min(self.bags)
        seen = {start}
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for u in nbrs[t]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        if len(seen) != len(self.bags):
            raise NotATreeError("tree is not connected")


def width(td: TreeDecomposition) -> int:
    """Largest bag size minus one; a lone empty bag counts as width 0."""
    if not td.bags:
        raise ValueError("width of an empty decomposition")
    return max(0, max(len(b) for b in td.bags.values()) - 1)


@dataclass
class ValidationReport:
    uncovered_vertex: Hashable | None = None
    uncovered_edge: tuple | None = None
    disconnected_vertex: Hashable | None = None
    unknown_vertex: Hashable | None = None

    @property
    def vertices_covered(self) -> bool:
        return self.uncovered_vertex is None

    @property
    def edges_covered(self) -> bool:
        return self.uncovered_edge is None

    @property
    def connected(self) -> bool:
        return self.disconnected_vertex is None

    @property
    def ok(self) -> bool:
        return (self.vertices_covered and self.edges_covered and self.connected
                and self.unknown_vertex is None)

    def __bool__(self):
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "valid"
        problems = []
        if self.unknown_vertex is not None:
            problems.append(f"bag holds non-graph vertex {self.unknown_vertex}")
        if not self.vertices_covered:
            problems.append(f"vertex {self.uncovered_vertex} in no bag")
        if not self.edges_covered:
            a, b = self.uncovered_edge
            problems.append(f"edge {a}-{b} in no bag")
        if not self.connected:
            problems.append(f"bags holding {self.disconnected_vertex} are disconnected")
        return "; ".join(problems)


def validate(graph, td: TreeDecomposition) -> ValidationReport:
    """Check the three tree-decomposition conditions, reporting the first
    violation of each. Raises ``NotATreeError`` if the tree itself is broken."""
    td.check_tree()
    adj = graph.adjacency
    report = ValidationReport()
    occurrences: dict = {}
    for t in sorted(td.bags):
        for v in td.bags[t]:
            occurrences.setdefault(v, []).append(t)
    for v in sorted(occurrences):
        if v not in adj:
            report.unknown_vertex = v
            break
    for v in sorted(adj):
        if v not in occurrences:
            report.uncovered_vertex = v
            break
    for a, b in graph_edges(graph):
        if not any(a in td.bags[t] for t in occurrences.get(b, ())):
            report.uncovered_edge = (a, b)
            break
    nbrs = td.neighbors()
    for v in sorted(occurrences):
        nodes = occurrences[v]
        allowed = set(nodes)
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            t = stack.pop()
            for u in nbrs[t]:
                if u in allowed and u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != len(allowed):
            report.disconnected_vertex = v
            break
    return report


def _fill_in(adj: dict, v) -> int:
    nbrs = list(adj[v])
    missing = 0
    for i, a in enumerate(nbrs):
        row = adj[a]
        for b in nbrs[i + 1:]:
            if b not in row:
                missing += 1
    return missing


def elimination_ordering(graph, strategy=Strategy.MIN_FILL) -> list[tuple]:
    """Greedy elimination; returns ``(vertex, neighbourhood at elimination)``.

    Ties on the score go to the smallest vertex. Scores live in a lazy heap,
    so only vertices whose score can have changed are re-scored.
    """
    strategy = Strategy(strategy)
    adj = {v: set(n) for v, n in graph.adjacency.items()}
    if strategy is Strategy.MIN_FILL:
        score = lambda v: _fill_in(adj, v)
    else:
        score = lambda v: len(adj[v])
    current = {v: score(v) for v in adj}
    heap = [(s, v) for v, s in current.items()]
    heapq.heapify(heap)
    order = []
    while heap:
        s, v = heapq.heappop(heap)
        if v not in adj or current[v] != s:
            continue
        nbrs = adj.pop(v)
        del current[v]
        order.append((v, frozenset(nbrs)))
        for a in nbrs:
            row = adj[a]
            row.discard(v)
            row.update(nbrs)
            row.discard(a)
        affected = set(nbrs)
        if strategy is Strategy.MIN_FILL:
            for a in nbrs:
                affected.update(adj[a])
        for u in affected:
            s_new = score(u)
            if s_new != current[u]:
                current[u] = s_new
                heapq.heappush(heap, (s_new, u))
    return order


def decomposition_from_ordering(order: list[tuple]) -> TreeDecomposition:
    """Bag ``{v} + N(v)`` per eliminated vertex; each bag hangs below the bag
    of its earliest-eliminated neighbour. Components are chained together."""
    if not order:
        return TreeDecomposition.build({1: ()}, ())
    position = {v: i for i, (v, _) in enumerate(order)}
    bags = {}
    edges = []
    roots = []
    for i, (v, nbrs) in enumerate(order):
        bags[i + 1] = nbrs | {v}
        if nbrs:
            parent = min(position[u] for u in nbrs)
            edges.append((i + 1, parent + 1))
        else:
            roots.append(i + 1)
    edges.extend(zip(roots, roots[1:]))
    return TreeDecomposition.build(bags, edges)


def contract_subset_bags(td: TreeDecomposition) -> TreeDecomposition:
    """Merge every node whose bag is contained in a neighbour's bag, then
    renumber nodes 1..N in their original order."""
    bags = dict(td.bags)
    nbrs = {t: set(n) for t, n in td.neighbors().items()}
    work = sorted(bags)
    while work:
        t = work.pop()
        if t not in bags:
            continue
        for u in sorted(nbrs[t]):
            if bags[t] <= bags[u]:
                for w in nbrs[t]:
                    nbrs[w].discard(t)
                    if w != u:
                        nbrs[w].add(u)
                        nbrs[u].add(w)
                del bags[t], nbrs[t]
                work.append(u)
                break
    renumber = {t: i + 1 for i, t in enumerate(sorted(bags))}
    return TreeDecomposition.build(
        {renumber[t]: b for t, b in bags.items()},
        {(renumber[t], renumber[u]) for t in nbrs for u in nbrs[t] if t < u})


def heuristic_decompose(graph, strategy=Strategy.MIN_FILL) -> TreeDecomposition:
    """Tree-decomposition from a min-fill or min-degree elimination ordering."""
    td = decomposition_from_ordering(elimination_ordering(graph, strategy))
    return contract_subset_bags(td)


def single_bag(graph) -> TreeDecomposition:
    """The trivial decomposition: one node holding every vertex."""
    return TreeDecomposition.build({1: graph.adjacency}, ())


# PACE 2017 .td format


def write_td(td: TreeDecomposition, num_vars: int, num_clauses: int) -> str:
    """Serialise with the PACE numbering (variables 1..n, clauses n+1..n+m).

    Node ids are written as they are when they already run 1..N, otherwise
    they are renumbered in sorted order.
    """
    ids = sorted(td.bags)
    renumber = {t: i + 1 for i, t in enumerate(ids)}

    def pace(v: Vertex) -> int:
        return v.id if v.is_var else num_vars + 1 + v.id

    max_bag = max(len(b) for b in td.bags.values())
    lines = [f"s td {len(ids)} {max_bag} {num_vars + num_clauses}"]
    for t in ids:
        members = sorted(pace(v) for v in td.bags[t])
        lines.append(" ".join(["b", str(renumber[t])] + [str(m) for m in members]))
    for a, b in sorted((renumber[a], renumber[b]) for a, b in td.edges):
        lines.append(f"{a} {b}")
    return "\n".join(lines) + "\n"


def parse_td(text: str, num_vars: int, num_clauses: int) -> TreeDecomposition:
    """Parse PACE ``.td`` text for a formula with the given dimensions."""
    total = num_vars + num_clauses
    header = None
    bags: dict[int, frozenset] = {}
    edges = []
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0] == "c":
            continue
        try:
            numbers = [int(p) for p in parts[2 if parts[0] == "s" else
                                             1 if parts[0] == "b" else 0:]]
        except ValueError:
            raise TdFormatError(f"non-integer field in {line!r}", lineno) from None
        if parts[0] == "s":
            if header is not None:
                raise TdFormatError("second 's td' header", lineno)
            if parts[1:2] != ["td"] or len(numbers) != 3:
                raise TdFormatError(f"malformed header {line!r}", lineno)
            header = numbers
            if header[2] != total:
                raise TdFormatError(
                    f"header declares {header[2]} graph vertices, formula has {total}",
                    lineno)
            continue
        if header is None:
            raise TdFormatError("content before 's td' header", lineno)
        n_nodes, max_bag, _ = header
        if parts[0] == "b":
            if not numbers:
                raise TdFormatError("bag line without node id", lineno)
            t, members = numbers[0], numbers[1:]
            if not 1 <= t <= n_nodes:
                raise TdFormatError(f"node id {t} outside 1..{n_nodes}", lineno)
            if t in bags:
                raise TdFormatError(f"node {t} has two bag lines", lineno)
            if len(members) > max_bag:
                raise TdFormatError(
                    f"bag of size {len(members)} exceeds declared maximum {max_bag}",
                    lineno)
            bag = set()
            for m in members:
                if 1 <= m <= num_vars:
                    bag.add(var(m))
                elif num_vars < m <= total:
                    bag.add(clause(m - num_vars - 1))
                else:
                    raise TdFormatError(f"vertex id {m} outside 1..{total}", lineno)
            bags[t] = frozenset(bag)
        else:
            if len(numbers) != 2:
                raise TdFormatError(f"malformed edge line {line!r}", lineno)
            a, b = numbers
            if not (1 <= a <= n_nodes and 1 <= b <= n_nodes):
                raise TdFormatError(f"edge {a}-{b} references an unknown node", lineno)
            edges.append((a, b))
    if header is None:
        raise TdFormatError("missing 's td' header")
    if len(bags) != header[0]:
        raise TdFormatError(f"header announces {header[0]} bags, found {len(bags)}")
    if bags and max(len(b) for b in bags.values()) != header[1]:
        raise TdFormatError("declared maximum bag size is not attained")
    td = TreeDecomposition.build(bags, edges)
    if len(td.edges) != len(edges):
        raise TdFormatError("duplicate tree edge")
    try:
        td.check_tree()
    except NotATreeError as e:
        raise TdFormatError(str(e)) from None
    return td
