"""Model counting by dynamic programming over a nice tree-decomposition.

Each node ``t`` gets a table with one row per pair ``(alpha, A)``: ``alpha``
assigns the bag's variables and ``A`` is a subset of the bag's clauses.
The row holds the number of assignments of the variables seen in the
subtree that agree with ``alpha`` and leave exactly ``A`` unsatisfied
among the clauses seen in the subtree.

Rows live in a flat array indexed by a bitmask. Bit ``i`` belongs to the
``i``-th member of the bag in ``BagLayout`` order: variables first (sorted),
then clauses (sorted). A set bit means "true" for a variable and "in A"
for a clause, so the rows with ``A`` empty are exactly the first
``2**p`` entries, ``p`` being the number of bag variables.

Arrays are ``int64`` when every entry provably fits (the caller decides,
see ``count_models``) and Python-int ``object`` arrays otherwise. Every
operation keeps its input's dtype.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .formula import Formula
from .incidence import IncidenceGraph, Vertex, build_incidence, clause, var
from .nicety import InvalidDecomposition, Kind, NiceDecomposition

# With at most this many variables every count is <= 2**30, so products of
# two of them (join) fit in int64.
INT64_MAX_VARS = 30


@dataclass(frozen=True)
class BagLayout:
    variables: tuple[int, ...]
    clauses: tuple[int, ...]

    @classmethod
    def from_bag(cls, bag: Iterable[Vertex]) -> "BagLayout":
        bag = sorted(bag)
        return cls(tuple(v.id for v in bag if v.is_var),
                   tuple(v.id for v in bag if v.is_clause))

    @property
    def p(self) -> int:
        return len(self.variables)

    @property
    def q(self) -> int:
        return len(self.clauses)

    @property
    def size(self) -> int:
        return len(self.variables) + len(self.clauses)

    @property
    def members(self) -> tuple[Vertex, ...]:
        return tuple(map(var, self.variables)) + tuple(map(clause, self.clauses))

    def position(self, v: Vertex) -> int:
        if v.is_var:
            return self.variables.index(v.id)
        return self.p + self.clauses.index(v.id)

    def with_member(self, v: Vertex) -> "BagLayout":
        if v in self.members:
            raise ValueError(f"{v} is already in the bag")
        return BagLayout.from_bag(self.members + (v,))

    def without_member(self, v: Vertex) -> "BagLayout":
        if v not in self.members:
            raise ValueError(f"{v} is not in the bag")
        return BagLayout.from_bag(m for m in self.members if m != v)

    def index(self, alpha: Mapping[int, int], unsat: Iterable[int] = ()) -> int:
        i = 0
        for j, x in enumerate(self.variables):
            if alpha[x]:
                i |= 1 << j
        for c in unsat:
            i |= 1 << (self.p + self.clauses.index(c))
        return i

    def decode(self, i: int) -> tuple[dict[int, int], frozenset[int]]:
        alpha = {x: (i >> j) & 1 for j, x in enumerate(self.variables)}
        unsat = frozenset(c for j, c in enumerate(self.clauses)
                          if (i >> (self.p + j)) & 1)
        return alpha, unsat


@dataclass(eq=False)
class CountTable:
    layout: BagLayout
    counts: np.ndarray

    def __post_init__(self):
        if len(self.counts) != 1 << self.layout.size:
            raise ValueError(
                f"{len(self.counts)} rows for a bag of size {self.layout.size}")

    def cell(self, alpha: Mapping[int, int], unsat: Iterable[int] = ()) -> int:
        return int(self.counts[self.layout.index(alpha, unsat)])

    def rows(self) -> Iterator[tuple[dict[int, int], frozenset[int], int]]:
        """Nonzero rows as ``(alpha, A, count)``."""
        for i in np.flatnonzero(self.counts):
            alpha, unsat = self.layout.decode(int(i))
            yield alpha, unsat, int(self.counts[i])

    def as_ints(self) -> list[int]:
        return [int(n) for n in self.counts]

    def total(self) -> int:
        return sum(self.as_ints())

    def satisfied_total(self) -> int:
        """Sum over alpha of the rows with ``A`` empty."""
        return sum(int(n) for n in self.counts[: 1 << self.layout.p])

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return self.layout == other.layout and self.as_ints() == other.as_ints()


def _axis(counts: np.ndarray, pos: int) -> np.ndarray:
    """View with the bit at ``pos`` as the middle axis of length 2."""
    return counts.reshape(-1, 2, 1 << pos)


def _sat_vector(lits: frozenset[int], variables: tuple[int, ...]) -> np.ndarray:
    """For each assignment of ``variables`` (as a bitmask), whether it
    satisfies the clause. Unassigned literals do not count."""
    alphas = np.arange(1 << len(variables))
    sat = np.zeros(len(alphas), dtype=bool)
    for j, x in enumerate(variables):
        bit = ((alphas >> j) & 1).astype(bool)
        if x in lits:
            sat |= bit
        if -x in lits:
            sat |= ~bit
    return sat


def leaf_table(bag: Iterable[Vertex], formula: Formula, dtype=object) -> CountTable:
    """A leaf: 1 where A is exactly the bag clauses alpha leaves unsatisfied."""
    layout = BagLayout.from_bag(bag)
    p = layout.p
    unsat = np.zeros(1 << p, dtype=np.int64)
    for j, c in enumerate(layout.clauses):
        missed = ~_sat_vector(formula.clauses[c], layout.variables)
        unsat |= missed.astype(np.int64) << j
    counts = np.zeros(1 << layout.size, dtype=dtype)
    counts[np.arange(1 << p) | (unsat << p)] = 1
    return CountTable(layout, counts)


def introduce_var_table(child: CountTable, x: int, formula: Formula) -> CountTable:
    """Add variable ``x`` to the bag.

    For ``x = b`` let ``B`` be the bag clauses that the literal setting x to
    b satisfies. Rows whose ``A`` meets ``B`` are 0; otherwise the row sums
    the child rows ``(alpha, A + B')`` over all subsets ``B'`` of ``B``.
    That sum factors over the clauses of ``B``: each one's "not in A" slice
    becomes the sum of both child slices and its "in A" slice becomes 0.
    """
    layout = child.layout.with_member(var(x))
    pos = layout.position(var(x))
    counts = np.zeros(1 << layout.size, dtype=child.counts.dtype)
    out = _axis(counts, pos)
    cp = child.layout.p
    for b, lit in ((0, -x), (1, x)):
        t = child.counts
        for j, c in enumerate(child.layout.clauses):
            if lit in formula.clauses[c]:
                v = _axis(t, cp + j)
                t = np.empty_like(v)
                t[:, 0, :] = v.sum(axis=1)
                t[:, 1, :] = 0
                t = t.reshape(-1)
        out[:, b, :] = t.reshape(-1, 1 << pos)
    return CountTable(layout, counts)


def introduce_clause_table(child: CountTable, c: int, formula: Formula) -> CountTable:
    """Add clause ``c`` to the bag: rows copy the child where "in A" agrees
    with "alpha does not satisfy c", and are 0 elsewhere."""
    layout = child.layout.with_member(clause(c))
    pos = layout.position(clause(c))
    sat = _sat_vector(formula.clauses[c], layout.variables)
    low = 1 << pos
    sat = np.tile(sat, low >> layout.p)
    rows = child.counts.reshape(-1, low)
    counts = np.zeros(1 << layout.size, dtype=child.counts.dtype)
    out = _axis(counts, pos)
    out[:, 0, :] = np.where(sat, rows, 0)
    out[:, 1, :] = np.where(sat, 0, rows)
    return CountTable(layout, counts)


def forget_var_table(child: CountTable, x: int) -> CountTable:
    layout = child.layout.without_member(var(x))
    pos = child.layout.position(var(x))
    return CountTable(layout, _axis(child.counts, pos).sum(axis=1).reshape(-1))


def forget_clause_table(child: CountTable, c: int) -> CountTable:
    """Drop clause ``c``. Rows with c in A are discarded: every variable of c
    is already below this node, so those assignments can never satisfy it."""
    layout = child.layout.without_member(clause(c))
    pos = child.layout.position(clause(c))
    return CountTable(layout, _axis(child.counts, pos)[:, 0, :].reshape(-1))


def _superset_sums(counts: np.ndarray, p: int, q: int) -> np.ndarray:
    z = counts.copy()
    for j in range(q):
        v = _axis(z, p + j)
        v[:, 0, :] += v[:, 1, :]
    return z


def _undo_superset_sums(z: np.ndarray, p: int, q: int) -> np.ndarray:
    for j in range(q):
        v = _axis(z, p + j)
        v[:, 0, :] -= v[:, 1, :]
    return z


def join_tables(left: CountTable, right: CountTable, method: str = "transform") -> CountTable:
    """Combine the two children of a join node.

    Row ``(alpha, A)`` is the sum of ``left(alpha, A1) * right(alpha, A2)`` over
    all pairs with ``A1 & A2 == A``. ``method="direct"`` runs that double loop
    literally, in O(2^p 4^q). The default takes superset sums over the clause
    bits of both tables, multiplies pointwise and inverts, in O(q 2^(p+q)):
    the superset sum of the result at S counts pairs with both A1 and A2
    containing S, which is the product of the two superset sums.
    """
    if left.layout != right.layout:
        raise ValueError("join of tables with different bags")
    layout = left.layout
    p, q = layout.p, layout.q
    if method == "direct":
        lc, rc = left.as_ints(), right.as_ints()
        out = [0] * len(lc)
        for alpha in range(1 << p):
            for a1 in range(1 << q):
                n1 = lc[alpha | a1 << p]
                if not n1:
                    continue
                for a2 in range(1 << q):
                    n2 = rc[alpha | a2 << p]
                    if n2:
                        out[alpha | (a1 & a2) << p] += n1 * n2
        counts = np.array(out, dtype=left.counts.dtype) if left.counts.dtype != object \
            else _object_array(out)
        return CountTable(layout, counts)
    if method != "transform":
        raise ValueError(f"unknown join method {method!r}")
    z = _superset_sums(left.counts, p, q) * _superset_sums(right.counts, p, q)
    return CountTable(layout, _undo_superset_sums(z, p, q))


def _object_array(values: list[int]) -> np.ndarray:
    arr = np.empty(len(values), dtype=object)
    arr[:] = values
    return arr


def node_table(formula: Formula, nice: NiceDecomposition, t: int,
               children: list[CountTable], dtype=object) -> CountTable:
    """Table of node ``t`` from its children's tables."""
    node = nice.nodes[t]
    kind = node.kind
    if kind is Kind.LEAF:
        return leaf_table(node.bag, formula, dtype)
    if kind is Kind.JOIN:
        return join_tables(*children)
    (child,) = children
    v = node.vertex
    if kind is Kind.INTRODUCE_VAR:
        return introduce_var_table(child, v.id, formula)
    if kind is Kind.INTRODUCE_CLAUSE:
        return introduce_clause_table(child, v.id, formula)
    if kind is Kind.FORGET_VAR:
        return forget_var_table(child, v.id)
    if kind is Kind.FORGET_CLAUSE:
        return forget_clause_table(child, v.id)
    raise InvalidDecomposition(f"node {t} has unknown kind {kind}")


def decomposition_variables(nice: NiceDecomposition) -> frozenset[int]:
    return frozenset(v.id for n in nice.nodes.values() for v in n.bag if v.is_var)


def table_dtype(nice: NiceDecomposition):
    return np.int64 if len(decomposition_variables(nice)) <= INT64_MAX_VARS else object


def iter_tables(formula: Formula, nice: NiceDecomposition,
                dtype=None) -> Iterator[tuple[int, CountTable]]:
    """Yield ``(node, table)`` bottom-up (post-order, children left to right).

    A child's table is dropped as soon as its parent's is built.
    """
    if dtype is None:
        dtype = table_dtype(nice)
    done: dict[int, CountTable] = {}
    for t in nice.postorder():
        kids = [done.pop(c) for c in nice.nodes[t].children]
        table = node_table(formula, nice, t, kids, dtype)
        done[t] = table
        yield t, table


def incidence_for(formula: Formula, nice_or_td) -> IncidenceGraph:
    """The incidence graph a decomposition is expected to decompose: var(F)
    and the clauses, plus whichever unused declared variables it mentions."""
    bags = (nice_or_td.nodes[t].bag for t in nice_or_td.nodes) \
        if isinstance(nice_or_td, NiceDecomposition) else nice_or_td.bags.values()
    mentioned = {v.id for b in bags for v in b if v.is_var}
    graph = build_incidence(formula, strict=True)
    return graph.with_isolated(sorted(mentioned - formula.variables))


def root_count(formula: Formula, nice: NiceDecomposition, root_table: CountTable, *,
               strict: bool = False) -> int:
    """#(F) from the root table.

    The root table counts assignments of every variable the decomposition
    mentions. Unused variables among those are free, so they are divided
    out to get #(F) over var(F); unless ``strict``, the result is then
    scaled to range over all declared variables.
    """
    total = root_table.satisfied_total()
    free = len(decomposition_variables(nice) - formula.variables)
    count, rest = divmod(total, 1 << free)
    assert not rest, "free variables must contribute a power of two"
    if not strict:
        count <<= formula.num_vars - len(formula.variables)
    return count


def count_models(formula: Formula, nice: NiceDecomposition, *, strict: bool = False,
                 check: bool = True) -> int:
    """Number of satisfying assignments of ``formula``, over all declared
    variables or, with ``strict``, over var(F) only."""
    if check:
        nice.check(incidence_for(formula, nice))
    root_table = None
    for t, table in iter_tables(formula, nice):
        root_table = table
    return root_count(formula, nice, root_table, strict=strict)
