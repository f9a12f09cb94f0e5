"""Brute-force ground truth for the counter.

Everything here enumerates total assignments of an explicit variable set and
evaluates clauses literal by literal; nothing is shared with the DP engine
beyond the ``Formula`` type and the row layout of its tables.
"""

from __future__ import annotations

import numpy as np

from .counter import BagLayout, CountTable
from .formula import Formula
from .nicety import NiceDecomposition

MAX_COUNT_VARS = 24
MAX_TABLE_VARS = 20
_CHUNK = 1 << 16


class TooLarge(ValueError):
    pass


def _assignment_bits(variables: list[int], start: int, stop: int) -> dict[int, np.ndarray]:
    """Value of each variable across assignments ``start..stop-1`` (bit j of
    the assignment number is the value of ``variables[j]``)."""
    numbers = np.arange(start, stop, dtype=np.int64)
    return {x: ((numbers >> j) & 1).astype(bool) for j, x in enumerate(variables)}


def _clause_true(lits, values: dict[int, np.ndarray], n: int) -> np.ndarray:
    out = np.zeros(n, dtype=bool)
    for lit in lits:
        column = values.get(abs(lit))
        if column is None:
            continue
        out |= column if lit > 0 else ~column
    return out


def brute_force_count(formula: Formula, strict: bool = False) -> int:
    """Count satisfying assignments over var(F) (strict) or all declared
    variables, by plain enumeration."""
    variables = sorted(formula.counted_variables(strict))
    if len(variables) > MAX_COUNT_VARS:
        raise TooLarge(f"{len(variables)} variables exceed the oracle limit "
                       f"of {MAX_COUNT_VARS}")
    total = 1 << len(variables)
    count = 0
    for start in range(0, total, _CHUNK):
        stop = min(total, start + _CHUNK)
        values = _assignment_bits(variables, start, stop)
        ok = np.ones(stop - start, dtype=bool)
        for lits in formula.clauses:
            ok &= _clause_true(lits, values, stop - start)
        count += int(ok.sum())
    return count


def is_satisfiable(formula: Formula) -> bool:
    return brute_force_count(formula, strict=True) > 0


def brute_force_table(formula: Formula, nice: NiceDecomposition, node: int) -> CountTable:
    """The table of ``node`` straight from its definition: for every
    assignment of the subtree's variables, find the unsatisfied subtree
    clauses and, if they all sit in the bag, bump the matching row."""
    bag = nice.nodes[node].bag
    layout = BagLayout.from_bag(bag)
    below = nice.subtree_vertices(node)
    sub_vars = sorted(v.id for v in below if v.is_var)
    sub_clauses = sorted(v.id for v in below if v.is_clause)
    if len(sub_vars) > MAX_TABLE_VARS:
        raise TooLarge(f"{len(sub_vars)} subtree variables exceed the oracle limit")
    n = 1 << len(sub_vars)
    values = _assignment_bits(sub_vars, 0, n)
    row = np.zeros(n, dtype=np.int64)
    for j, x in enumerate(layout.variables):
        row |= values[x].astype(np.int64) << j
    keep = np.ones(n, dtype=bool)
    in_bag = set(layout.clauses)
    for c in sub_clauses:
        unsat = ~_clause_true(formula.clauses[c], values, n)
        if c in in_bag:
            row |= unsat.astype(np.int64) << (layout.p + layout.clauses.index(c))
        else:
            keep &= ~unsat
    counts = np.bincount(row[keep], minlength=1 << layout.size)
    table = np.empty(len(counts), dtype=object)
    table[:] = [int(k) for k in counts]
    return CountTable(layout, table)
