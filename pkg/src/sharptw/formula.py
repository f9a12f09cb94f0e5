"""CNF formulas, DIMACS I/O and clause satisfaction under partial assignments.

Literals are DIMACS-style signed integers: ``3`` is the variable x3 and
``-3`` its negation. A clause is a ``frozenset`` of literals and a formula
is a deduplicated tuple of clauses; the position of a clause in that tuple
is its stable index (used as the clause-vertex id of the incidence graph).
An assignment is any mapping ``variable -> 0/1``; its domain is its key set.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, TextIO

Clause = frozenset  # frozenset[int]
Assignment = Mapping[int, int]


class DimacsError(ValueError):
    """Malformed DIMACS input. ``lineno`` is 1-based (0 when unknown)."""

    def __init__(self, message: str, lineno: int = 0):
        self.lineno = lineno
        prefix = f"line {lineno}: " if lineno else ""
        super().__init__(prefix + message)


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: tuple[frozenset[int], ...]
    _vars: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        seen = set()
        used = set()
        for clause in self.clauses:
            if clause in seen:
                raise ValueError(f"duplicate clause {sorted(clause)}")
            seen.add(clause)
            for lit in clause:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(
                        f"literal {lit} out of range for {self.num_vars} variables")
                used.add(abs(lit))
        object.__setattr__(self, "_vars", frozenset(used))

    @classmethod
    def from_clauses(cls, clauses: Iterable[Iterable[int]],
                     num_vars: int | None = None) -> "Formula":
        """Build a formula, collapsing duplicate literals and duplicate clauses.

        The first occurrence of a clause fixes its index. ``num_vars``
        defaults to the largest variable mentioned.
        """
        unique: dict[frozenset[int], None] = {}
        for clause in clauses:
            unique.setdefault(frozenset(clause), None)
        if num_vars is None:
            num_vars = max((abs(l) for c in unique for l in c), default=0)
        return cls(num_vars, tuple(unique))

    @property
    def variables(self) -> frozenset[int]:
        """var(F): the variables occurring in some clause."""
        return self._vars

    @property
    def max_clause_size(self) -> int:
        return max((len(c) for c in self.clauses), default=0)

    def counted_variables(self, strict: bool = False) -> frozenset[int]:
        """Variables an assignment ranges over: var(F) if strict, else 1..n."""
        if strict:
            return self._vars
        return frozenset(range(1, self.num_vars + 1))

    def __len__(self):
        return len(self.clauses)


def satisfies(alpha: Assignment, clause: Iterable[int]) -> bool:
    """True iff some literal of ``clause`` is over a variable of ``alpha`` and true.

    Literals over variables outside alpha's domain never satisfy, so the
    empty assignment satisfies no clause.
    """
    for lit in clause:
        value = alpha.get(abs(lit))
        if value is None:
            continue
        if (lit > 0) == bool(value):
            return True
    return False


def _tokens(stream: TextIO):
    for lineno, line in enumerate(stream, 1):
        stripped = line.strip()
        if not stripped or stripped[0] == "c":
            continue
        yield lineno, stripped


def parse_dimacs(source: str | TextIO) -> Formula:
    """Parse DIMACS CNF text (a string or a text stream).

    Clauses may span several lines; each ends with ``0``. A ``%`` line
    (used by some benchmark sets) ends the input.
    """
    stream = io.StringIO(source) if isinstance(source, str) else source
    num_vars = None
    clauses = []
    current: list[int] = []
    clause_line = 0
    for lineno, line in _tokens(stream):
        if line[0] == "%":
            break
        if line[0] == "p":
            parts = line.split()
            if num_vars is not None:
                raise DimacsError("second problem line", lineno)
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                num_vars, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or declared < 0:
                raise DimacsError(f"negative count in header {line!r}", lineno)
            continue
        if num_vars is None:
            raise DimacsError("clause before 'p cnf' header", lineno)
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsError(f"non-integer token {token!r}", lineno) from None
            if lit == 0:
                clauses.append(current)
                current = []
                continue
            if abs(lit) > num_vars:
                raise DimacsError(
                    f"literal {lit} exceeds declared variable count {num_vars}",
                    lineno)
            if not current:
                clause_line = lineno
            current.append(lit)
    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if current:
        raise DimacsError("clause missing terminating 0", clause_line)
    return Formula.from_clauses(clauses, num_vars)


def read_dimacs(path) -> Formula:
    with open(path) as fh:
        return parse_dimacs(fh)


def to_dimacs(formula: Formula) -> str:
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for clause in formula.clauses:
        lits = sorted(clause, key=lambda l: (abs(l), l))
        lines.append(" ".join(map(str, lits + [0])))
    return "\n".join(lines) + "\n"
