"""Exact #SAT by dynamic programming over nice tree-decompositions of the
incidence graph."""

from .counter import CountTable, BagLayout, count_models
from .decompose import Strategy, TreeDecomposition, heuristic_decompose, validate
from .formula import DimacsError, Formula, parse_dimacs, satisfies, to_dimacs
from .incidence import IncidenceGraph, Vertex, build_incidence
from .nicety import Kind, NiceDecomposition, make_nice

__version__ = "0.1.0"


def model_count(formula: Formula, strategy=Strategy.MIN_FILL, strict: bool = False) -> int:
    """Decompose with a heuristic and count in one call."""
    graph = build_incidence(formula, strict=strict)
    nice = make_nice(heuristic_decompose(graph, strategy))
    return count_models(formula, nice, strict=strict, check=False)
