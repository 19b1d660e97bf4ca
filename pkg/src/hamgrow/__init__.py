"""Vertex-growth Hamiltonicity algorithm for 0/1-cost TSP, exact oracles, and
a falsification harness that checks the algorithm's claims."""

from .graph import (
    CostFn,
    Graph,
    GraphParseError,
    InvalidInput,
    canonicalize,
    parse_graph,
    reduce_to_tsp,
    serialize_graph,
    tour_cost,
    tour_edges,
)
from .growth import Decision, Provider, Verdict, decide_hamiltonian, grow
from .oracle import (
    CapacityError,
    OptimizingEdgeSet,
    Regime,
    enumerate_optimal_tours,
    exact_optimizing_edges,
    hc_exists,
    held_karp,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CostFn",
    "Decision",
    "Graph",
    "GraphParseError",
    "InvalidInput",
    "OptimizingEdgeSet",
    "Provider",
    "Regime",
    "Verdict",
    "canonicalize",
    "decide_hamiltonian",
    "enumerate_optimal_tours",
    "exact_optimizing_edges",
    "grow",
    "hc_exists",
    "held_karp",
    "parse_graph",
    "reduce_to_tsp",
    "serialize_graph",
    "tour_cost",
    "tour_edges",
]
