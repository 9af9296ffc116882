"""Grid pathfinding engine and benchmark harness.

Core pieces: an 8-connected grid model with octile heuristics, A* / Weighted A*
with honest expansion accounting, Dijkstra cost-to-go fields, correction-factor
heuristic fields, procedural map generators, task sampling with reachability
filters, and metric reporting.
"""

__version__ = "0.1.0"

from .grid import Cell, Grid, Move, SQRT2, octile, neighbors, parse_map, serialize_map
from .search import SearchResult, CostField, astar, dijkstra_field
from .cf import CfField, cf_target, h_from_cf, build_mask, read_cf, write_cf
from .rng import Rng

__all__ = [
    "Cell",
    "Grid",
    "Move",
    "SQRT2",
    "octile",
    "neighbors",
    "parse_map",
    "serialize_map",
    "SearchResult",
    "CostField",
    "astar",
    "dijkstra_field",
    "CfField",
    "cf_target",
    "h_from_cf",
    "build_mask",
    "read_cf",
    "write_cf",
    "Rng",
]
