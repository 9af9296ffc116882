"""Best-first search on 8-connected grids: A*, Weighted A*, Dijkstra fields.

Policies fixed for reproducibility:
  - expansion = popping a node from OPEN and generating its successors;
    the terminating goal pop is not counted (start == goal costs 0 expansions);
  - nodes (including closed ones) are re-opened whenever a strictly smaller g
    is found, with tolerance 1e-12, so inconsistent heuristics stay correct;
  - ties on f are broken by larger g, remaining ties by insertion order (FIFO);
    f equality is tested at 1e-9 granularity (the path-cost tolerance) so that
    float rounding in reconstructed heuristics cannot defeat the g tie-break.
"""

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, List

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import dijkstra as _csgraph_dijkstra

from .grid import Cell, Grid, NEIGHBOR_OFFSETS, octile

G_TOLERANCE = 1e-12
F_QUANTUM = 1e-9  # priority-queue f keys are quantized to this granularity

HeuristicFn = Callable[[Cell], float]


@dataclass(frozen=True)
class SearchResult:
    found: bool
    path: List[Cell] = field(default_factory=list)
    cost: float = math.inf
    expansions: int = 0


class CostField:
    """Dense exact cost-to-go field (Dijkstra from the goal).

    ``values`` is a (height, width) float array; +inf marks blocked and
    unreachable cells, the goal holds 0.
    """

    __slots__ = ("values", "goal", "width", "height")

    def __init__(self, values: np.ndarray, goal: Cell):
        self.values = values
        self.goal = goal
        self.height, self.width = values.shape

    def value(self, cell) -> float:
        return float(self.values[cell[1], cell[0]])


def octile_heuristic(goal) -> HeuristicFn:
    """Octile-distance heuristic with the goal bound."""
    gx, gy = goal[0], goal[1]

    def h(cell):
        return octile(cell, (gx, gy))

    return h


def _check_endpoint(grid, cell, name):
    if not grid.in_bounds(cell):
        raise ValueError(f"{name} {tuple(cell)} is out of bounds")
    if grid.blocked[cell[1], cell[0]]:
        raise ValueError(f"{name} {tuple(cell)} is blocked")


def astar(
    grid: Grid,
    start,
    goal,
    h: HeuristicFn = None,
    w: float = 1.0,
    corner_cutting: bool = True,
) -> SearchResult:
    """Best-first search ordered by f = g + w*h. w=1 with a consistent h is A*."""
    _check_endpoint(grid, start, "start")
    _check_endpoint(grid, goal, "goal")
    if w < 1.0:
        raise ValueError("weight must be >= 1")
    if h is None:
        h = octile_heuristic(goal)

    width, height = grid.width, grid.height
    blocked = grid.blocked
    start_i = start[1] * width + start[0]
    goal_i = goal[1] * width + goal[0]
    if start_i == goal_i:
        return SearchResult(True, [Cell(start[0], start[1])], 0.0, 0)

    g = np.full(width * height, math.inf)
    hval = np.full(width * height, math.nan)
    parent = {start_i: None}
    g[start_i] = 0.0
    counter = 0
    hs = float(h(Cell(start[0], start[1])))
    open_heap = [(round(w * hs / F_QUANTUM), 0.0, counter, start_i)]
    expansions = 0
    push = heapq.heappush
    pop = heapq.heappop

    while open_heap:
        _, neg_g, _, i = pop(open_heap)
        gi = -neg_g
        if gi > g[i]:
            continue  # stale entry; a better path was found after this push
        if i == goal_i:
            path_idx = _walk_parents(parent, goal_i, width * height)
            path = [Cell(p % width, p // width) for p in path_idx]
            return SearchResult(True, path, gi, expansions)
        expansions += 1
        x = i % width
        y = i // width
        for dx, dy, cost in NEIGHBOR_OFFSETS:
            nx = x + dx
            ny = y + dy
            if nx < 0 or nx >= width or ny < 0 or ny >= height or blocked[ny, nx]:
                continue
            if not corner_cutting and dx != 0 and dy != 0:
                if blocked[y, nx] or blocked[ny, x]:
                    continue
            j = ny * width + nx
            gj = gi + cost
            if gj < g[j] - G_TOLERANCE:
                g[j] = gj
                parent[j] = i
                hj = hval[j]
                if math.isnan(hj):
                    hj = float(h(Cell(nx, ny)))
                    hval[j] = hj
                counter += 1
                push(open_heap, (round((gj + w * hj) / F_QUANTUM), -gj, counter, j))
    return SearchResult(False, [], math.inf, expansions)


def _walk_parents(parent, goal_key, limit):
    path = [goal_key]
    node = goal_key
    while True:
        if node not in parent:
            raise RuntimeError(f"missing parent chain at {node}")
        node = parent[node]
        if node is None:
            break
        path.append(node)
        if len(path) > limit:
            raise RuntimeError("cycle detected in parent chain")
    path.reverse()
    return path


def reconstruct_path(parents, goal) -> list:
    """Walk back-pointers from the goal to the start (whose parent is None)."""
    return _walk_parents(parents, goal, len(parents) + 1)


def _build_csgraph(grid: Grid, corner_cutting: bool):
    cache = grid._csgraph_cache
    if corner_cutting in cache:
        return cache[corner_cutting]
    h, w = grid.height, grid.width
    free = ~grid.blocked
    node = np.arange(h * w).reshape(h, w)
    rows, cols, vals = [], [], []
    for dx, dy, cost in NEIGHBOR_OFFSETS:
        src_x = slice(max(0, -dx), w - max(0, dx))
        src_y = slice(max(0, -dy), h - max(0, dy))
        dst_x = slice(max(0, dx), w - max(0, -dx))
        dst_y = slice(max(0, dy), h - max(0, -dy))
        mask = free[src_y, src_x] & free[dst_y, dst_x]
        if not corner_cutting and dx != 0 and dy != 0:
            mask &= free[src_y, dst_x] & free[dst_y, src_x]
        r = node[src_y, src_x][mask]
        rows.append(r)
        cols.append(node[dst_y, dst_x][mask])
        vals.append(np.full(r.size, cost))
    graph = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(h * w, h * w),
    )
    cache[corner_cutting] = graph
    return graph


def dijkstra_field(grid: Grid, goal, corner_cutting: bool = True) -> CostField:
    """Exact cost-to-go from every free cell to the goal.

    Runs Dijkstra from the goal over the (symmetric) move graph; blocked and
    unreachable cells get +inf.
    """
    _check_endpoint(grid, goal, "goal")
    graph = _build_csgraph(grid, corner_cutting)
    goal_i = goal[1] * grid.width + goal[0]
    dist = _csgraph_dijkstra(graph, directed=True, indices=goal_i)
    return CostField(dist.reshape(grid.height, grid.width), Cell(goal[0], goal[1]))
