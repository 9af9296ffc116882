"""Grid representation, 8-connected moves, octile distance, and map file I/O.

Conventions: row-major storage, origin at the top-left corner, x is the column
index and y the row index (matches the MovingAI map format).
"""

import math
from typing import NamedTuple

import numpy as np

SQRT2 = math.sqrt(2.0)

# Successor order is fixed so searches are reproducible: N, NE, E, SE, S, SW, W, NW.
# y grows downward, so N is (0, -1).
NEIGHBOR_OFFSETS = (
    (0, -1, 1.0),
    (1, -1, SQRT2),
    (1, 0, 1.0),
    (1, 1, SQRT2),
    (0, 1, 1.0),
    (-1, 1, SQRT2),
    (-1, 0, 1.0),
    (-1, -1, SQRT2),
)


class MapParseError(ValueError):
    """Raised on malformed map text; message carries the offending line number."""


class Cell(NamedTuple):
    x: int
    y: int


class Move(NamedTuple):
    target: Cell
    cost: float


class Grid:
    """Immutable binary occupancy grid.

    ``blocked`` is a (height, width) boolean array; True means the cell is an
    obstacle. The array is frozen after construction so a Grid can be shared
    freely across concurrent searches.
    """

    __slots__ = ("width", "height", "blocked", "_csgraph_cache")

    def __init__(self, blocked):
        arr = np.asarray(blocked, dtype=bool)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("grid must be a non-empty 2-D boolean array")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "blocked", arr)
        object.__setattr__(self, "height", arr.shape[0])
        object.__setattr__(self, "width", arr.shape[1])
        # lazily built sparse adjacency, keyed by corner-cutting flag
        object.__setattr__(self, "_csgraph_cache", {})

    def __setattr__(self, name, value):
        raise AttributeError("Grid is immutable")

    def in_bounds(self, cell) -> bool:
        x, y = cell
        return 0 <= x < self.width and 0 <= y < self.height

    def is_free(self, cell) -> bool:
        x, y = cell
        return self.in_bounds(cell) and not self.blocked[y, x]

    def free_count(self) -> int:
        return int((~self.blocked).sum())

    def __eq__(self, other):
        if not isinstance(other, Grid):
            return NotImplemented
        return self.blocked.shape == other.blocked.shape and bool(
            np.array_equal(self.blocked, other.blocked)
        )

    def __hash__(self):
        return hash((self.width, self.height, self.blocked.tobytes()))

    def __repr__(self):
        return f"Grid({self.width}x{self.height}, {int(self.blocked.sum())} blocked)"


def octile(a, b) -> float:
    """Octile distance: sqrt(2)*min(dx, dy) + |dx - dy|.

    Exact shortest-path length between two cells on an obstacle-free
    8-connected grid; admissible and consistent in general.
    """
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    if dx < dy:
        dx, dy = dy, dx
    return SQRT2 * dy + (dx - dy)


def neighbors(grid: Grid, cell, corner_cutting: bool = True) -> list:
    """All legal moves from ``cell``, in fixed N, NE, E, SE, S, SW, W, NW order.

    By default a diagonal move is legal whenever its destination is free
    (corner-cutting permitted). With ``corner_cutting=False`` a diagonal also
    requires both adjacent cardinal cells to be free.
    """
    if not grid.in_bounds(cell):
        raise ValueError(f"cell {tuple(cell)} is out of bounds")
    x, y = cell[0], cell[1]
    if grid.blocked[y, x]:
        raise ValueError(f"cell {tuple(cell)} is blocked")
    blocked = grid.blocked
    w, h = grid.width, grid.height
    moves = []
    for dx, dy, cost in NEIGHBOR_OFFSETS:
        nx, ny = x + dx, y + dy
        if not (0 <= nx < w and 0 <= ny < h) or blocked[ny, nx]:
            continue
        if not corner_cutting and dx != 0 and dy != 0:
            if blocked[y, nx] or blocked[ny, x]:
                continue
        moves.append(Move(Cell(nx, ny), cost))
    return moves


def parse_map(data) -> Grid:
    """Parse MovingAI-style map text into a Grid.

    Accepts bytes or str. Expected layout: ``type octile`` / ``height H`` /
    ``width W`` / ``map`` followed by H rows of W characters from {., @, T}.
    '.' is free, '@' and 'T' are blocked.
    """
    if isinstance(data, (bytes, bytearray)):
        text = bytes(data).decode("ascii", errors="replace")
    else:
        text = data
    lines = text.replace("\r\n", "\n").split("\n")
    # allow a single trailing newline
    if lines and lines[-1] == "":
        lines.pop()
    if len(lines) < 4:
        raise MapParseError("line 1: truncated header")
    if lines[0].strip() != "type octile":
        raise MapParseError(f"line 1: expected 'type octile', got {lines[0]!r}")
    height = _parse_header_int(lines[1], "height", 2)
    width = _parse_header_int(lines[2], "width", 3)
    if lines[3].strip() != "map":
        raise MapParseError(f"line 4: expected 'map', got {lines[3]!r}")
    body = lines[4:]
    if len(body) != height:
        raise MapParseError(
            f"line {5 + min(len(body), height)}: expected {height} map rows, got {len(body)}"
        )
    blocked = np.zeros((height, width), dtype=bool)
    for r, row in enumerate(body):
        if len(row) != width:
            raise MapParseError(f"line {5 + r}: row has {len(row)} chars, expected {width}")
        for c, ch in enumerate(row):
            if ch == ".":
                continue
            if ch in ("@", "T"):
                blocked[r, c] = True
            else:
                raise MapParseError(f"line {5 + r}: unknown character {ch!r}")
    return Grid(blocked)


def _parse_header_int(line, key, lineno):
    parts = line.split()
    if len(parts) != 2 or parts[0] != key:
        raise MapParseError(f"line {lineno}: expected '{key} <n>', got {line!r}")
    try:
        value = int(parts[1])
    except ValueError:
        raise MapParseError(f"line {lineno}: bad integer {parts[1]!r}") from None
    if value < 1:
        raise MapParseError(f"line {lineno}: {key} must be >= 1")
    return value


def serialize_map(grid: Grid) -> bytes:
    """Canonical map text: '.' free, '@' blocked, LF line endings."""
    rows = ["type octile", f"height {grid.height}", f"width {grid.width}", "map"]
    for r in range(grid.height):
        rows.append("".join("@" if b else "." for b in grid.blocked[r]))
    return ("\n".join(rows) + "\n").encode("ascii")
