"""Procedural evaluation-map generators covering six distinct grid topologies.

masked_pyramid, prim_maze, perlin, recursive_division, rotational_symmetry,
dcaffo. All are deterministic functions of a UpfSpec.
"""

import itertools
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .grid import Grid
from .rng import Rng

TOPOLOGIES = (
    "masked_pyramid",
    "prim_maze",
    "perlin",
    "recursive_division",
    "rotational_symmetry",
    "dcaffo",
)


class ConfigError(ValueError):
    """Raised when generator parameters cannot produce a valid map."""


@dataclass(frozen=True)
class UpfSpec:
    topology: str
    size: Tuple[int, int]
    seed: int
    # masked_pyramid
    ring_count: int = 15
    ring_spacing: Optional[int] = None  # None = widest spacing (max 2) that fits
    # perlin
    smoothing_passes: int = 2
    oob_blocked: bool = True
    # recursive_division
    wall_flip_prob: float = 0.2
    min_chamber_side: int = 4
    max_splits: Optional[int] = None
    # dcaffo
    noise_density: float = 0.5
    closing_size: int = 3

    def __post_init__(self):
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        w, h = self.size
        if w < 8 or h < 8:
            raise ConfigError("size must be at least 8x8")


def generate(spec: UpfSpec) -> Grid:
    return _GENERATORS[spec.topology](spec)


# ---------------------------------------------------------------------------
# Masked Pyramid


def pyramid_rings(width, height, ring_count=15, spacing=None):
    """Concentric square rings, innermost first.

    Each ring is the border of an axis-aligned rectangle centered on the map
    (a 2-cell-wide center block on even dimensions). Returns a list of
    (x0, y0, x1, y1) inclusive rectangles. Raises ConfigError when the
    requested rings do not fit.
    """
    cx0, cx1 = (width - 1) // 2, width // 2
    cy0, cy1 = (height - 1) // 2, height // 2
    max_half = min(cx0, cy0, width - 1 - cx1, height - 1 - cy1)
    if spacing is None:
        spacing = min(2, max_half // ring_count)
    if spacing < 1 or ring_count * spacing > max_half:
        raise ConfigError(
            f"{ring_count} rings at spacing {spacing} do not fit a {width}x{height} grid"
        )
    rings = []
    for i in range(1, ring_count + 1):
        d = i * spacing
        rings.append((cx0 - d, cy0 - d, cx1 + d, cy1 + d))
    return rings


def ring_corner_cells(ring):
    x0, y0, x1, y1 = ring
    return [(x0, y0), (x1, y0), (x0, y1), (x1, y1)]


def sample_blocked_corner_count(rng: Rng) -> int:
    """1 blocked corner w.p. 0.25, 3 w.p. 0.25, 2 w.p. 0.5."""
    u = rng.uniform()
    if u < 0.25:
        return 1
    if u < 0.5:
        return 3
    return 2


def gen_masked_pyramid(spec: UpfSpec) -> Grid:
    width, height = spec.size
    rings = pyramid_rings(width, height, spec.ring_count, spec.ring_spacing)
    rng = Rng(spec.seed)
    blocked = np.zeros((height, width), dtype=bool)
    for ring in rings:
        x0, y0, x1, y1 = ring
        blocked[y0, x0 : x1 + 1] = True
        blocked[y1, x0 : x1 + 1] = True
        blocked[y0 : y1 + 1, x0] = True
        blocked[y0 : y1 + 1, x1] = True
        corners = ring_corner_cells(ring)
        k = sample_blocked_corner_count(rng)
        combos = list(itertools.combinations(range(4), k))
        chosen = set(combos[rng.randint(len(combos))])
        for ci, (x, y) in enumerate(corners):
            blocked[y, x] = ci in chosen
    return Grid(blocked)


# ---------------------------------------------------------------------------
# Prim-style maze


def gen_prim_maze(spec: UpfSpec, on_open=None) -> Grid:
    """Frontier-list maze growth.

    Start from one traversable cell on a fully blocked grid; repeatedly pop a
    random frontier cell and open it iff it has exactly one traversable
    4-neighbor, then push its blocked 4-neighbors. ``on_open`` (test hook)
    receives (cell, traversable_neighbor_count) at each opening.
    """
    width, height = spec.size
    rng = Rng(spec.seed)
    blocked = np.ones((height, width), dtype=bool)
    sx, sy = rng.randint(width), rng.randint(height)
    blocked[sy, sx] = False
    frontier = [(sx + dx, sy + dy) for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0))
                if 0 <= sx + dx < width and 0 <= sy + dy < height]
    while frontier:
        i = rng.randint(len(frontier))
        x, y = frontier[i]
        open_neighbors = [
            (x + dx, y + dy)
            for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0))
            if 0 <= x + dx < width and 0 <= y + dy < height and not blocked[y + dy, x + dx]
        ]
        if blocked[y, x] and len(open_neighbors) == 1:
            if on_open is not None:
                on_open((x, y), len(open_neighbors))
            blocked[y, x] = False
            for dx, dy in ((0, -1), (1, 0), (0, 1), (-1, 0)):
                nx, ny = x + dx, y + dy
                if 0 <= nx < width and 0 <= ny < height and blocked[ny, nx]:
                    frontier.append((nx, ny))
        # remove the processed cell (swap-pop keeps this O(1))
        frontier[i] = frontier[-1]
        frontier.pop()
    return Grid(blocked)


# ---------------------------------------------------------------------------
# Perlin-style smoothed noise


def majority_smooth(blocked: np.ndarray, oob_blocked: bool = True) -> np.ndarray:
    """One majority pass: blocked iff >4 of the 9 Moore-neighborhood cells are."""
    padded = np.pad(blocked, 1, constant_values=oob_blocked)
    counts = sum(
        padded[1 + dy : padded.shape[0] - 1 + dy, 1 + dx : padded.shape[1] - 1 + dx].astype(np.int8)
        for dy in (-1, 0, 1)
        for dx in (-1, 0, 1)
    )
    return counts > 4


def gen_perlin(spec: UpfSpec) -> Grid:
    width, height = spec.size
    rng = Rng(spec.seed)
    blocked = (rng.uniforms(width * height) < 0.5).reshape(height, width)
    for _ in range(spec.smoothing_passes):
        blocked = majority_smooth(blocked, spec.oob_blocked)
    return Grid(blocked)


# ---------------------------------------------------------------------------
# Recursive division


def recursive_division_walls(width, height, rng: Rng, min_side=4, max_splits=None) -> np.ndarray:
    """Pre-flip wall mask: alternating splits, one door per wall.

    The door guarantees the maze is connected before stochastic flips open
    extra passages.
    """
    walls = np.zeros((height, width), dtype=bool)
    budget = [np.inf if max_splits is None else max_splits]

    def split(x0, y0, w, h, horizontal):
        if min(w, h) < min_side or budget[0] <= 0:
            return
        budget[0] -= 1
        if horizontal:
            wy = y0 + 1 + rng.randint(h - 2)
            door = x0 + rng.randint(w)
            walls[wy, x0 : x0 + w] = True
            walls[wy, door] = False
            split(x0, y0, w, wy - y0, not horizontal)
            split(x0, wy + 1, w, y0 + h - wy - 1, not horizontal)
        else:
            wx = x0 + 1 + rng.randint(w - 2)
            door = y0 + rng.randint(h)
            walls[y0 : y0 + h, wx] = True
            walls[door, wx] = False
            split(x0, y0, wx - x0, h, not horizontal)
            split(wx + 1, y0, x0 + w - wx - 1, h, not horizontal)

    split(0, 0, width, height, height >= width)
    return walls


def gen_recursive_division(spec: UpfSpec) -> Grid:
    width, height = spec.size
    rng = Rng(spec.seed)
    walls = recursive_division_walls(width, height, rng, spec.min_chamber_side, spec.max_splits)
    blocked = walls.copy()
    if spec.wall_flip_prob > 0:
        ys, xs = np.nonzero(walls)
        for y, x in zip(ys, xs):
            if rng.uniform() < spec.wall_flip_prob:
                blocked[y, x] = False
    return Grid(blocked)


# ---------------------------------------------------------------------------
# Rotational symmetry


def gen_rotational_symmetry(spec: UpfSpec) -> Grid:
    width, height = spec.size
    if width % 2 != 0 or height % 2 != 0:
        raise ConfigError("rotational_symmetry requires even dimensions")
    rng = Rng(spec.seed)
    h2, w2 = height // 2, width // 2
    quad = (rng.uniforms(w2 * h2) < 0.5).reshape(h2, w2)
    top = np.hstack([quad, np.fliplr(quad)])
    return Grid(np.vstack([top, np.flipud(top)]))


# ---------------------------------------------------------------------------
# Dcaffo-style morphology


def gen_dcaffo(spec: UpfSpec) -> Grid:
    width, height = spec.size
    rng = Rng(spec.seed)
    noise = (rng.uniforms(width * height) < spec.noise_density).reshape(height, width)
    structure = np.ones((spec.closing_size, spec.closing_size), dtype=bool)
    # closing = dilation then erosion; out-of-bounds counts as blocked during
    # erosion so a fully blocked map is a fixed point
    dilated = ndimage.binary_dilation(noise, structure=structure)
    closed = ndimage.binary_erosion(dilated, structure=structure, border_value=1)
    return Grid(closed)


_GENERATORS = {
    "masked_pyramid": gen_masked_pyramid,
    "prim_maze": gen_prim_maze,
    "perlin": gen_perlin,
    "recursive_division": gen_recursive_division,
    "rotational_symmetry": gen_rotational_symmetry,
    "dcaffo": gen_dcaffo,
}
