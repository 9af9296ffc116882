"""Training-map generators: Uniform, Beta, and Beta-Figures.

All three are pure functions of a GenSpec; the same spec always yields the
same grid, on any platform.
"""

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from .grid import Grid
from .rng import Rng


@dataclass(frozen=True)
class FigureParams:
    """Placement knobs for Beta-Figures primitives.

    Defaults guarantee each primitive covers at least 10 cells: the smallest
    square is 4x4 = 16 cells, the smallest circle (r=2) covers 13, the
    smallest cross (arm 3, width 2) covers well over 10. Centers are clamped
    so every primitive fits fully in bounds.
    """

    count_range: Tuple[int, int] = (8, 24)
    square_side: Tuple[int, int] = (4, 12)
    circle_radius: Tuple[int, int] = (2, 6)
    cross_arm: Tuple[int, int] = (3, 8)
    cross_width: int = 2


@dataclass(frozen=True)
class GenSpec:
    kind: str  # uniform | beta | beta_figures
    size: Tuple[int, int]  # (width, height)
    seed: int
    p: float = 0.5
    alpha: float = 2.0
    beta: float = 2.0
    figures: FigureParams = field(default_factory=FigureParams)

    def __post_init__(self):
        w, h = self.size
        if w < 8 or h < 8:
            raise ValueError("size must be at least 8x8")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be > 0")


def _noise(rng: Rng, width: int, height: int, p: float) -> np.ndarray:
    return (rng.uniforms(width * height) < p).reshape(height, width)


def gen_uniform(spec: GenSpec) -> Grid:
    """Each cell blocked independently with probability p (default 0.5)."""
    rng = Rng(spec.seed)
    return Grid(_noise(rng, spec.size[0], spec.size[1], spec.p))


def gen_beta(spec: GenSpec) -> Grid:
    """Draw a per-map density theta ~ Beta(alpha, beta), then i.i.d. blocking."""
    rng = Rng(spec.seed)
    theta = rng.beta(spec.alpha, spec.beta)
    return Grid(_noise(rng, spec.size[0], spec.size[1], theta))


def gen_beta_figures(spec: GenSpec) -> Grid:
    """Geometric primitives eroded by Beta noise.

    A cell is blocked iff it is blocked in both the figure mask and the Beta
    background mask (conjunction), giving coherent obstacle regions with
    stochastic fragmentation.
    """
    rng = Rng(spec.seed)
    figures_mask = _figures_mask(rng, spec.size[0], spec.size[1], spec.figures)
    theta = rng.beta(spec.alpha, spec.beta)
    beta_mask = _noise(rng, spec.size[0], spec.size[1], theta)
    return Grid(figures_mask & beta_mask)


def _figures_mask(rng: Rng, width: int, height: int, params: FigureParams) -> np.ndarray:
    mask = np.zeros((height, width), dtype=bool)
    for cells in figure_cells(rng, width, height, params):
        for x, y in cells:
            if 0 <= x < width and 0 <= y < height:
                mask[y, x] = True
    return mask


def figure_cells(rng: Rng, width: int, height: int, params: FigureParams):
    """Yield the cell set of each placed primitive (exposed for coverage tests)."""
    lo, hi = params.count_range
    count = lo + rng.randint(hi - lo + 1)
    for _ in range(count):
        kind = rng.randint(3)
        if kind == 0:
            yield _square(rng, width, height, params)
        elif kind == 1:
            yield _circle(rng, width, height, params)
        else:
            yield _cross(rng, width, height, params)


def _rand_in(rng, lo, hi):
    return lo + rng.randint(hi - lo + 1)


def _clamped_center(rng, width, height, half_w, half_h):
    # keep the primitive's bounding box fully in bounds; on grids too small to
    # fit it the center collapses to the middle and cells are clipped later
    cx = _rand_in(rng, min(half_w, width - 1), max(half_w, width - 1 - half_w))
    cy = _rand_in(rng, min(half_h, height - 1), max(half_h, height - 1 - half_h))
    return max(0, min(cx, width - 1 - half_w)), max(0, min(cy, height - 1 - half_h))


def _square(rng, width, height, params):
    side = _rand_in(rng, *params.square_side)
    half = side // 2
    cx, cy = _clamped_center(rng, width, height, half, half)
    x0, y0 = cx - half, cy - half
    return [(x0 + dx, y0 + dy) for dy in range(side) for dx in range(side)]


def _circle(rng, width, height, params):
    r = _rand_in(rng, *params.circle_radius)
    cx, cy = _clamped_center(rng, width, height, r, r)
    cells = []
    for dy in range(-r, r + 1):
        for dx in range(-r, r + 1):
            if dx * dx + dy * dy <= r * r:
                cells.append((cx + dx, cy + dy))
    return cells


def _cross(rng, width, height, params):
    arm = _rand_in(rng, *params.cross_arm)
    w = params.cross_width
    half = arm + (w - 1) // 2 + 1
    cx, cy = _clamped_center(rng, width, height, half, half)
    cells = set()
    # horizontal bar
    for dy in range(w):
        for dx in range(-arm, arm + w):
            cells.add((cx + dx, cy + dy))
    # vertical bar
    for dx in range(w):
        for dy in range(-arm, arm + w):
            cells.add((cx + dx, cy + dy))
    return sorted(cells)


def empty_map_probability(width: int, height: int, alpha: float = 2.0, beta: float = 2.0) -> float:
    """P(no blocked cell) under the Beta generator: E[(1-theta)^N].

    Closed form B(alpha, beta+N) / B(alpha, beta) via log-gamma.
    """
    n = width * height
    log_p = (
        math.lgamma(alpha + beta)
        - math.lgamma(beta)
        + math.lgamma(beta + n)
        - math.lgamma(alpha + beta + n)
    )
    return math.exp(log_p)


def generate(spec: GenSpec) -> Grid:
    """Dispatch on spec.kind."""
    if spec.kind == "uniform":
        return gen_uniform(spec)
    if spec.kind == "beta":
        return gen_beta(spec)
    if spec.kind == "beta_figures":
        return gen_beta_figures(spec)
    raise ValueError(f"unknown training generator kind {spec.kind!r}")
