"""Correction-factor fields: targets, masks, heuristic reconstruction, file I/O.

The correction factor at a cell is octile / exact-cost-to-go: 1 where the
octile estimate is already exact, approaching 0 where detours dominate, and
exactly 0 on unreachable free cells. Blocked cells and the goal cell carry a
dummy value of 1 and are masked out of any training loss.
"""

import struct

import numpy as np

from .grid import Cell, Grid, octile
from .search import HeuristicFn, dijkstra_field

CF_MAGIC = b"CFM1"
CF_EPSILON = 1e-9
# slack when validating stored values: float32 round-off on [0,1]
CF_VALUE_SLACK = 1e-6


class CfFormatError(ValueError):
    """Raised when a CF-map file is malformed."""


class CfField:
    """Dense correction-factor field with a training-loss validity mask.

    ``cf`` is (height, width) float64 in [0, 1]; ``mask`` is boolean, False
    exactly on blocked cells and the goal cell.
    """

    __slots__ = ("cf", "mask", "width", "height")

    def __init__(self, cf: np.ndarray, mask: np.ndarray):
        cf = np.asarray(cf, dtype=np.float64)
        mask = np.asarray(mask, dtype=bool)
        if cf.shape != mask.shape or cf.ndim != 2:
            raise ValueError("cf and mask must be 2-D arrays of the same shape")
        self.cf = cf
        self.mask = mask
        self.height, self.width = cf.shape

    def __eq__(self, other):
        if not isinstance(other, CfField):
            return NotImplemented
        return np.array_equal(self.cf, other.cf) and np.array_equal(self.mask, other.mask)


def build_mask(grid: Grid, goal) -> np.ndarray:
    """Mask of cells that participate in the training loss: free and not the goal."""
    if not grid.in_bounds(goal):
        raise ValueError(f"goal {tuple(goal)} is out of bounds")
    mask = ~grid.blocked.copy()
    mask[goal[1], goal[0]] = False
    return mask


def cf_target(grid: Grid, goal, corner_cutting: bool = True) -> CfField:
    """Exact correction-factor targets for one (grid, goal) pair.

    Reachable non-goal free cells get octile/h* in (0, 1]; unreachable free
    cells get 0; blocked cells and the goal get the dummy value 1 with
    mask=False.
    """
    field = dijkstra_field(grid, goal, corner_cutting=corner_cutting)
    hstar = field.values
    gx, gy = goal[0], goal[1]
    ys, xs = np.mgrid[0 : grid.height, 0 : grid.width]
    dx = np.abs(xs - gx)
    dy = np.abs(ys - gy)
    oct_vals = np.sqrt(2.0) * np.minimum(dx, dy) + np.abs(dx - dy)

    cf = np.ones_like(hstar)
    reachable = np.isfinite(hstar) & (hstar > 0)
    with np.errstate(invalid="ignore"):
        cf[reachable] = oct_vals[reachable] / hstar[reachable]
    unreachable_free = ~grid.blocked & np.isinf(hstar)
    cf[unreachable_free] = 0.0
    mask = build_mask(grid, goal)
    cf[~mask] = 1.0
    return CfField(cf, mask)


def h_from_cf(cf: CfField, goal, grid: Grid = None) -> HeuristicFn:
    """Heuristic reconstructed from a (predicted or exact) correction field.

    h(n) = octile(n, goal) / max(cf(n), 1e-9). The goal needs no special case:
    its octile term is 0 so h(goal) = 0 whatever the stored prediction.
    """
    if grid is not None and (grid.width != cf.width or grid.height != cf.height):
        raise ValueError(
            f"cf field is {cf.width}x{cf.height}, grid is {grid.width}x{grid.height}"
        )
    values = cf.cf
    gx, gy = goal[0], goal[1]

    def h(cell):
        return octile(cell, (gx, gy)) / max(values[cell[1], cell[0]], CF_EPSILON)

    return h


def write_cf(field: CfField, path) -> None:
    """Write the bit-exact CF-map binary format.

    Layout: magic "CFM1", u32le width, u32le height, width*height float32le cf
    values row-major, then width*height mask bytes (1/0).
    """
    with open(path, "wb") as f:
        f.write(CF_MAGIC)
        f.write(struct.pack("<II", field.width, field.height))
        f.write(field.cf.astype("<f4").tobytes())
        f.write(field.mask.astype(np.uint8).tobytes())


def read_cf(path) -> CfField:
    """Read and validate a CF-map file; inverse of write_cf up to float32 width."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 12 or data[:4] != CF_MAGIC:
        raise CfFormatError(f"{path}: bad magic, expected {CF_MAGIC!r}")
    width, height = struct.unpack("<II", data[4:12])
    if width < 1 or height < 1 or width * height > 2**28:
        raise CfFormatError(f"{path}: implausible dimensions {width}x{height}")
    n = width * height
    expected = 12 + 4 * n + n
    if len(data) != expected:
        raise CfFormatError(f"{path}: expected {expected} bytes, got {len(data)}")
    cf = np.frombuffer(data, dtype="<f4", count=n, offset=12).astype(np.float64)
    mask_bytes = np.frombuffer(data, dtype=np.uint8, count=n, offset=12 + 4 * n)
    if cf.min() < -CF_VALUE_SLACK or cf.max() > 1.0 + CF_VALUE_SLACK:
        raise CfFormatError(
            f"{path}: cf values outside [0,1] (min {cf.min():g}, max {cf.max():g})"
        )
    if not np.all((mask_bytes == 0) | (mask_bytes == 1)):
        raise CfFormatError(f"{path}: mask bytes must be 0 or 1")
    cf = np.clip(cf, 0.0, 1.0).reshape(height, width)
    return CfField(cf, mask_bytes.reshape(height, width).astype(bool))


def cf_file_roundtrips(field: CfField) -> CfField:
    """In-memory equivalent of write_cf + read_cf, for narrowing to float32."""
    cf32 = np.clip(field.cf.astype("<f4").astype(np.float64), 0.0, 1.0)
    return CfField(cf32, field.mask.copy())
