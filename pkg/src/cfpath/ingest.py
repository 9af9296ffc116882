"""Transforms user-supplied source maps into target-resolution grids.

Four source kinds: baldurs_gate (512x512, downsample + random 90-degree
rotation), moving_street (random 2x-size crop, downsample by 2), house_expo
(downsample and/or pad with obstacles to exact size), tmp (validated
pass-through). All transforms are deterministic given (sources, seed).
"""

import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple

import numpy as np

from .grid import Grid, parse_map
from .rng import Rng

KINDS = ("baldurs_gate", "moving_street", "house_expo", "tmp")

DOWNSAMPLE_RULES = ("majority", "any", "center")


class IngestError(ValueError):
    pass


@dataclass
class IngestRecord:
    """Per-output provenance, written into the manifest."""

    source: str
    crop: Tuple[int, int] = (0, 0)
    rotation: int = 0  # quarter turns
    rule: str = "majority"


def downsample(grid: Grid, factor: int, rule: str = "majority") -> Grid:
    """Reduce each factor x factor block to one cell.

    majority: blocked iff the block's blocked fraction >= 0.5 (default; the
    any-blocked rule seals narrow corridors at large reductions);
    any: blocked iff any source cell is; center: take the block's center cell.
    """
    if factor < 2:
        raise IngestError("factor must be >= 2")
    if rule not in DOWNSAMPLE_RULES:
        raise IngestError(f"unknown downsample rule {rule!r}")
    if grid.height % factor or grid.width % factor:
        raise IngestError(
            f"dims {grid.width}x{grid.height} not divisible by factor {factor}"
        )
    h, w = grid.height // factor, grid.width // factor
    blocks = grid.blocked.reshape(h, factor, w, factor)
    if rule == "majority":
        out = blocks.mean(axis=(1, 3)) >= 0.5
    elif rule == "any":
        out = blocks.any(axis=(1, 3))
    else:
        c = factor // 2
        out = blocks[:, c, :, c]
    return Grid(out)


def load_sources(directory) -> List[Tuple[str, Grid]]:
    """Parse every map file in a directory, sorted by name for determinism."""
    paths = sorted(p for p in Path(directory).iterdir() if p.is_file())
    if not paths:
        raise IngestError(f"no source files in {directory}")
    out = []
    for p in paths:
        data = p.read_bytes()
        if data[:2] == b"P5":
            out.append((p.name, _parse_pgm(data, p.name)))
        else:
            out.append((p.name, parse_map(data)))
    return out


def _parse_pgm(data: bytes, name: str) -> Grid:
    """Binary PGM raster: one byte per pixel, values >= 128 are blocked."""
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P5":
        raise IngestError(f"{name}: not a binary PGM")
    width, height = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    if pixels.size != width * height:
        raise IngestError(f"{name}: truncated raster")
    return Grid((pixels >= 128).reshape(height, width))


def rotate(grid: Grid, quarter_turns: int) -> Grid:
    return Grid(np.rot90(grid.blocked, -quarter_turns % 4))


def _check_not_full(blocked, source):
    if blocked.all():
        raise IngestError(f"{source}: output map is fully blocked, cannot host tasks")


def ingest_baldurs_gate(sources, size, count, seed, rule="majority"):
    """Random source, downsample 512 -> size, random multiple-of-90 rotation."""
    grids, records = [], []
    rng = Rng(seed)
    for name, grid in sources:
        if grid.width != 512 or grid.height != 512:
            raise IngestError(f"{name}: expected 512x512 source, got {grid.width}x{grid.height}")
    if 512 % size:
        raise IngestError(f"512 not divisible by target size {size}")
    for _ in range(count):
        name, src = sources[rng.randint(len(sources))]
        small = downsample(src, 512 // size, rule)
        turns = rng.randint(4)
        out = rotate(small, turns)
        _check_not_full(out.blocked, name)
        grids.append(out)
        records.append(IngestRecord(source=name, rotation=turns, rule=rule))
    return grids, records


def ingest_moving_street(sources, size, count, seed, rule="majority"):
    """Random 2size x 2size crop, then downsample by 2."""
    grids, records = [], []
    rng = Rng(seed)
    window = 2 * size
    for name, grid in sources:
        if grid.width < window or grid.height < window:
            raise IngestError(
                f"{name}: source {grid.width}x{grid.height} smaller than crop window {window}"
            )
    for _ in range(count):
        name, src = sources[rng.randint(len(sources))]
        ox = rng.randint(src.width - window + 1)
        oy = rng.randint(src.height - window + 1)
        crop = Grid(src.blocked[oy : oy + window, ox : ox + window])
        out = downsample(crop, 2, rule)
        _check_not_full(out.blocked, name)
        grids.append(out)
        records.append(IngestRecord(source=name, crop=(ox, oy), rule=rule))
    return grids, records


def resize_pad(grid: Grid, size: int, rule: str = "majority") -> Grid:
    """Downsample (if needed) then pad symmetrically with obstacles to size x size."""
    blocked = grid.blocked
    if grid.width > size or grid.height > size:
        factor = max(
            math.ceil(grid.width / size), math.ceil(grid.height / size)
        )
        # pad up to a multiple of factor with obstacles before block reduction
        ph = (-blocked.shape[0]) % factor
        pw = (-blocked.shape[1]) % factor
        padded = np.pad(blocked, ((0, ph), (0, pw)), constant_values=True)
        blocked = downsample(Grid(padded), factor, rule).blocked
    py = size - blocked.shape[0]
    px = size - blocked.shape[1]
    blocked = np.pad(
        blocked,
        ((py // 2, py - py // 2), (px // 2, px - px // 2)),
        constant_values=True,
    )
    return Grid(blocked)


def ingest_house_expo(sources, size, count, seed, rule="majority"):
    grids, records = [], []
    rng = Rng(seed)
    for _ in range(count):
        name, src = sources[rng.randint(len(sources))]
        out = resize_pad(src, size, rule)
        _check_not_full(out.blocked, name)
        grids.append(out)
        records.append(IngestRecord(source=name, rule=rule))
    return grids, records


def ingest_tmp(sources, size, count, seed):
    """Pass-through with dimension validation; sources are pre-generated."""
    for name, grid in sources:
        if grid.width != size or grid.height != size:
            raise IngestError(f"{name}: expected {size}x{size}, got {grid.width}x{grid.height}")
    grids, records = [], []
    rng = Rng(seed)
    for _ in range(count):
        name, src = sources[rng.randint(len(sources))]
        _check_not_full(src.blocked, name)
        grids.append(src)
        records.append(IngestRecord(source=name))
    return grids, records


def ingest(kind, sources, size, count, seed, rule="majority"):
    if kind == "baldurs_gate":
        return ingest_baldurs_gate(sources, size, count, seed, rule)
    if kind == "moving_street":
        return ingest_moving_street(sources, size, count, seed, rule)
    if kind == "house_expo":
        return ingest_house_expo(sources, size, count, seed, rule)
    if kind == "tmp":
        return ingest_tmp(sources, size, count, seed)
    raise IngestError(f"unknown ingest kind {kind!r}")
