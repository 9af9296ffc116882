import numpy as np
import pytest

from cfpath.grid import Grid


def grid_from_rows(rows):
    """Build a Grid from strings of '.' (free) and '#'/'@' (blocked)."""
    return Grid(np.array([[c in "#@T" for c in row] for row in rows], dtype=bool))


@pytest.fixture
def empty3():
    return grid_from_rows(["...", "...", "..."])
