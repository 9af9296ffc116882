import math

import numpy as np
import pytest

from cfpath.grid import (
    Cell,
    Grid,
    MapParseError,
    Move,
    SQRT2,
    neighbors,
    octile,
    parse_map,
    serialize_map,
)
from cfpath.rng import Rng

from conftest import grid_from_rows


class TestNeighbors:
    def test_corner_of_empty_grid(self, empty3):
        moves = neighbors(empty3, Cell(0, 0))
        assert set(moves) == {
            Move(Cell(1, 0), 1.0),
            Move(Cell(0, 1), 1.0),
            Move(Cell(1, 1), SQRT2),
        }

    def test_interior_of_empty_grid(self, empty3):
        assert len(neighbors(empty3, Cell(1, 1))) == 8

    def test_corner_cutting_permitted(self):
        # (1,0) and (0,1) blocked: the only move from (0,0) is the diagonal
        g = grid_from_rows([".#.", "#..", "..."])
        assert neighbors(g, Cell(0, 0)) == [Move(Cell(1, 1), SQRT2)]

    def test_no_corner_cutting_flag(self):
        g = grid_from_rows([".#.", "#..", "..."])
        assert neighbors(g, Cell(0, 0), corner_cutting=False) == []

    def test_fixed_order(self, empty3):
        targets = [m.target for m in neighbors(empty3, Cell(1, 1))]
        # N, NE, E, SE, S, SW, W, NW
        assert targets == [
            Cell(1, 0), Cell(2, 0), Cell(2, 1), Cell(2, 2),
            Cell(1, 2), Cell(0, 2), Cell(0, 1), Cell(0, 0),
        ]

    def test_blocked_input_cell_rejected(self):
        g = grid_from_rows(["#.", ".."])
        with pytest.raises(ValueError):
            neighbors(g, Cell(0, 0))

    def test_out_of_bounds_input_rejected(self, empty3):
        with pytest.raises(ValueError):
            neighbors(empty3, Cell(3, 0))

    def test_never_returns_blocked_or_oob(self):
        rng = Rng(5)
        for _ in range(50):
            blocked = (rng.uniforms(64) < 0.4).reshape(8, 8)
            g = Grid(blocked)
            for y in range(8):
                for x in range(8):
                    if blocked[y, x]:
                        continue
                    moves = neighbors(g, Cell(x, y))
                    assert len(moves) <= 8
                    for m in moves:
                        assert g.is_free(m.target)


class TestOctile:
    def test_identity(self):
        assert octile(Cell(0, 0), Cell(0, 0)) == 0.0

    def test_pure_diagonal(self):
        assert octile(Cell(0, 0), Cell(3, 3)) == pytest.approx(3 * SQRT2, abs=1e-12)

    def test_mixed(self):
        assert octile(Cell(0, 0), Cell(5, 2)) == pytest.approx(2 * SQRT2 + 3, abs=1e-12)

    def test_symmetric(self):
        rng = Rng(21)
        for _ in range(200):
            a = Cell(rng.randint(100), rng.randint(100))
            b = Cell(rng.randint(100), rng.randint(100))
            assert octile(a, b) == octile(b, a)

    def test_consistent_over_single_moves(self):
        # octile(a,g) <= move_cost(a,b) + octile(b,g), exhaustively on a 5x5 grid
        g = grid_from_rows(["....."] * 5)
        cells = [Cell(x, y) for x in range(5) for y in range(5)]
        for goal in cells:
            for a in cells:
                for move in neighbors(g, a):
                    assert octile(a, goal) <= move.cost + octile(move.target, goal) + 1e-12


class TestMapIO:
    def test_parse_simple(self):
        g = parse_map(b"type octile\nheight 2\nwidth 2\nmap\n.@\n@.\n")
        assert g.width == 2 and g.height == 2
        assert g.blocked[0, 1] and g.blocked[1, 0]
        assert not g.blocked[0, 0] and not g.blocked[1, 1]

    def test_t_counts_as_blocked(self):
        g = parse_map(b"type octile\nheight 1\nwidth 2\nmap\n.T\n")
        assert g.blocked[0, 1]

    def test_wrong_row_count(self):
        with pytest.raises(MapParseError):
            parse_map(b"type octile\nheight 2\nwidth 2\nmap\n..\n..\n..\n")

    def test_wrong_row_length(self):
        with pytest.raises(MapParseError, match="line 5"):
            parse_map(b"type octile\nheight 2\nwidth 2\nmap\n...\n..\n")

    def test_unknown_character(self):
        with pytest.raises(MapParseError, match="line 6"):
            parse_map(b"type octile\nheight 2\nwidth 2\nmap\n..\n.X\n")

    def test_bad_header(self):
        with pytest.raises(MapParseError, match="line 1"):
            parse_map(b"type tile\nheight 1\nwidth 1\nmap\n.\n")
        with pytest.raises(MapParseError, match="line 2"):
            parse_map(b"type octile\nheight x\nwidth 1\nmap\n.\n")

    def test_serialize_1x1(self):
        assert serialize_map(Grid([[False]])) == b"type octile\nheight 1\nwidth 1\nmap\n.\n"
        assert serialize_map(Grid([[True]])) == b"type octile\nheight 1\nwidth 1\nmap\n@\n"

    def test_serialize_64_structure(self):
        rng = Rng(31)
        g = Grid((rng.uniforms(64 * 64) < 0.5).reshape(64, 64))
        body = serialize_map(g).decode().split("\n")[4:]
        assert body[-1] == ""
        body = body[:-1]
        assert len(body) == 64
        assert all(len(row) == 64 for row in body)

    def test_round_trip_random_grids(self):
        rng = Rng(33)
        for _ in range(25):
            w = 1 + rng.randint(20)
            h = 1 + rng.randint(20)
            g = Grid((rng.uniforms(w * h) < 0.5).reshape(h, w))
            assert parse_map(serialize_map(g)) == g

    def test_canonicalization_round_trip(self):
        raw = b"type octile\r\nheight 2\r\nwidth 2\r\nmap\r\n.T\r\n@.\r\n"
        canonical = b"type octile\nheight 2\nwidth 2\nmap\n.@\n@.\n"
        assert serialize_map(parse_map(raw)) == canonical
        assert serialize_map(parse_map(canonical)) == canonical


class TestGrid:
    def test_immutable(self, empty3):
        with pytest.raises(AttributeError):
            empty3.width = 5
        with pytest.raises(ValueError):
            empty3.blocked[0, 0] = True

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Grid(np.zeros((0, 3), dtype=bool))

    def test_sqrt2_constant_shared(self):
        assert SQRT2 == math.sqrt(2.0)
