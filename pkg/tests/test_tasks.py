import math

import numpy as np
import pytest

from cfpath.gen_train import GenSpec, gen_beta
from cfpath.gen_upf import UpfSpec, generate as generate_upf
from cfpath.grid import Cell, Grid, SQRT2, octile
from cfpath.rng import Rng
from cfpath.search import dijkstra_field
from cfpath.tasks import (
    FilterConfig,
    TaskRecord,
    h_min_reference,
    read_tasks,
    reachability_diversity,
    sample_task,
    write_tasks,
)

from conftest import grid_from_rows


class TestReachabilityDiversity:
    def test_1x1(self):
        assert reachability_diversity(Grid([[False]]), Cell(0, 0)) == 0.0

    def test_empty_3x3_centered(self):
        g = grid_from_rows(["...", "...", "..."])
        assert reachability_diversity(g, Cell(1, 1)) == pytest.approx(4 + 4 * SQRT2, abs=1e-9)

    def test_isolated_pocket(self):
        g = grid_from_rows([".#.", "#.#", ".#."])
        # corner-cutting: center still reaches the corners diagonally, so use
        # a sealed 1-cell pocket instead
        g2 = grid_from_rows([".##", "##.", "#.."])
        assert reachability_diversity(g2, Cell(0, 0)) == 0.0

    def test_blocked_goal(self):
        g = grid_from_rows(["#.", ".."])
        with pytest.raises(ValueError):
            reachability_diversity(g, Cell(0, 0))


class TestHMinReference:
    def test_side_1(self):
        assert h_min_reference(1) == 0.0

    def test_side_3(self):
        assert h_min_reference(3) == pytest.approx(4 + 4 * SQRT2, abs=1e-9)

    def test_side_3_closed_form(self):
        # independent oracle: sum of octile distances to the center
        expected = sum(
            octile((x, y), (1, 1)) for x in range(3) for y in range(3)
        )
        assert h_min_reference(3) == pytest.approx(expected, abs=1e-9)

    def test_side_11_vs_published_constant(self):
        # the octile/Dijkstra sum on the stated 11x11 derivation grid does NOT
        # reproduce the published 553; the shipped default stays 553 and this
        # oracle exists to surface the discrepancy
        expected = sum(
            octile((x, y), (5, 5)) for x in range(11) for y in range(11)
        )
        value = h_min_reference(11)
        assert value == pytest.approx(expected, abs=1e-9)
        assert value == pytest.approx(531.1269837220809, abs=1e-9)
        assert abs(value - 553.0) > 1.0  # documented mismatch

    def test_even_side_rejected(self):
        with pytest.raises(ValueError):
            h_min_reference(10)


class TestSampleTask:
    def test_empty_map_rejected_for_complexity(self):
        g = Grid(np.zeros((64, 64), dtype=bool))
        out = sample_task(g, Rng(1), FilterConfig(max_attempts=50))
        assert not out.accepted
        assert out.reject_reason == "complexity"
        assert out.rejections.complexity == 50

    def test_small_component_rejected_for_diversity(self):
        # a 2-cell corridor: H = 1 < 553
        rows = ["##########"] * 10
        rows[1] = "#..#######"
        g = grid_from_rows(rows)
        out = sample_task(g, Rng(2), FilterConfig(max_attempts=20))
        assert not out.accepted
        assert out.reject_reason == "diversity"

    def test_accepted_records_satisfy_filters(self):
        cfg = FilterConfig()
        accepted = 0
        for seed in range(40):
            g = generate_upf(UpfSpec("prim_maze", (64, 64), seed))
            out = sample_task(g, Rng(seed), cfg, map_path=f"m{seed}.map")
            if not out.accepted:
                continue
            accepted += 1
            t = out.task
            assert t.optimal_cost >= cfg.complexity_factor * t.h_oct_start - 1e-9
            assert t.h_value >= cfg.h_min
            # stored optimal cost matches a fresh field lookup
            field = dijkstra_field(g, t.goal)
            assert t.optimal_cost == pytest.approx(field.values[t.start.y, t.start.x], abs=1e-9)
        assert accepted >= 30

    def test_deterministic(self):
        g = gen_beta(GenSpec("beta", (64, 64), 90))
        a = sample_task(g, Rng(4), FilterConfig())
        b = sample_task(g, Rng(4), FilterConfig())
        assert a.accepted == b.accepted
        if a.accepted:
            assert a.task == b.task

    def test_needs_two_free_cells(self):
        with pytest.raises(ValueError):
            sample_task(Grid([[False]]), Rng(1), FilterConfig())


class TestFilterConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            FilterConfig(h_min=0)
        with pytest.raises(ValueError):
            FilterConfig(complexity_factor=0.9)

    def test_defaults_match_published_values(self):
        cfg = FilterConfig()
        assert cfg.h_min == 553.0
        assert cfg.complexity_factor == 1.05


class TestTaskFileIO:
    def test_round_trip(self, tmp_path):
        records = [
            TaskRecord("maps/m0.map", Cell(1, 2), Cell(3, 4), 12.123456789, 3.0, 600.0),
            TaskRecord("maps/m1.map", Cell(0, 0), Cell(5, 5), 5 * SQRT2, 5 * SQRT2, 700.0),
        ]
        path = tmp_path / "tasks.csv"
        write_tasks(records, path)
        loaded = read_tasks(path)
        assert len(loaded) == 2
        assert loaded[0].map_path == "maps/m0.map"
        assert loaded[0].start == Cell(1, 2) and loaded[0].goal == Cell(3, 4)
        assert loaded[0].optimal_cost == pytest.approx(12.123456789, abs=1e-9)
        assert loaded[1].optimal_cost == pytest.approx(5 * SQRT2, abs=1e-9)

    def test_nine_fractional_digits(self, tmp_path):
        path = tmp_path / "tasks.csv"
        write_tasks([TaskRecord("m.map", Cell(0, 0), Cell(1, 1), math.sqrt(2), 1.0, 1.0)], path)
        line = path.read_text().splitlines()[1]
        assert line.endswith("1.414213562")

    def test_bad_header(self, tmp_path):
        path = tmp_path / "tasks.csv"
        path.write_text("nope\n")
        with pytest.raises(ValueError):
            read_tasks(path)
