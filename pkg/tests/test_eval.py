import pytest

from cfpath.eval import (
    RunRecord,
    cost_ratio,
    crossover_lambda,
    exp_ratio,
    j_objective,
    optimal_found,
    per_task_ratios,
    runtime_breakdown,
    summarize,
    sweep_lambda,
)


def run(task_id=0, solver="astar", cost=10.0, expansions=100, found=True,
        predict=0.0, search=0.0):
    return RunRecord(task_id, solver, found, cost, expansions, predict, search)


class TestRatios:
    def test_identity(self):
        r = run()
        assert cost_ratio(r, r) == 1.0
        assert exp_ratio(r, r) == 1.0

    def test_arithmetic(self):
        assert cost_ratio(run(cost=105.0), run(cost=100.0)) == pytest.approx(1.05)
        assert exp_ratio(run(expansions=50), run(expansions=100)) == pytest.approx(0.5)

    def test_task_mismatch(self):
        with pytest.raises(ValueError):
            cost_ratio(run(task_id=1), run(task_id=2))

    def test_unsolved_rejected(self):
        with pytest.raises(ValueError):
            cost_ratio(run(found=False), run())

    def test_zero_baseline_flagged(self):
        with pytest.raises(ValueError):
            cost_ratio(run(), run(cost=0.0))
        with pytest.raises(ValueError):
            exp_ratio(run(), run(expansions=0))


class TestOptimalFound:
    def test_exact(self):
        assert optimal_found(run(cost=12.0), 12.0)

    def test_within_tolerance(self):
        assert optimal_found(run(cost=12.0 + 5e-7), 12.0)

    def test_above_tolerance(self):
        assert not optimal_found(run(cost=12.5), 12.0)


class TestJObjective:
    def test_endpoints(self):
        assert j_objective(1.2, 0.4, 0.0) == 1.2
        assert j_objective(1.2, 0.4, 1.0) == 0.4

    def test_published_row_combination(self):
        # cost ratio 101.1%, expansions ratio 47.4%, lambda = 0.5
        assert j_objective(1.011, 0.474, 0.5) == pytest.approx(0.7425)

    def test_lambda_out_of_range(self):
        with pytest.raises(ValueError):
            j_objective(1.0, 1.0, 1.5)


class TestSweepLambda:
    def test_constant_single_solver(self):
        table, crossovers = sweep_lambda({"a": [(1.1, 0.5)] * 10}, [0.0, 0.5, 1.0])
        assert table["a"] == pytest.approx([1.1, 0.8, 0.5])
        assert crossovers == []

    def test_analytic_crossover(self):
        # (1.0, 0.6) vs (1.1, 0.4) cross at lambda = 1/3
        table, crossovers = sweep_lambda(
            {"a": [(1.0, 0.6)], "b": [(1.1, 0.4)]}, [0.0, 1.0]
        )
        [(sa, sb, lam)] = crossovers
        assert {sa, sb} == {"a", "b"}
        assert lam == pytest.approx(1 / 3)

    def test_monotone_when_f2_below_f1(self):
        table, _ = sweep_lambda({"a": [(1.2, 0.3)]}, [0.0, 0.25, 0.5, 0.75, 1.0])
        vals = table["a"]
        assert all(x > y for x, y in zip(vals, vals[1:]))

    def test_crossover_outside_unit_interval_dropped(self):
        assert crossover_lambda((1.0, 0.5), (1.1, 0.6)) is None

    def test_parallel_lines(self):
        assert crossover_lambda((1.0, 0.5), (1.0, 0.5)) is None


class TestSummarize:
    def test_baseline_against_itself(self):
        base = [run(task_id=i, cost=10.0 + i, expansions=50 + i) for i in range(5)]
        optimal = {i: 10.0 + i for i in range(5)}
        s = summarize(base, base, optimal)
        assert s.optimal_found_pct == 100.0
        assert s.cost_ratio_mean_pct == 100.0
        assert s.cost_ratio_std_pct == 0.0
        assert s.exp_ratio_mean_pct == 100.0
        assert s.exp_ratio_std_pct == 0.0

    def test_population_std(self):
        base = [run(task_id=0, cost=10, expansions=10), run(task_id=1, cost=10, expansions=10)]
        other = [
            run(task_id=0, solver="x", cost=10, expansions=5),
            run(task_id=1, solver="x", cost=10, expansions=15),
        ]
        s = summarize(other, base, {0: 10.0, 1: 10.0})
        assert s.exp_ratio_mean_pct == pytest.approx(100.0)
        assert s.exp_ratio_std_pct == pytest.approx(50.0)  # population, not sample


class TestRuntimeBreakdown:
    def test_classical_predict_zero(self):
        runs = {"astar": [run(search=0.5), run(task_id=1, search=0.25)]}
        rows = runtime_breakdown(runs, [1, 5, 100])
        assert all(r.predict_total == 0.0 for r in rows)
        assert all(r.search_total == pytest.approx(0.75) for r in rows)

    def test_total_is_sum(self):
        runs = {"cf": [run(solver="cf", predict=0.2, search=0.5)]}
        rows = runtime_breakdown(runs, [1, 2])
        for r in rows:
            assert r.total == pytest.approx(r.predict_total + r.search_total)

    def test_search_batch_independent(self):
        runs = {"cf": [run(solver="cf", predict=0.2, search=0.5)]}
        rows = runtime_breakdown(runs, [1, 2, 4, 8])
        assert len({r.search_total for r in rows}) == 1

    def test_external_predict_timing(self):
        runs = {"cf": [run(solver="cf", predict=0.9, search=0.5)]}
        rows = runtime_breakdown(runs, [1, 5], {"cf": {1: 2.0, 5: 0.4}})
        by_batch = {r.batch_size: r for r in rows}
        assert by_batch[1].predict_total == 2.0
        assert by_batch[5].predict_total == 0.4


class TestPerTaskRatios:
    def test_ordering(self):
        base = [run(task_id=1, cost=10, expansions=10), run(task_id=0, cost=20, expansions=40)]
        other = [
            run(task_id=0, solver="x", cost=22, expansions=20),
            run(task_id=1, solver="x", cost=10, expansions=5),
        ]
        pairs = per_task_ratios(other, base)
        assert pairs[0] == (pytest.approx(1.1), pytest.approx(0.5))
        assert pairs[1] == (pytest.approx(1.0), pytest.approx(0.5))
