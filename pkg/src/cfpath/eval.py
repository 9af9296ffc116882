"""Per-task and aggregate metrics: cost/expansion ratios, optimal-found,
lambda trade-off sweeps, and runtime breakdowns.

Conventions (also recorded in report metadata): means are arithmetic over
tasks, the +/- figures are population standard deviations over tasks, and
ratios are reported as percentages.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

OPTIMALITY_TOLERANCE = 1e-6


@dataclass(frozen=True)
class RunRecord:
    task_id: int
    solver: str
    found: bool
    cost: float
    expansions: int
    predict_time: float = 0.0
    search_time: float = 0.0


@dataclass(frozen=True)
class SolverSummary:
    solver: str
    tasks: int
    optimal_found_pct: float
    cost_ratio_mean_pct: float
    cost_ratio_std_pct: float
    exp_ratio_mean_pct: float
    exp_ratio_std_pct: float


def cost_ratio(run: RunRecord, baseline: RunRecord) -> float:
    _check_pair(run, baseline)
    if baseline.cost == 0:
        raise ValueError(f"task {run.task_id}: baseline cost is 0 (start=goal task leaked in)")
    return run.cost / baseline.cost


def exp_ratio(run: RunRecord, baseline: RunRecord) -> float:
    _check_pair(run, baseline)
    if baseline.expansions == 0:
        raise ValueError(f"task {run.task_id}: baseline has 0 expansions")
    return run.expansions / baseline.expansions


def _check_pair(run, baseline):
    if run.task_id != baseline.task_id:
        raise ValueError(f"task mismatch: {run.task_id} vs {baseline.task_id}")
    if not (run.found and baseline.found):
        raise ValueError(f"task {run.task_id}: ratio undefined for unsolved runs")


def optimal_found(run: RunRecord, optimal_cost: float) -> bool:
    if not run.found:
        raise ValueError(f"task {run.task_id}: no path found")
    return abs(run.cost - optimal_cost) <= OPTIMALITY_TOLERANCE


def j_objective(f1: float, f2: float, lam: float) -> float:
    """Convex cost/effort combination (1-lambda)*f1 + lambda*f2."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0, 1]")
    return (1.0 - lam) * f1 + lam * f2


def _mean_std(values: Sequence[float]):
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n  # population convention
    return mean, math.sqrt(var)


def summarize(
    runs: List[RunRecord],
    baseline: List[RunRecord],
    optimal_costs: Dict[int, float],
) -> SolverSummary:
    """Aggregate one solver's runs against the octile-A* baseline."""
    base_by_id = {r.task_id: r for r in baseline}
    missing = [r.task_id for r in runs if r.task_id not in base_by_id]
    if missing:
        raise ValueError(f"baseline missing tasks: {missing[:10]}")
    f1s, f2s, optimal = [], [], 0
    for run in runs:
        b = base_by_id[run.task_id]
        f1s.append(cost_ratio(run, b))
        f2s.append(exp_ratio(run, b))
        if optimal_found(run, optimal_costs[run.task_id]):
            optimal += 1
    n = len(runs)
    f1_mean, f1_std = _mean_std(f1s)
    f2_mean, f2_std = _mean_std(f2s)
    return SolverSummary(
        solver=runs[0].solver if runs else "?",
        tasks=n,
        optimal_found_pct=100.0 * optimal / n,
        cost_ratio_mean_pct=100.0 * f1_mean,
        cost_ratio_std_pct=100.0 * f1_std,
        exp_ratio_mean_pct=100.0 * f2_mean,
        exp_ratio_std_pct=100.0 * f2_std,
    )


def per_task_ratios(runs, baseline):
    """(f1, f2) per task, ordered by task id."""
    base_by_id = {r.task_id: r for r in baseline}
    pairs = []
    for run in sorted(runs, key=lambda r: r.task_id):
        b = base_by_id[run.task_id]
        pairs.append((cost_ratio(run, b), exp_ratio(run, b)))
    return pairs


def sweep_lambda(ratios_by_solver: Dict[str, List[tuple]], lambdas: Sequence[float]):
    """Mean J per solver at each lambda.

    Returns (table, crossovers): table maps solver -> list of mean J aligned
    with lambdas; crossovers lists (solver_a, solver_b, lambda) where the two
    solvers' mean-J lines intersect inside (0, 1).
    """
    for lam in lambdas:
        if not 0.0 <= lam <= 1.0:
            raise ValueError("lambda grid must lie in [0, 1]")
    means = {}
    for solver, pairs in ratios_by_solver.items():
        f1_mean = sum(p[0] for p in pairs) / len(pairs)
        f2_mean = sum(p[1] for p in pairs) / len(pairs)
        means[solver] = (f1_mean, f2_mean)
    table = {
        solver: [j_objective(f1, f2, lam) for lam in lambdas]
        for solver, (f1, f2) in means.items()
    }
    crossovers = []
    solvers = sorted(means)
    for i, a in enumerate(solvers):
        for b in solvers[i + 1 :]:
            lam = crossover_lambda(means[a], means[b])
            if lam is not None:
                crossovers.append((a, b, lam))
    return table, crossovers


def crossover_lambda(ab: tuple, cd: tuple) -> Optional[float]:
    """Lambda where two (f1, f2) lines give equal J, if inside [0, 1]."""
    (f1a, f2a), (f1b, f2b) = ab, cd
    denom = (f1b - f1a) + (f2a - f2b)
    if denom == 0:
        return None
    lam = (f1b - f1a) / denom
    return lam if 0.0 <= lam <= 1.0 else None


@dataclass(frozen=True)
class RuntimeRow:
    solver: str
    batch_size: int
    predict_total: float
    search_total: float

    @property
    def total(self):
        return self.predict_total + self.search_total


def runtime_breakdown(
    runs_by_solver: Dict[str, List[RunRecord]],
    batch_sizes: Sequence[int],
    predict_time_per_batch: Dict[str, Dict[int, float]] = None,
) -> List[RuntimeRow]:
    """Total runtime per (solver, batch size).

    Search time is batch-independent; prediction totals come either from the
    per-run predict_time (summed, same for every batch size) or, when a
    solver appears in ``predict_time_per_batch``, from externally measured
    per-batch-size totals (e.g. a predictor's timing log). Classical solvers
    report 0 prediction time.
    """
    rows = []
    for solver, runs in sorted(runs_by_solver.items()):
        search_total = sum(r.search_time for r in runs)
        default_predict = sum(r.predict_time for r in runs)
        for b in batch_sizes:
            predict = default_predict
            if predict_time_per_batch and solver in predict_time_per_batch:
                predict = predict_time_per_batch[solver].get(b, default_predict)
            rows.append(RuntimeRow(solver, b, predict, search_total))
    return rows
