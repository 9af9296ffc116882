"""Command-line entry point.

Subcommands: gen-train, gen-upf, ingest, gen-tasks, compute-cf, solve, report.
Every subcommand writes a manifest with its full config and seeds; reruns with
identical flags produce byte-identical artifacts (timing fields excluded).
All randomness flows from --seed via per-item derivation (base_seed + index);
ambient entropy and environment variables are never consulted.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import csv
import dataclasses
import json
import time
from pathlib import Path

import click

from . import __version__
from .cf import cf_target, h_from_cf, read_cf, write_cf
from .eval import (
    RunRecord,
    per_task_ratios,
    runtime_breakdown,
    summarize,
    sweep_lambda,
)
from .gen_train import FigureParams, GenSpec, generate as generate_train
from .gen_upf import TOPOLOGIES, UpfSpec, generate as generate_upf
from .grid import parse_map, serialize_map
from .ingest import KINDS, DOWNSAMPLE_RULES, ingest as run_ingest, load_sources
from .rng import Rng, derive_seed
from .search import astar, octile_heuristic
from .tasks import (
    FilterConfig,
    read_tasks,
    resolve_map_path,
    sample_task,
    write_tasks,
)

RUNS_HEADER = ["task_id", "solver", "found", "cost", "expansions", "predict_time", "search_time"]


@click.group()
@click.version_option(__version__)
def main():
    """Grid pathfinding benchmark harness."""


def _write_manifest(out_dir: Path, command, config, items):
    manifest = {
        "command": command,
        "version": __version__,
        "config": config,
        "items": items,
    }
    path = out_dir / "manifest.json" if out_dir.is_dir() else Path(str(out_dir) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _write_maps(grids, out_dir: Path):
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for i, grid in enumerate(grids):
        name = f"map_{i:06d}.map"
        (out_dir / name).write_bytes(serialize_map(grid))
        names.append(name)
    return names


@main.command("gen-train")
@click.option("--kind", type=click.Choice(["uniform", "beta", "beta_figures"]), required=True)
@click.option("--count", type=int, required=True)
@click.option("--size", type=int, default=64, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--p", type=float, default=0.5, show_default=True, help="Blocking probability (uniform).")
@click.option("--alpha", type=float, default=2.0, show_default=True)
@click.option("--beta", "beta_", type=float, default=2.0, show_default=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_gen_train(kind, count, size, seed, p, alpha, beta_, out_dir):
    """Generate training maps (uniform / beta / beta_figures noise priors)."""
    grids, items = [], []
    for i in range(count):
        item_seed = derive_seed(seed, i)
        spec = GenSpec(kind=kind, size=(size, size), seed=item_seed, p=p, alpha=alpha, beta=beta_)
        grids.append(generate_train(spec))
        items.append({"file": f"map_{i:06d}.map", "seed": item_seed})
    _write_maps(grids, out_dir)
    config = {"kind": kind, "count": count, "size": size, "seed": seed, "p": p,
              "alpha": alpha, "beta": beta_, "figures": dataclasses.asdict(FigureParams())}
    _write_manifest(out_dir, "gen-train", config, items)
    click.echo(f"wrote {count} maps to {out_dir}")


@main.command("gen-upf")
@click.option("--topology", type=click.Choice(TOPOLOGIES), required=True)
@click.option("--count", type=int, required=True)
@click.option("--size", type=int, default=64, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_gen_upf(topology, count, size, seed, out_dir):
    """Generate evaluation maps from one procedural topology."""
    grids, items = [], []
    for i in range(count):
        item_seed = derive_seed(seed, i)
        spec = UpfSpec(topology=topology, size=(size, size), seed=item_seed)
        try:
            grids.append(generate_upf(spec))
        except ValueError as e:
            raise click.ClickException(str(e)) from e
        items.append({"file": f"map_{i:06d}.map", "seed": item_seed})
    _write_maps(grids, out_dir)
    config = {"topology": topology, "count": count, "size": size, "seed": seed}
    _write_manifest(out_dir, "gen-upf", config, items)
    click.echo(f"wrote {count} maps to {out_dir}")


@main.command("ingest")
@click.option("--kind", type=click.Choice(KINDS), required=True)
@click.option("--src-dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--count", type=int, required=True)
@click.option("--size", type=int, default=64, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--downsample-rule", type=click.Choice(DOWNSAMPLE_RULES), default="majority", show_default=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_ingest(kind, src_dir, count, size, seed, downsample_rule, out_dir):
    """Transform user-supplied source maps to the target resolution."""
    try:
        sources = load_sources(src_dir)
        grids, records = run_ingest(kind, sources, size, count, seed, downsample_rule)
    except ValueError as e:
        raise click.ClickException(str(e)) from e
    names = _write_maps(grids, out_dir)
    items = [
        {"file": name, **dataclasses.asdict(rec)}
        for name, rec in zip(names, records)
    ]
    config = {"kind": kind, "src_dir": str(src_dir), "count": count, "size": size,
              "seed": seed, "downsample_rule": downsample_rule}
    _write_manifest(out_dir, "ingest", config, items)
    click.echo(f"wrote {count} maps to {out_dir}")


@main.command("gen-tasks")
@click.option("--maps-dir", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--per-map", type=int, default=1, show_default=True)
@click.option("--seed", type=int, required=True)
@click.option("--h-min", type=float, default=FilterConfig().h_min, show_default=True)
@click.option("--complexity-factor", type=float, default=FilterConfig().complexity_factor, show_default=True)
@click.option("--max-attempts", type=int, default=FilterConfig().max_attempts, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def cmd_gen_tasks(maps_dir, per_map, seed, h_min, complexity_factor, max_attempts, out):
    """Sample filtered start/goal tasks over every map in a directory tree."""
    cfg = FilterConfig(h_min=h_min, complexity_factor=complexity_factor, max_attempts=max_attempts)
    map_files = sorted(p for p in maps_dir.rglob("*.map"))
    if not map_files:
        raise click.ClickException(f"no .map files under {maps_dir}")
    out.parent.mkdir(parents=True, exist_ok=True)
    records = []
    rejected_maps = []
    rejections = {"diversity": 0, "complexity": 0}
    for mi, map_file in enumerate(map_files):
        grid = parse_map(map_file.read_bytes())
        rng = Rng(derive_seed(seed, mi))
        rel = map_file.relative_to(maps_dir)
        try:
            rel_to_out = map_file.resolve().relative_to(out.parent.resolve())
            stored = str(rel_to_out)
        except ValueError:
            stored = str(map_file.resolve())
        for _ in range(per_map):
            outcome = sample_task(grid, rng, cfg, map_path=stored)
            rejections["diversity"] += outcome.rejections.diversity
            rejections["complexity"] += outcome.rejections.complexity
            if outcome.accepted:
                records.append(outcome.task)
            else:
                rejected_maps.append(str(rel))
    write_tasks(records, out)
    config = {"maps_dir": str(maps_dir), "per_map": per_map, "seed": seed,
              "h_min": h_min, "complexity_factor": complexity_factor,
              "max_attempts": max_attempts}
    items = [{"tasks": len(records), "rejections": rejections,
              "exhausted_on": sorted(set(rejected_maps))}]
    _write_manifest(out, "gen-tasks", config, items)
    click.echo(
        f"wrote {len(records)} tasks to {out} "
        f"(rejections: diversity={rejections['diversity']}, complexity={rejections['complexity']})"
    )


@main.command("compute-cf")
@click.option("--tasks", "tasks_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
@click.option("--no-corner-cutting", is_flag=True, default=False)
def cmd_compute_cf(tasks_file, out_dir, no_corner_cutting):
    """Write exact correction-factor supervision (one CF file per task)."""
    records = read_tasks(tasks_file)
    out_dir.mkdir(parents=True, exist_ok=True)
    grids = {}
    failures = []
    items = []
    for task_id, task in enumerate(records):
        name = f"task_{task_id:06d}.cfm"
        try:
            map_path = resolve_map_path(task, tasks_file)
            if map_path not in grids:
                grids[map_path] = parse_map(map_path.read_bytes())
            field = cf_target(grids[map_path], task.goal, corner_cutting=not no_corner_cutting)
            write_cf(field, out_dir / name)
            items.append({"file": name, "task_id": task_id})
        except (OSError, ValueError) as e:
            failures.append((task_id, str(e)))
    config = {"tasks": str(tasks_file), "corner_cutting": not no_corner_cutting}
    _write_manifest(out_dir, "compute-cf", config, items)
    click.echo(f"wrote {len(items)} CF files to {out_dir}")
    if failures:
        for task_id, msg in failures:
            click.echo(f"task {task_id} failed: {msg}", err=True)
        raise click.ClickException(f"{len(failures)} task(s) failed")


def _solve_one(grid, task, solver, cf_dir, task_id, corner_cutting):
    predict_time = 0.0
    if solver == "astar":
        h, w = octile_heuristic(task.goal), 1.0
    elif solver.startswith("wastar:"):
        h, w = octile_heuristic(task.goal), float(solver.split(":", 1)[1])
    elif solver == "cf:exact":
        field = cf_target(grid, task.goal, corner_cutting=corner_cutting)
        h, w = h_from_cf(field, task.goal, grid), 1.0
    elif solver == "cf:file":
        t0 = time.perf_counter()
        field = read_cf(cf_dir / f"task_{task_id:06d}.cfm")
        predict_time = time.perf_counter() - t0
        h, w = h_from_cf(field, task.goal, grid), 1.0
    else:
        raise ValueError(f"unknown solver {solver!r}")
    t0 = time.perf_counter()
    result = astar(grid, task.start, task.goal, h, w, corner_cutting=corner_cutting)
    search_time = time.perf_counter() - t0
    return RunRecord(task_id, solver, result.found, result.cost, result.expansions,
                     predict_time, search_time)


@main.command("solve")
@click.option("--tasks", "tasks_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--solver", required=True,
              help="astar | wastar:W | cf:exact | cf:file")
@click.option("--cf-dir", type=click.Path(path_type=Path), default=None,
              help="Directory of predicted CF files (required for cf:file).")
@click.option("--no-corner-cutting", is_flag=True, default=False)
@click.option("--out", type=click.Path(path_type=Path), required=True)
def cmd_solve(tasks_file, solver, cf_dir, no_corner_cutting, out):
    """Run one solver over a task file, recording cost/expansions/timing."""
    if solver == "cf:file" and cf_dir is None:
        raise click.UsageError("cf:file requires --cf-dir")
    if solver.startswith("wastar:"):
        try:
            w = float(solver.split(":", 1)[1])
        except ValueError:
            raise click.UsageError(f"bad solver weight in {solver!r}")
        if w < 1:
            raise click.UsageError("wastar weight must be >= 1")
    elif solver not in ("astar", "cf:exact", "cf:file"):
        raise click.UsageError(f"unknown solver {solver!r}")
    records = read_tasks(tasks_file)
    grids = {}
    runs = []
    failures = []
    for task_id, task in enumerate(records):
        try:
            map_path = resolve_map_path(task, tasks_file)
            if map_path not in grids:
                grids[map_path] = parse_map(map_path.read_bytes())
            runs.append(_solve_one(grids[map_path], task, solver, cf_dir, task_id,
                                   not no_corner_cutting))
        except (OSError, ValueError) as e:
            failures.append((task_id, str(e)))
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RUNS_HEADER)
        for r in runs:
            writer.writerow([r.task_id, r.solver, int(r.found), f"{r.cost:.9f}",
                             r.expansions, f"{r.predict_time:.6f}", f"{r.search_time:.6f}"])
    config = {"tasks": str(tasks_file), "solver": solver,
              "cf_dir": str(cf_dir) if cf_dir else None,
              "corner_cutting": not no_corner_cutting,
              "tie_breaking": "f, then larger g, then FIFO",
              "reexpansion": "reopen on strictly smaller g (1e-12)"}
    _write_manifest(out, "solve", config, [{"runs": len(runs)}])
    click.echo(f"wrote {len(runs)} runs to {out}")
    if failures:
        for task_id, msg in failures:
            click.echo(f"task {task_id} failed: {msg}", err=True)
        raise click.ClickException(f"{len(failures)} task(s) failed")


def read_runs(path):
    runs = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        if header != RUNS_HEADER:
            raise ValueError(f"{path}: unexpected runs header {header}")
        for row in reader:
            runs.append(RunRecord(int(row[0]), row[1], bool(int(row[2])), float(row[3]),
                                  int(row[4]), float(row[5]), float(row[6])))
    return runs


@main.command("report")
@click.option("--tasks", "tasks_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--runs", "runs_files", type=click.Path(exists=True, path_type=Path),
              multiple=True, required=True)
@click.option("--baseline", "baseline_file", type=click.Path(exists=True, path_type=Path), required=True)
@click.option("--lambdas", default="0,0.25,0.5,0.75,1", show_default=True)
@click.option("--batch-sizes", default="1,5,100", show_default=True)
@click.option("--out-dir", type=click.Path(path_type=Path), required=True)
def cmd_report(tasks_file, runs_files, baseline_file, lambdas, batch_sizes, out_dir):
    """Aggregate metrics, lambda sweep, and runtime breakdown over run files."""
    records = read_tasks(tasks_file)
    optimal_costs = {i: t.optimal_cost for i, t in enumerate(records)}
    topology = {i: (Path(t.map_path).parent.name or "root") for i, t in enumerate(records)}
    baseline = read_runs(baseline_file)
    base_ids = {r.task_id for r in baseline}
    solver_runs = {}
    for rf in runs_files:
        runs = read_runs(rf)
        ids = {r.task_id for r in runs}
        if ids != base_ids:
            missing = sorted(base_ids ^ ids)
            raise click.ClickException(
                f"{rf}: task set differs from baseline (ids {missing[:20]}...)"
            )
        solver_runs[runs[0].solver] = runs
    out_dir.mkdir(parents=True, exist_ok=True)

    summaries = {s: summarize(r, baseline, optimal_costs) for s, r in sorted(solver_runs.items())}
    with open(out_dir / "aggregate.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["solver", "tasks", "optimal_found_pct", "cost_ratio_mean_pct",
                         "cost_ratio_std_pct", "exp_ratio_mean_pct", "exp_ratio_std_pct"])
        for s in summaries.values():
            writer.writerow([s.solver, s.tasks, f"{s.optimal_found_pct:.2f}",
                             f"{s.cost_ratio_mean_pct:.1f}", f"{s.cost_ratio_std_pct:.1f}",
                             f"{s.exp_ratio_mean_pct:.1f}", f"{s.exp_ratio_std_pct:.1f}"])

    topologies = sorted(set(topology.values()))
    with open(out_dir / "per_topology.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["topology", "solver", "tasks", "optimal_found_pct",
                         "cost_ratio_mean_pct", "cost_ratio_std_pct",
                         "exp_ratio_mean_pct", "exp_ratio_std_pct"])
        for topo in topologies:
            ids = {i for i, t in topology.items() if t == topo}
            topo_base = [r for r in baseline if r.task_id in ids]
            for solver, runs in sorted(solver_runs.items()):
                sub = [r for r in runs if r.task_id in ids]
                s = summarize(sub, topo_base, optimal_costs)
                writer.writerow([topo, s.solver, s.tasks, f"{s.optimal_found_pct:.2f}",
                                 f"{s.cost_ratio_mean_pct:.1f}", f"{s.cost_ratio_std_pct:.1f}",
                                 f"{s.exp_ratio_mean_pct:.1f}", f"{s.exp_ratio_std_pct:.1f}"])

    lam_grid = [float(x) for x in lambdas.split(",") if x.strip() != ""]
    ratios = {s: per_task_ratios(r, baseline) for s, r in solver_runs.items()}
    table, crossovers = sweep_lambda(ratios, lam_grid)
    solvers = sorted(table)
    with open(out_dir / "lambda_sweep.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["lambda"] + solvers)
        for li, lam in enumerate(lam_grid):
            writer.writerow([f"{lam:g}"] + [f"{table[s][li]:.6f}" for s in solvers])
    with open(out_dir / "crossovers.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["solver_a", "solver_b", "lambda"])
        for a, b, lam in crossovers:
            writer.writerow([a, b, f"{lam:.6f}"])

    batches = [int(x) for x in batch_sizes.split(",") if x.strip() != ""]
    rt_rows = runtime_breakdown(solver_runs, batches)
    with open(out_dir / "runtime.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["solver", "batch_size", "predict_total", "search_total", "total"])
        for row in rt_rows:
            writer.writerow([row.solver, row.batch_size, f"{row.predict_total:.6f}",
                             f"{row.search_total:.6f}", f"{row.total:.6f}"])

    meta = {
        "mean_convention": "arithmetic mean over tasks",
        "std_convention": "population standard deviation over tasks",
        "optimality_tolerance": 1e-6,
        "tie_breaking": "f, then larger g, then FIFO",
        "reexpansion": "reopen on strictly smaller g (1e-12)",
        "version": __version__,
    }
    (out_dir / "report_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")

    _plot_tradeoff(table, lam_grid, out_dir / "tradeoff.svg")
    _plot_runtime(rt_rows, out_dir / "runtime.svg")
    click.echo(f"report written to {out_dir}")


def _plot_tradeoff(table, lam_grid, path):
    import matplotlib

    matplotlib.use("svg")
    matplotlib.rcParams["svg.hashsalt"] = "cfpath"  # deterministic element ids
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for solver in sorted(table):
        ax.plot(lam_grid, table[solver], marker="o", label=solver)
    ax.set_xlabel("lambda")
    ax.set_ylabel("mean J")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def _plot_runtime(rows, path):
    import matplotlib

    matplotlib.use("svg")
    matplotlib.rcParams["svg.hashsalt"] = "cfpath"  # deterministic element ids
    import matplotlib.pyplot as plt

    solvers = sorted({r.solver for r in rows})
    batches = sorted({r.batch_size for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    width = 0.8 / max(1, len(solvers))
    for si, solver in enumerate(solvers):
        totals = [next(r.total for r in rows if r.solver == solver and r.batch_size == b)
                  for b in batches]
        xs = [bi + si * width for bi in range(len(batches))]
        ax.bar(xs, totals, width=width, label=solver)
    ax.set_xticks([bi + 0.4 - width / 2 for bi in range(len(batches))])
    ax.set_xticklabels([str(b) for b in batches])
    ax.set_xlabel("batch size")
    ax.set_ylabel("total runtime (s)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


if __name__ == "__main__":
    main()
