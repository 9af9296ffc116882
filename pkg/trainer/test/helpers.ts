import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { expect } from "vitest";

/** Run an engine subcommand (the cfpath CLI must be on PATH). */
export function engine(...args: string[]): string {
  return execFileSync("cfpath", args, { encoding: "utf8" });
}

export interface AggregateRow {
  solver: string;
  tasks: number;
  optimalFoundPct: number;
  costRatioMeanPct: number;
  expRatioMeanPct: number;
}

export function readAggregate(reportDir: string): Map<string, AggregateRow> {
  const lines = fs
    .readFileSync(path.join(reportDir, "aggregate.csv"), "utf8")
    .trim()
    .split("\n");
  const rows = new Map<string, AggregateRow>();
  for (const line of lines.slice(1)) {
    const c = line.split(",");
    rows.set(c[0], {
      solver: c[0],
      tasks: Number(c[1]),
      optimalFoundPct: Number(c[2]),
      costRatioMeanPct: Number(c[3]),
      expRatioMeanPct: Number(c[5]),
    });
  }
  return rows;
}

/**
 * Beta-map benchmark: maps, filtered tasks (capped at maxTasks), and exact
 * CF supervision, all produced by the engine.
 */
export function makeBetaBenchmark(
  dir: string,
  mapCount: number,
  seed: number,
  size: number,
  maxTasks: number,
  withCf = true,
): { tasksFile: string; cfDir: string; taskCount: number } {
  fs.mkdirSync(dir, { recursive: true });
  const mapsDir = path.join(dir, "maps");
  const tasksFile = path.join(dir, "tasks.csv");
  const cfDir = path.join(dir, "cf");
  engine("gen-train", "--kind", "beta", "--count", String(mapCount), "--size", String(size),
    "--seed", String(seed), "--out-dir", mapsDir);
  engine("gen-tasks", "--maps-dir", mapsDir, "--seed", String(seed + 1), "--out", tasksFile);
  const lines = fs.readFileSync(tasksFile, "utf8").trim().split("\n");
  if (lines.length - 1 > maxTasks) {
    fs.writeFileSync(tasksFile, lines.slice(0, maxTasks + 1).join("\n") + "\n");
  }
  if (withCf) {
    engine("compute-cf", "--tasks", tasksFile, "--out-dir", cfDir);
  }
  return { tasksFile, cfDir, taskCount: Math.min(lines.length - 1, maxTasks) };
}

/** log file for acceptance output; survives vitest's console capture */
export const ACCEPTANCE_LOG = path.join(os.tmpdir(), "trainer-acceptance.log");

export function log(line: string): void {
  process.stdout.write(line + "\n");
  fs.appendFileSync(ACCEPTANCE_LOG, line + "\n");
}

export function report(name: string, ok: boolean): void {
  log(`ACCEPTANCE ${name}: ${ok ? "PASS" : "FAIL"}`);
  expect(ok, name).toBe(true);
}
