/**
 * Dataset assembly from engine artifacts: a task CSV names (map, goal) pairs
 * and a CF directory holds one CFM1 supervision file per task
 * (task_%06d.cfm, aligned with task index).
 */

import * as path from "node:path";
import * as tf from "@tensorflow/tfjs";

import { CfMap, GridMap, readCf, readMapFile, readTasks, resolveMapPath } from "./formats.js";

export interface Sample {
  /** [H, W, 2]: obstacle indicator, goal indicator */
  input: Float32Array;
  target: Float32Array;
  mask: Float32Array;
  width: number;
  height: number;
}

export function buildSample(grid: GridMap, goalX: number, goalY: number, cf: CfMap): Sample {
  if (grid.width !== cf.width || grid.height !== cf.height) {
    throw new Error("map and cf dimensions differ");
  }
  const n = grid.width * grid.height;
  const input = new Float32Array(n * 2);
  const target = new Float32Array(n);
  const mask = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    input[i * 2] = grid.blocked[i];
    target[i] = cf.values[i];
    mask[i] = cf.mask[i];
  }
  input[(goalY * grid.width + goalX) * 2 + 1] = 1;
  return { input, target, mask, width: grid.width, height: grid.height };
}

/** Predict-time sample: no supervision; mask = free and not the goal. */
export function buildPredictSample(grid: GridMap, goalX: number, goalY: number): Sample {
  const n = grid.width * grid.height;
  const input = new Float32Array(n * 2);
  const target = new Float32Array(n);
  const mask = new Float32Array(n);
  const goal = goalY * grid.width + goalX;
  for (let i = 0; i < n; i++) {
    input[i * 2] = grid.blocked[i];
    mask[i] = grid.blocked[i] || i === goal ? 0 : 1;
  }
  input[goal * 2 + 1] = 1;
  return { input, target, mask, width: grid.width, height: grid.height };
}

export function loadPredictSamples(tasksFile: string): Sample[] {
  const tasks = readTasks(tasksFile);
  const gridCache = new Map<string, GridMap>();
  return tasks.map((task) => {
    const mapFile = resolveMapPath(task, tasksFile);
    let grid = gridCache.get(mapFile);
    if (!grid) {
      grid = readMapFile(mapFile);
      gridCache.set(mapFile, grid);
    }
    return buildPredictSample(grid, task.goalX, task.goalY);
  });
}

export function loadDataset(tasksFile: string, cfDir: string): Sample[] {
  const tasks = readTasks(tasksFile);
  const gridCache = new Map<string, GridMap>();
  return tasks.map((task, i) => {
    const mapFile = resolveMapPath(task, tasksFile);
    let grid = gridCache.get(mapFile);
    if (!grid) {
      grid = readMapFile(mapFile);
      gridCache.set(mapFile, grid);
    }
    const cf = readCf(path.join(cfDir, `task_${String(i).padStart(6, "0")}.cfm`));
    return buildSample(grid, task.goalX, task.goalY, cf);
  });
}

export interface Batch {
  input: tf.Tensor4D;
  target: tf.Tensor3D;
  mask: tf.Tensor3D;
}

export function toBatch(samples: Sample[]): Batch {
  const { width, height } = samples[0];
  const b = samples.length;
  const input = new Float32Array(b * height * width * 2);
  const target = new Float32Array(b * height * width);
  const mask = new Float32Array(b * height * width);
  samples.forEach((s, i) => {
    if (s.width !== width || s.height !== height) {
      throw new Error("mixed sample dimensions in one batch");
    }
    input.set(s.input, i * height * width * 2);
    target.set(s.target, i * height * width);
    mask.set(s.mask, i * height * width);
  });
  return {
    input: tf.tensor4d(input, [b, height, width, 2]),
    target: tf.tensor3d(target, [b, height, width]),
    mask: tf.tensor3d(mask, [b, height, width]),
  };
}

/** Deterministic Fisher-Yates shuffle driven by a 32-bit LCG. */
export function shuffled<T>(items: T[], seed: number): T[] {
  const out = items.slice();
  let state = (seed >>> 0) || 1;
  const next = () => {
    state = (Math.imul(state, 1664525) + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
  for (let i = out.length - 1; i > 0; i--) {
    const j = Math.floor(next() * (i + 1));
    [out[i], out[j]] = [out[j], out[i]];
  }
  return out;
}
