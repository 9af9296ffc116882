/**
 * Readers/writers for the engine's external file formats.
 *
 * - map text format: "type octile" / "height H" / "width W" / "map" + rows
 *   of '.' (free), '@' or 'T' (blocked), LF line endings;
 * - CFM1 binary correction-factor maps: magic "CFM1", u32le width, u32le
 *   height, width*height float32le values (row-major), width*height mask
 *   bytes (0/1);
 * - task CSV: map_path,start_x,start_y,goal_x,goal_y,optimal_cost.
 */

import * as fs from "node:fs";
import * as path from "node:path";

export interface GridMap {
  width: number;
  height: number;
  /** row-major, true = blocked */
  blocked: Uint8Array;
}

export interface CfMap {
  width: number;
  height: number;
  /** row-major correction factors in [0, 1] */
  values: Float32Array;
  /** row-major, 1 = cell participates in the loss */
  mask: Uint8Array;
}

export interface TaskRecord {
  mapPath: string;
  startX: number;
  startY: number;
  goalX: number;
  goalY: number;
  optimalCost: number;
}

export function parseMap(text: string): GridMap {
  const lines = text.split("\n");
  if (lines[0] !== "type octile") {
    throw new Error(`line 1: expected 'type octile', got '${lines[0]}'`);
  }
  const heightMatch = /^height (\d+)$/.exec(lines[1] ?? "");
  const widthMatch = /^width (\d+)$/.exec(lines[2] ?? "");
  if (!heightMatch || !widthMatch || lines[3] !== "map") {
    throw new Error("malformed map header");
  }
  const height = Number(heightMatch[1]);
  const width = Number(widthMatch[1]);
  const blocked = new Uint8Array(width * height);
  for (let y = 0; y < height; y++) {
    const row = lines[4 + y];
    if (row === undefined || row.length !== width) {
      throw new Error(`line ${5 + y}: expected a row of width ${width}`);
    }
    for (let x = 0; x < width; x++) {
      const c = row[x];
      if (c === "@" || c === "T") {
        blocked[y * width + x] = 1;
      } else if (c !== ".") {
        throw new Error(`line ${5 + y}: unexpected character '${c}'`);
      }
    }
  }
  return { width, height, blocked };
}

export function serializeMap(grid: GridMap): string {
  const rows: string[] = [];
  for (let y = 0; y < grid.height; y++) {
    let row = "";
    for (let x = 0; x < grid.width; x++) {
      row += grid.blocked[y * grid.width + x] ? "@" : ".";
    }
    rows.push(row);
  }
  return `type octile\nheight ${grid.height}\nwidth ${grid.width}\nmap\n${rows.join("\n")}\n`;
}

export function readMapFile(file: string): GridMap {
  return parseMap(fs.readFileSync(file, "utf8"));
}

const CF_MAGIC = "CFM1";

export function writeCf(cf: CfMap, file: string): void {
  const n = cf.width * cf.height;
  if (cf.values.length !== n || cf.mask.length !== n) {
    throw new Error("cf value/mask size does not match dimensions");
  }
  const buf = Buffer.alloc(4 + 8 + 4 * n + n);
  buf.write(CF_MAGIC, 0, "ascii");
  buf.writeUInt32LE(cf.width, 4);
  buf.writeUInt32LE(cf.height, 8);
  for (let i = 0; i < n; i++) {
    buf.writeFloatLE(cf.values[i], 12 + 4 * i);
  }
  buf.set(cf.mask, 12 + 4 * n);
  fs.writeFileSync(file, buf);
}

export function readCf(file: string): CfMap {
  const buf = fs.readFileSync(file);
  if (buf.length < 12 || buf.toString("ascii", 0, 4) !== CF_MAGIC) {
    throw new Error(`${file}: not a CFM1 file`);
  }
  const width = buf.readUInt32LE(4);
  const height = buf.readUInt32LE(8);
  const n = width * height;
  if (buf.length !== 12 + 5 * n) {
    throw new Error(`${file}: truncated CFM1 payload`);
  }
  const values = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    values[i] = buf.readFloatLE(12 + 4 * i);
  }
  const mask = new Uint8Array(buf.subarray(12 + 4 * n, 12 + 5 * n));
  for (let i = 0; i < n; i++) {
    if (values[i] < -1e-6 || values[i] > 1 + 1e-6) {
      throw new Error(`${file}: cf value ${values[i]} out of range`);
    }
    if (mask[i] > 1) {
      throw new Error(`${file}: bad mask byte ${mask[i]}`);
    }
  }
  return { width, height, values, mask };
}

const TASK_HEADER = "map_path,start_x,start_y,goal_x,goal_y,optimal_cost";

export function readTasks(file: string): TaskRecord[] {
  const lines = fs.readFileSync(file, "utf8").split("\n").filter((l) => l.length > 0);
  if (lines[0] !== TASK_HEADER) {
    throw new Error(`${file}: unexpected task header '${lines[0]}'`);
  }
  return lines.slice(1).map((line) => {
    const [mapPath, sx, sy, gx, gy, cost] = line.split(",");
    return {
      mapPath,
      startX: Number(sx),
      startY: Number(sy),
      goalX: Number(gx),
      goalY: Number(gy),
      optimalCost: Number(cost),
    };
  });
}

/** Task map paths are relative to the directory holding the task file. */
export function resolveMapPath(task: TaskRecord, tasksFile: string): string {
  return path.isAbsolute(task.mapPath)
    ? task.mapPath
    : path.join(path.dirname(tasksFile), task.mapPath);
}
