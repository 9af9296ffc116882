import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { parseMap, readCf, readTasks, serializeMap, writeCf } from "../src/formats.js";

let tmpDir: string;

beforeAll(() => {
  tmpDir = fs.mkdtempSync(path.join(os.tmpdir(), "trainer-fmt-"));
});

afterAll(() => {
  fs.rmSync(tmpDir, { recursive: true, force: true });
});

describe("map format", () => {
  const text = "type octile\nheight 3\nwidth 4\nmap\n....\n.@T.\n....\n";

  it("parses dimensions and blocked cells", () => {
    const g = parseMap(text);
    expect([g.width, g.height]).toEqual([4, 3]);
    expect(g.blocked[1 * 4 + 1]).toBe(1); // '@'
    expect(g.blocked[1 * 4 + 2]).toBe(1); // 'T'
    expect(g.blocked[0]).toBe(0);
  });

  it("round-trips through serialize (T canonicalized to @)", () => {
    const g = parseMap(text);
    const again = parseMap(serializeMap(g));
    expect(again.blocked).toEqual(g.blocked);
  });

  it("rejects a bad header", () => {
    expect(() => parseMap("type hex\n")).toThrow(/type octile/);
  });

  it("matches a map produced by the engine", () => {
    const dir = path.join(tmpDir, "engine-maps");
    execFileSync("cfpath", [
      "gen-train", "--kind", "beta", "--count", "1", "--size", "16",
      "--seed", "3", "--out-dir", dir,
    ]);
    const g = parseMap(fs.readFileSync(path.join(dir, "map_000000.map"), "utf8"));
    expect([g.width, g.height]).toEqual([16, 16]);
  });
});

describe("CFM1 format", () => {
  it("round-trips", () => {
    const n = 4 * 3;
    const values = new Float32Array(n).map((_, i) => (i + 1) / n);
    const mask = new Uint8Array(n).map((_, i) => (i % 2) as 0 | 1);
    const file = path.join(tmpDir, "roundtrip.cfm");
    writeCf({ width: 4, height: 3, values, mask }, file);
    const back = readCf(file);
    expect(back.width).toBe(4);
    expect(back.height).toBe(3);
    expect(Array.from(back.values)).toEqual(Array.from(values));
    expect(Array.from(back.mask)).toEqual(Array.from(mask));
  });

  it("rejects out-of-range values", () => {
    const file = path.join(tmpDir, "range.cfm");
    writeCf(
      { width: 1, height: 1, values: new Float32Array([2]), mask: new Uint8Array([1]) },
      file,
    );
    expect(() => readCf(file)).toThrow(/out of range/);
  });

  it("rejects truncated payloads", () => {
    const file = path.join(tmpDir, "trunc.cfm");
    writeCf(
      { width: 2, height: 2, values: new Float32Array(4).fill(1), mask: new Uint8Array(4).fill(1) },
      file,
    );
    const buf = fs.readFileSync(file);
    fs.writeFileSync(file, buf.subarray(0, buf.length - 1));
    expect(() => readCf(file)).toThrow(/truncated/);
  });

  it("files written here pass the engine's read_cf validation", () => {
    const n = 8 * 8;
    const values = new Float32Array(n).fill(0.5);
    const mask = new Uint8Array(n).fill(1);
    const file = path.join(tmpDir, "interop.cfm");
    writeCf({ width: 8, height: 8, values, mask }, file);
    const probe =
      "from cfpath.cf import read_cf; import sys; " +
      "f = read_cf(sys.argv[1]); print(f.cf.shape, float(f.cf[0,0]))";
    const out = execFileSync("python3", ["-c", probe, file]).toString();
    expect(out.trim()).toBe("(8, 8) 0.5");
  });

  it("reads engine-written supervision files", () => {
    const dir = path.join(tmpDir, "pipeline");
    fs.mkdirSync(dir, { recursive: true });
    execFileSync("cfpath", [
      "gen-train", "--kind", "beta", "--count", "6", "--size", "32",
      "--seed", "8", "--out-dir", path.join(dir, "maps"),
    ]);
    execFileSync("cfpath", [
      "gen-tasks", "--maps-dir", path.join(dir, "maps"), "--seed", "9",
      "--out", path.join(dir, "tasks.csv"),
    ]);
    execFileSync("cfpath", [
      "compute-cf", "--tasks", path.join(dir, "tasks.csv"),
      "--out-dir", path.join(dir, "cf"),
    ]);
    const tasks = readTasks(path.join(dir, "tasks.csv"));
    expect(tasks.length).toBeGreaterThan(0);
    const cf = readCf(path.join(dir, "cf", "task_000000.cfm"));
    expect([cf.width, cf.height]).toEqual([32, 32]);
    // goal cell is masked out; its stored dummy value is 1
    const goal = tasks[0].goalY * 32 + tasks[0].goalX;
    expect(cf.mask[goal]).toBe(0);
    for (const v of cf.values) {
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThanOrEqual(1 + 1e-6);
    }
  });
});
