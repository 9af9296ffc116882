/**
 * Batch prediction: emits one CFM1 file per task plus a timing CSV
 * (task id, batch id, seconds) for the engine's runtime breakdown. Batch
 * size is a throughput knob only; values are batch-invariant.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import * as tf from "@tensorflow/tfjs";

import { Sample, toBatch } from "./data.js";
import { writeCf } from "./formats.js";
import { CfModel } from "./model.js";

export interface PredictOptions {
  batchSize: number;
  allowCrossSize?: boolean;
}

export function predictValues(model: CfModel, samples: Sample[], batchSize: number): Float32Array[] {
  const out: Float32Array[] = [];
  for (let i = 0; i < samples.length; i += batchSize) {
    const slice = samples.slice(i, i + batchSize);
    const batch = toBatch(slice);
    const pred = model.forward(batch.input);
    const data = pred.dataSync() as Float32Array;
    const per = slice[0].width * slice[0].height;
    for (let j = 0; j < slice.length; j++) {
      out.push(data.slice(j * per, (j + 1) * per));
    }
    pred.dispose();
    batch.input.dispose();
    batch.target.dispose();
    batch.mask.dispose();
  }
  return out;
}

export function predictToFiles(
  model: CfModel,
  samples: Sample[],
  outDir: string,
  options: PredictOptions,
): void {
  for (const s of samples) {
    if (s.width !== model.config.size || s.height !== model.config.size) {
      if (!options.allowCrossSize) {
        throw new Error(
          `sample is ${s.width}x${s.height} but the model was trained at ` +
            `${model.config.size}; pass --allow-cross-size to override`,
        );
      }
      if (s.width % 8 !== 0 || s.height % 8 !== 0) {
        throw new Error("cross-size prediction requires dimensions divisible by 8");
      }
    }
  }
  fs.mkdirSync(outDir, { recursive: true });
  const timing: string[] = ["task_id,batch_id,seconds"];
  let taskId = 0;
  let batchId = 0;
  for (let i = 0; i < samples.length; i += options.batchSize) {
    const slice = samples.slice(i, i + options.batchSize);
    const t0 = process.hrtime.bigint();
    const values = predictValues(model, slice, slice.length);
    const seconds = Number(process.hrtime.bigint() - t0) / 1e9;
    for (let j = 0; j < slice.length; j++) {
      const s = slice[j];
      const mask = new Uint8Array(s.mask.length);
      for (let c = 0; c < mask.length; c++) mask[c] = s.mask[c] ? 1 : 0;
      writeCf(
        { width: s.width, height: s.height, values: values[j], mask },
        path.join(outDir, `task_${String(taskId).padStart(6, "0")}.cfm`),
      );
      timing.push(`${taskId},${batchId},${seconds / slice.length}`);
      taskId += 1;
    }
    batchId += 1;
  }
  fs.writeFileSync(path.join(outDir, "timing.csv"), timing.join("\n") + "\n");
}
