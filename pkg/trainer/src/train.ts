/**
 * Training loop: Adam with a one-cycle learning-rate schedule. The loss is
 * the masked L2 regression objective; an ablation flag trains without the
 * mask (every cell contributes) and is recorded in the checkpoint manifest.
 */

import * as fs from "node:fs";
import * as tf from "@tensorflow/tfjs";

import { Sample, shuffled, toBatch } from "./data.js";
import { maskedL2Loss } from "./loss.js";
import { CfModel, ModelConfig, REFERENCE_CONFIG, defaultConfig } from "./model.js";

export interface TrainConfig {
  epochs: number;
  batchSize: number;
  peakLearningRate: number;
  /** fraction of total steps spent warming up to the peak */
  warmupFraction: number;
  maskingEnabled: boolean;
  seed: number;
}

export function defaultTrainConfig(overrides: Partial<TrainConfig> = {}): TrainConfig {
  return {
    epochs: 20,
    batchSize: 32,
    peakLearningRate: 8e-3,
    warmupFraction: 0.3,
    maskingEnabled: true,
    seed: 0,
    ...overrides,
  };
}

/** One-cycle policy: linear warmup to the peak, cosine anneal down. */
export function oneCycleLr(step: number, totalSteps: number, peak: number, warmupFraction: number): number {
  const warmup = Math.max(1, Math.floor(totalSteps * warmupFraction));
  const floor = peak / 25;
  if (step < warmup) {
    return floor + (peak - floor) * (step / warmup);
  }
  const t = (step - warmup) / Math.max(1, totalSteps - warmup);
  return floor + (peak - floor) * 0.5 * (1 + Math.cos(Math.PI * t));
}

export interface TrainResult {
  model: CfModel;
  losses: number[];
}

export function train(
  samples: Sample[],
  modelConfig: ModelConfig,
  config: TrainConfig,
  onStep?: (step: number, loss: number, lr: number) => void,
): TrainResult {
  if (samples.length === 0) {
    throw new Error("empty training set");
  }
  const model = new CfModel(modelConfig);
  const optimizer = tf.train.adam(config.peakLearningRate);
  const stepsPerEpoch = Math.ceil(samples.length / config.batchSize);
  const totalSteps = stepsPerEpoch * config.epochs;
  const losses: number[] = [];
  let step = 0;
  for (let epoch = 0; epoch < config.epochs; epoch++) {
    const order = shuffled(samples, config.seed + 1000 * epoch + 1);
    for (let i = 0; i < order.length; i += config.batchSize) {
      const batch = toBatch(order.slice(i, i + config.batchSize));
      const lr = oneCycleLr(step, totalSteps, config.peakLearningRate, config.warmupFraction);
      (optimizer as unknown as { learningRate: number }).learningRate = lr;
      const lossFn = (): tf.Scalar => {
        const pred = model.forward(batch.input);
        return config.maskingEnabled
          ? maskedL2Loss(pred, batch.target, batch.mask)
          : (pred.sub(batch.target).square().mean() as tf.Scalar);
      };
      const { value, grads } = tf.variableGrads(lossFn, model.trainableVariables());
      optimizer.applyGradients(grads as unknown as Parameters<typeof optimizer.applyGradients>[0]);
      const loss = value.dataSync()[0];
      value.dispose();
      Object.values(grads).forEach((g) => g.dispose());
      batch.input.dispose();
      batch.target.dispose();
      batch.mask.dispose();
      losses.push(loss);
      onStep?.(step, loss, lr);
      step += 1;
    }
  }
  optimizer.dispose();
  return { model, losses };
}

export function writeCurve(losses: number[], file: string): void {
  const lines = ["step,loss"];
  losses.forEach((loss, i) => lines.push(`${i},${loss}`));
  fs.writeFileSync(file, lines.join("\n") + "\n");
}

export function buildManifest(modelConfig: ModelConfig, config: TrainConfig, extra: Record<string, unknown> = {}) {
  return {
    model: modelConfig,
    training: config,
    masking: config.maskingEnabled,
    longSkips: modelConfig.longSkips,
    referenceDefaults: REFERENCE_CONFIG,
    ...extra,
  };
}

export { defaultConfig };
