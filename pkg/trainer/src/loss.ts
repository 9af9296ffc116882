/**
 * Masked L2 regression loss: mean squared error over masked-in cells only,
 * L = sum(M * (pred - target)^2) / sum(M).
 */

import * as tf from "@tensorflow/tfjs";

export function maskedL2Loss(pred: tf.Tensor, target: tf.Tensor, mask: tf.Tensor): tf.Scalar {
  return tf.tidy(() => {
    const m = mask.toFloat();
    const total = m.sum();
    if (total.arraySync() === 0) {
      throw new Error("all cells masked out: degenerate supervision");
    }
    const sq = pred.sub(target).square().mul(m);
    return sq.sum().div(total);
  });
}

/** Plain-JS float64 reference of the same loss, for numeric cross-checks. */
export function maskedL2LossRef(pred: number[], target: number[], mask: number[]): number {
  let total = 0;
  let sum = 0;
  for (let i = 0; i < pred.length; i++) {
    if (mask[i]) {
      total += 1;
      const d = pred[i] - target[i];
      sum += d * d;
    }
  }
  if (total === 0) {
    throw new Error("all cells masked out: degenerate supervision");
  }
  return sum / total;
}
