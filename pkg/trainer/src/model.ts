/**
 * Dense correction-factor predictor.
 *
 * Convolutional encoder (stem + 3 mean-pool/conv stages) -> learned
 * positional embeddings over the bottleneck tokens -> self-attention blocks
 * -> mirrored decoder (2x nearest upsample + conv) with long additive skip
 * connections from the matching-resolution encoder stages -> rescaled tanh
 * head clamped to [1e-6, 1]. No batch-coupled operations (no batch norm), so
 * outputs are independent of batch composition.
 *
 * Performance note: on the pure-JS CPU backend, only matMul, reshape,
 * leading-axis slice/concat, reductions and same-shape elementwise kernels
 * are fast; generic strided kernels (inner-axis slice/pad, gather/scatter,
 * conv2d gradients) are orders of magnitude slower. Feature maps are
 * therefore kept in a flattened row-major layout [rows*paddedCols, batch,
 * channels] with trailing zero guard columns on each row, where a 3x3
 * convolution is nine leading-axis shifts plus channel matMuls and pooling /
 * upsampling are pure reshape + pair-sum / duplicate-concat. Each spatial op
 * carries a custom gradient built from the same cheap kernels.
 */

import * as tf from "@tensorflow/tfjs";
import * as fs from "node:fs";

export interface ModelConfig {
  size: number;
  stemChannels: number;
  encoderWidths: [number, number, number];
  attentionBlocks: number;
  heads: number;
  ffDim: number;
  longSkips: boolean;
  seed: number;
}

/** Full-scale reference hyperparameters, recorded in every manifest. */
export const REFERENCE_CONFIG = {
  encoderWidths: [64, 128, 256],
  tokenDim: 256,
  heads: 4,
  ffDim: 512,
  attentionBlocks: 3,
  epochs: 50,
  batchSize: 512,
  peakLearningRate: 8e-3,
};

export function defaultConfig(size: number, seed = 0): ModelConfig {
  return {
    size,
    stemChannels: 8,
    encoderWidths: [16, 32, 48],
    attentionBlocks: 3,
    heads: 4,
    ffDim: 96,
    longSkips: true,
    seed,
  };
}

export const OUTPUT_FLOOR = 1e-6;

/** trailing guard columns at full resolution; halves at each pooling stage */
const GUARD_COLS = 8;

/** per-stage geometry: rows, data columns, total (padded) columns */
interface Geom {
  h: number;
  w: number;
  wp: number;
}

function pooled(g: Geom): Geom {
  return { h: g.h / 2, w: g.w / 2, wp: g.wp / 2 };
}

let instanceCounter = 0;

export class CfModel {
  readonly config: ModelConfig;
  readonly variables = new Map<string, tf.Variable>();
  /** registry prefix: tfjs variable names are global, so they are namespaced per instance */
  readonly prefix: string;
  private seedCounter: number;
  /** guard-column masks, materialized per (positions, batch, channels) */
  private readonly maskCache = new Map<string, tf.Tensor3D>();

  constructor(config: ModelConfig) {
    if (config.size % 8 !== 0) {
      throw new Error("input size must be divisible by 8 (three 2x pooling stages)");
    }
    this.config = config;
    instanceCounter += 1;
    this.prefix = `m${instanceCounter}/`;
    this.seedCounter = config.seed;
    this.build();
  }

  private nextSeed(): number {
    this.seedCounter += 1;
    return this.seedCounter;
  }

  private addConv(name: string, k: number, inCh: number, outCh: number): void {
    const std = Math.sqrt(2 / (k * k * inCh));
    this.variables.set(
      `${name}/kernel`,
      tf.variable(
        tf.randomNormal([k * k, inCh, outCh], 0, std, "float32", this.nextSeed()),
        true,
        this.prefix + `${name}/kernel`,
      ),
    );
    this.variables.set(`${name}/bias`, tf.variable(tf.zeros([outCh]), true, this.prefix + `${name}/bias`));
  }

  private addDense(name: string, inDim: number, outDim: number): void {
    const std = Math.sqrt(2 / inDim);
    this.variables.set(
      `${name}/kernel`,
      tf.variable(tf.randomNormal([inDim, outDim], 0, std, "float32", this.nextSeed()), true, this.prefix + `${name}/kernel`),
    );
    this.variables.set(`${name}/bias`, tf.variable(tf.zeros([outDim]), true, this.prefix + `${name}/bias`));
  }

  private addLayerNorm(name: string, dim: number): void {
    this.variables.set(`${name}/gain`, tf.variable(tf.ones([dim]), true, this.prefix + `${name}/gain`));
    this.variables.set(`${name}/bias`, tf.variable(tf.zeros([dim]), true, this.prefix + `${name}/bias`));
  }

  private tokenCount(): number {
    const n = this.config.size / 8;
    return n * (n + GUARD_COLS / 8);
  }

  private build(): void {
    const { stemChannels: s, encoderWidths: [w1, w2, w3] } = this.config;
    this.addConv("stem", 3, 2, s);
    this.addConv("enc1", 3, s, w1);
    this.addConv("enc2", 3, w1, w2);
    this.addConv("enc3", 3, w2, w3);
    this.variables.set(
      "pos_embedding",
      tf.variable(
        tf.randomNormal([this.tokenCount(), w3], 0, 0.02, "float32", this.nextSeed()),
        true,
        this.prefix + "pos_embedding",
      ),
    );
    for (let b = 0; b < this.config.attentionBlocks; b++) {
      this.addLayerNorm(`block${b}/ln1`, w3);
      this.addDense(`block${b}/q`, w3, w3);
      this.addDense(`block${b}/k`, w3, w3);
      this.addDense(`block${b}/v`, w3, w3);
      this.addDense(`block${b}/proj`, w3, w3);
      this.addLayerNorm(`block${b}/ln2`, w3);
      this.addDense(`block${b}/ff1`, w3, this.config.ffDim);
      this.addDense(`block${b}/ff2`, this.config.ffDim, w3);
    }
    this.addConv("dec2", 3, w3, w2);
    this.addConv("dec1", 3, w2, w1);
    this.addConv("dec0", 3, w1, s);
    this.addConv("head", 1, s, 1);
  }

  private v(name: string): tf.Tensor {
    const variable = this.variables.get(name);
    if (!variable) throw new Error(`unknown variable ${name}`);
    return variable;
  }

  /** 1 on data cells, 0 on guard columns, materialized to avoid broadcasting */
  private guardMask(geom: Geom, batch: number, channels: number): tf.Tensor3D {
    const n = geom.h * geom.wp;
    const key = `${n}:${geom.wp}:${geom.w}:${batch}:${channels}`;
    let mask = this.maskCache.get(key);
    if (!mask) {
      const data = new Float32Array(n * batch * channels);
      for (let y = 0; y < geom.h; y++) {
        const row = y * geom.wp;
        data.fill(1, row * batch * channels, (row + geom.w) * batch * channels);
      }
      mask = tf.keep(tf.tensor3d(data, [n, batch, channels]));
      this.maskCache.set(key, mask);
    }
    return mask;
  }

  /**
   * 3x3 same-padding convolution on a flat [n, batch, in] feature map.
   * Guard columns are zeroed first, the map is zero-extended along the
   * leading axis, and each kernel tap becomes a leading-axis shift plus a
   * channel matMul. The custom gradient mirrors the same construction.
   */
  private conv3x3(x: tf.Tensor3D, name: string, geom: Geom): tf.Tensor3D {
    const kernel = this.v(`${name}/kernel`);
    const inCh = kernel.shape[1] as number;
    const outCh = kernel.shape[2] as number;
    const n = geom.h * geom.wp;
    const batch = x.shape[1];
    const mask = this.guardMask(geom, batch, inCh);
    const ext = geom.wp + 1; // largest tap shift
    const deltas: number[] = [];
    for (let ky = -1; ky <= 1; ky++) {
      for (let kx = -1; kx <= 1; kx++) deltas.push(ky * geom.wp + kx);
    }
    const tap = (k: tf.Tensor, t: number) => k.slice([t, 0, 0], [1, inCh, outCh]).reshape([inCh, outCh]) as tf.Tensor2D;

    const op = tf.customGrad((...args: unknown[]) => {
      const [xi, ki, save] = args as [tf.Tensor3D, tf.Tensor3D, tf.GradSaveFunc];
      const masked = xi.mul(mask) as tf.Tensor3D;
      const extended = tf.concat([tf.zeros([ext, batch, inCh]), masked, tf.zeros([ext, batch, inCh])], 0);
      let y: tf.Tensor2D | null = null;
      for (let t = 0; t < 9; t++) {
        const patch = extended.slice([ext + deltas[t], 0, 0], [n, batch, inCh]).reshape([n * batch, inCh]) as tf.Tensor2D;
        const term = patch.matMul(tap(ki, t)) as tf.Tensor2D;
        y = y === null ? term : (y.add(term) as tf.Tensor2D);
      }
      save([extended, ki]);
      const value = y!.reshape([n, batch, outCh]) as tf.Tensor3D;
      const gradFunc = (dy: tf.Tensor3D, saved: tf.Tensor[]) => {
        const [savedExt, savedK] = saved;
        const dyFlat = dy.reshape([n * batch, outCh]) as tf.Tensor2D;
        const dyExt = tf.concat([tf.zeros([ext, batch, outCh]), dy, tf.zeros([ext, batch, outCh])], 0);
        let dx: tf.Tensor2D | null = null;
        const dTaps: tf.Tensor2D[] = [];
        for (let t = 0; t < 9; t++) {
          const dyPatch = dyExt.slice([ext - deltas[t], 0, 0], [n, batch, outCh]).reshape([n * batch, outCh]) as tf.Tensor2D;
          const term = dyPatch.matMul(tap(savedK, t), false, true) as tf.Tensor2D;
          dx = dx === null ? term : (dx.add(term) as tf.Tensor2D);
          const patch = savedExt.slice([ext + deltas[t], 0, 0], [n, batch, inCh]).reshape([n * batch, inCh]) as tf.Tensor2D;
          dTaps.push(patch.matMul(dyFlat, true, false) as tf.Tensor2D);
        }
        const dxMasked = dx!.reshape([n, batch, inCh]).mul(mask);
        return [dxMasked, tf.stack(dTaps, 0)];
      };
      return { value, gradFunc };
    });
    const out = op(x, kernel) as tf.Tensor3D;
    return out.add(this.v(`${name}/bias`)) as tf.Tensor3D;
  }

  /** pointwise (1x1) convolution: a channel matMul, no spatial mixing */
  private conv1x1(x: tf.Tensor3D, name: string): tf.Tensor3D {
    const kernel = this.v(`${name}/kernel`);
    const inCh = kernel.shape[1] as number;
    const outCh = kernel.shape[2] as number;
    const [n, batch] = [x.shape[0], x.shape[1]];
    return x
      .reshape([n * batch, inCh])
      .matMul(kernel.reshape([inCh, outCh]))
      .add(this.v(`${name}/bias`))
      .reshape([n, batch, outCh]) as tf.Tensor3D;
  }

  /** 2x2 mean pool via reshape + pair-sum; custom gradient duplicates back. */
  private pool(x: tf.Tensor3D, geom: Geom): tf.Tensor3D {
    const { h, wp } = geom;
    const [, batch, ch] = x.shape;
    const wp2 = wp / 2;
    const op = tf.customGrad((...args: unknown[]) => {
      const [xi, save] = args as [tf.Tensor3D, tf.GradSaveFunc];
      save([]);
      const cols = xi.reshape([(h * wp) / 2, 2, batch, ch]).sum(1);
      const rows = cols.reshape([h / 2, 2, wp2, batch, ch]).sum(1);
      const value = rows.reshape([(h / 2) * wp2, batch, ch]).mul(0.25) as tf.Tensor3D;
      const gradFunc = (dy: tf.Tensor3D) => {
        const scaled = dy.mul(0.25).reshape([h / 2, 1, wp2, batch, ch]);
        const vdup = tf.concat([scaled, scaled], 1).reshape([(h * wp) / 2, 1, batch, ch]);
        return [tf.concat([vdup, vdup], 1).reshape([h * wp, batch, ch])];
      };
      return { value, gradFunc };
    });
    return op(x) as tf.Tensor3D;
  }

  /** 2x nearest-neighbor upsample via duplicate-concat; gradient pair-sums. */
  private upsample(x: tf.Tensor3D, geom: Geom): tf.Tensor3D {
    const { h, wp } = geom; // geometry of the input stage
    const [, batch, ch] = x.shape;
    const op = tf.customGrad((...args: unknown[]) => {
      const [xi, save] = args as [tf.Tensor3D, tf.GradSaveFunc];
      save([]);
      const col = xi.reshape([h * wp, 1, batch, ch]);
      const cols = tf.concat([col, col], 1).reshape([h, 1, 2 * wp, batch, ch]);
      const value = tf.concat([cols, cols], 1).reshape([h * wp * 4, batch, ch]) as tf.Tensor3D;
      const gradFunc = (dy: tf.Tensor3D) => {
        const rows = dy.reshape([h, 2, 2 * wp, batch, ch]).sum(1);
        return [rows.reshape([h * wp, 2, batch, ch]).sum(1).reshape([h * wp, batch, ch])];
      };
      return { value, gradFunc };
    });
    return op(x) as tf.Tensor3D;
  }

  private layerNorm(x: tf.Tensor, name: string): tf.Tensor {
    const mean = x.mean(-1, true);
    const centered = x.sub(mean);
    const variance = centered.square().mean(-1, true);
    return centered
      .div(variance.add(1e-5).sqrt())
      .mul(this.v(`${name}/gain`))
      .add(this.v(`${name}/bias`));
  }

  /** dense layer over the last axis of a [b, t, d] tensor (2-D weight) */
  private dense3d(x: tf.Tensor3D, name: string): tf.Tensor3D {
    const [b, t, d] = x.shape;
    const kernel = this.v(`${name}/kernel`) as tf.Tensor2D;
    const out = x
      .reshape([b * t, d])
      .matMul(kernel)
      .add(this.v(`${name}/bias`));
    return out.reshape([b, t, kernel.shape[1]]) as tf.Tensor3D;
  }

  private attention(x: tf.Tensor3D, name: string): tf.Tensor3D {
    const { heads } = this.config;
    const [b, t, d] = x.shape;
    const dh = d / heads;
    const split = (y: tf.Tensor) =>
      y.reshape([b, t, heads, dh]).transpose([0, 2, 1, 3]); // [b, heads, t, dh]
    const q = split(this.dense3d(x, `${name}/q`));
    const k = split(this.dense3d(x, `${name}/k`));
    const vv = split(this.dense3d(x, `${name}/v`));
    const scores = tf.matMul(q, k, false, true).div(Math.sqrt(dh));
    const att = tf.softmax(scores, -1);
    const out = tf.matMul(att, vv).transpose([0, 2, 1, 3]).reshape([b, t, d]) as tf.Tensor3D;
    return this.dense3d(out, `${name}/proj`);
  }

  /** input: [batch, H, W, 2] (obstacle, goal channels); output: [batch, H, W]. */
  forward(input: tf.Tensor4D): tf.Tensor3D {
    return tf.tidy(() => {
      const { longSkips, size } = this.config;
      const batch = input.shape[0];
      const g0: Geom = { h: size, w: size, wp: size + GUARD_COLS };
      const g1 = pooled(g0);
      const g2 = pooled(g1);
      const g3 = pooled(g2);

      // pack into the flat [rows*paddedCols, batch, channels] layout
      const flat = input
        .transpose([1, 2, 0, 3])
        .pad([[0, 0], [0, GUARD_COLS], [0, 0], [0, 0]])
        .reshape([g0.h * g0.wp, batch, 2]) as tf.Tensor3D;

      const stem = this.conv3x3(flat, "stem", g0).relu() as tf.Tensor3D;
      const e1 = this.conv3x3(this.pool(stem, g0), "enc1", g1).relu() as tf.Tensor3D;
      const e2 = this.conv3x3(this.pool(e1, g1), "enc2", g2).relu() as tf.Tensor3D;
      const e3 = this.conv3x3(this.pool(e2, g2), "enc3", g3).relu() as tf.Tensor3D;

      const d = e3.shape[2];
      const cleaned = e3.mul(this.guardMask(g3, batch, d)) as tf.Tensor3D;
      let tokens = cleaned.transpose([1, 0, 2]).add(this.v("pos_embedding")) as tf.Tensor3D;
      for (let blk = 0; blk < this.config.attentionBlocks; blk++) {
        const ln1 = this.layerNorm(tokens, `block${blk}/ln1`) as tf.Tensor3D;
        tokens = tokens.add(this.attention(ln1, `block${blk}`)) as tf.Tensor3D;
        const ln2 = this.layerNorm(tokens, `block${blk}/ln2`) as tf.Tensor3D;
        const hidden = this.dense3d(ln2, `block${blk}/ff1`).relu() as tf.Tensor3D;
        const ff = this.dense3d(hidden, `block${blk}/ff2`);
        tokens = tokens.add(ff) as tf.Tensor3D;
      }
      const y = tokens.transpose([1, 0, 2]) as tf.Tensor3D;

      let d2 = this.conv3x3(this.upsample(y, g3), "dec2", g2);
      if (longSkips) d2 = d2.add(e2) as tf.Tensor3D;
      d2 = d2.relu();
      let d1 = this.conv3x3(this.upsample(d2, g2), "dec1", g1);
      if (longSkips) d1 = d1.add(e1) as tf.Tensor3D;
      d1 = d1.relu();
      let d0 = this.conv3x3(this.upsample(d1, g1), "dec0", g0);
      if (longSkips) d0 = d0.add(stem) as tf.Tensor3D;
      d0 = d0.relu();

      // unpack: drop guard columns, restore [batch, H, W]
      const logits = this.conv1x1(d0, "head")
        .reshape([g0.h, g0.wp, batch])
        .slice([0, 0, 0], [g0.h, g0.w, batch])
        .transpose([2, 0, 1]) as tf.Tensor3D;
      // rescaled tanh into (0,1], clamped away from zero
      return tf.clipByValue(logits.tanh().add(1).div(2), OUTPUT_FLOOR, 1) as tf.Tensor3D;
    });
  }

  trainableVariables(): tf.Variable[] {
    return [...this.variables.values()];
  }

  /** the tfjs-registry name of a logical variable */
  tfName(name: string): string {
    return this.prefix + name;
  }

  dispose(): void {
    for (const variable of this.variables.values()) {
      variable.dispose();
    }
    this.variables.clear();
    for (const mask of this.maskCache.values()) {
      mask.dispose();
    }
    this.maskCache.clear();
  }

  save(file: string, manifest: Record<string, unknown>): void {
    const weights: Record<string, { shape: number[]; data: string }> = {};
    for (const [name, variable] of this.variables) {
      const data = variable.dataSync() as Float32Array;
      weights[name] = {
        shape: variable.shape.slice(),
        data: Buffer.from(data.buffer, data.byteOffset, data.byteLength).toString("base64"),
      };
    }
    const payload = {
      config: this.config,
      manifest,
      weights,
    };
    fs.writeFileSync(file, JSON.stringify(payload));
  }

  static load(file: string): { model: CfModel; manifest: Record<string, unknown> } {
    const payload = JSON.parse(fs.readFileSync(file, "utf8"));
    const model = new CfModel(payload.config as ModelConfig);
    for (const [name, entry] of Object.entries(payload.weights) as [
      string,
      { shape: number[]; data: string },
    ][]) {
      const variable = model.variables.get(name);
      if (!variable) throw new Error(`checkpoint has unknown variable ${name}`);
      const raw = Buffer.from(entry.data, "base64");
      const data = new Float32Array(raw.buffer, raw.byteOffset, raw.byteLength / 4);
      variable.assign(tf.tensor(data, entry.shape as number[]));
    }
    return { model, manifest: payload.manifest ?? {} };
  }
}
