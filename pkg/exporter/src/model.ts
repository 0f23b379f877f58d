import * as tf from '@tensorflow/tfjs';
import * as fs from 'fs';

/**
 * Architecture hyperparameters. The published sizes (conv 16/32/64/128 with
 * 3x3 kernels and 2x2 pooling, then dense 256 -> 2 with dropout between)
 * are fixed; input geometry and dropout rate are configurable.
 */
export interface ModelSpec {
  imageSize: number;
  channels: 1 | 3;
  dropout: number;
  seed: number;
}

const CONV_FILTERS = [16, 32, 64, 128];

/**
 * Four conv/ReLU/max-pool stages followed by two fully connected layers.
 * The final dense layer has no activation: it emits raw logits.
 */
export function buildCnn(spec: ModelSpec): tf.Sequential {
  if (spec.imageSize % 16 !== 0 || spec.imageSize < 16) {
    throw new Error(`image size ${spec.imageSize} must be a positive multiple of 16`);
  }
  if (!(spec.dropout >= 0 && spec.dropout < 1)) {
    throw new Error(`dropout ${spec.dropout} outside [0, 1)`);
  }
  const model = tf.sequential();
  let stream = spec.seed;
  const init = () => tf.initializers.glorotUniform({ seed: stream++ });

  CONV_FILTERS.forEach((filters, i) => {
    model.add(tf.layers.conv2d({
      ...(i === 0 ? { inputShape: [spec.imageSize, spec.imageSize, spec.channels] } : {}),
      filters,
      kernelSize: 3,
      padding: 'same',
      activation: 'relu',
      kernelInitializer: init(),
    }));
    model.add(tf.layers.maxPooling2d({ poolSize: 2 }));
  });
  model.add(tf.layers.flatten());
  model.add(tf.layers.dense({ units: 256, activation: 'relu', kernelInitializer: init() }));
  model.add(tf.layers.dropout({ rate: spec.dropout, seed: spec.seed + 1000 }));
  model.add(tf.layers.dense({ units: 2, kernelInitializer: init() }));
  return model;
}

interface SavedModel {
  spec: ModelSpec;
  weights: { shape: number[]; data: number[] }[];
}

/** Serializes the spec and every weight tensor to one JSON file. */
export async function saveModel(model: tf.Sequential, spec: ModelSpec, path: string): Promise<void> {
  const weights = [];
  for (const w of model.getWeights()) {
    weights.push({ shape: w.shape.slice(), data: Array.from(await w.data()) });
  }
  const doc: SavedModel = { spec, weights };
  fs.writeFileSync(path, JSON.stringify(doc) + '\n');
}

/** Rebuilds the architecture from the saved spec and restores its weights. */
export function loadModel(path: string): { model: tf.Sequential; spec: ModelSpec } {
  const doc: SavedModel = JSON.parse(fs.readFileSync(path, 'utf-8'));
  const model = buildCnn(doc.spec);
  const current = model.getWeights();
  if (current.length !== doc.weights.length) {
    throw new Error(`${path}: weight count does not match the architecture`);
  }
  model.setWeights(doc.weights.map((w, i) => {
    if (w.shape.join() !== current[i].shape.join()) {
      throw new Error(`${path}: weight ${i} has shape [${w.shape}], expected [${current[i].shape}]`);
    }
    return tf.tensor(w.data, w.shape);
  }));
  return { model, spec: doc.spec };
}

/** Raw logits for a batch, inference mode (no dropout). */
export function predictLogits(model: tf.Sequential, xs: tf.Tensor4D): Float32Array[] {
  return tf.tidy(() => {
    const out = model.apply(xs, { training: false }) as tf.Tensor2D;
    const flat = out.dataSync() as Float32Array;
    const rows: Float32Array[] = [];
    for (let i = 0; i < out.shape[0]; i++) {
      rows.push(flat.slice(i * 2, i * 2 + 2));
    }
    return rows;
  });
}

/** Smallest-index argmax, matching the evaluation convention downstream. */
export function argmaxRow(row: ArrayLike<number>): number {
  let best = 0;
  for (let i = 1; i < row.length; i++) {
    if (row[i] > row[best]) best = i;
  }
  return best;
}
