import * as tf from '@tensorflow/tfjs';
import * as fs from 'fs';
import { loadDataset } from './data';
import { readManifest } from './manifest';
import { argmaxRow, buildCnn, ModelSpec, predictLogits, saveModel } from './model';
import { mulberry32, shuffledIndices } from './rng';

export interface TrainSpec {
  manifestTrain: string;
  /** Defaults to the training manifest when no held-out split is given. */
  manifestVal?: string;
  epochs: number;
  batchSize: number;
  learningRate: number;
  dropout: number;
  imageSize: number;
  channels: 1 | 3;
  seed: number;
}

export interface EpochStats {
  epoch: number;
  trainLoss: number;
  valAccuracy: number;
}

function validate(spec: TrainSpec): void {
  if (spec.epochs < 0) throw new Error('epochs must be >= 0');
  if (spec.batchSize < 1) throw new Error('batch size must be >= 1');
  if (spec.learningRate < 0) throw new Error('learning rate must be >= 0');
}

function accuracyOn(model: tf.Sequential, xs: tf.Tensor4D, labels: number[]): number {
  const rows = predictLogits(model, xs);
  let correct = 0;
  rows.forEach((row, i) => {
    if (argmaxRow(row) === labels[i]) correct++;
  });
  return correct / labels.length;
}

/**
 * Trains the CNN with plain mini-batch Adam and writes the model plus a
 * per-epoch log CSV (`epoch,train_loss,val_accuracy`) next to it.
 */
export async function trainCnn(spec: TrainSpec, modelPath: string): Promise<EpochStats[]> {
  validate(spec);
  const trainEntries = readManifest(spec.manifestTrain);
  const classes = new Set(trainEntries.map((e) => e.label));
  if (classes.size < 2) throw new Error('training manifest must contain two classes');
  for (const label of classes) {
    if (label > 1) throw new Error(`label ${label} outside the binary range`);
  }

  const valManifest = spec.manifestVal ?? spec.manifestTrain;
  const train = loadDataset(spec.manifestTrain, trainEntries, spec.imageSize, spec.channels);
  const val = loadDataset(valManifest, readManifest(valManifest), spec.imageSize, spec.channels);

  const modelSpec: ModelSpec = {
    imageSize: spec.imageSize,
    channels: spec.channels,
    dropout: spec.dropout,
    seed: spec.seed,
  };
  const model = buildCnn(modelSpec);
  const optimizer = tf.train.adam(spec.learningRate);
  const rand = mulberry32(spec.seed ^ 0x9e3779b9);
  const n = train.labels.length;
  const labelTensor = tf.oneHot(tf.tensor1d(train.labels, 'int32'), 2);

  const log: EpochStats[] = [];
  for (let epoch = 1; epoch <= spec.epochs; epoch++) {
    const order = shuffledIndices(n, rand);
    let lossSum = 0;
    for (let start = 0; start < n; start += spec.batchSize) {
      const idx = order.slice(start, start + spec.batchSize);
      const cost = tf.tidy(() => {
        const xb = tf.gather(train.xs, idx);
        const yb = tf.gather(labelTensor, idx);
        return optimizer.minimize(
          () => tf.losses.softmaxCrossEntropy(yb, model.apply(xb, { training: true }) as tf.Tensor2D),
          true
        )!;
      });
      lossSum += cost.dataSync()[0] * idx.length;
      cost.dispose();
    }
    const stats = {
      epoch,
      trainLoss: lossSum / n,
      valAccuracy: accuracyOn(model, val.xs, val.labels),
    };
    log.push(stats);
    console.log(`epoch ${epoch}/${spec.epochs} loss=${stats.trainLoss.toFixed(4)} val_acc=${stats.valAccuracy.toFixed(4)}`);
  }

  await saveModel(model, modelSpec, modelPath);
  writeTrainingLog(log, logPathFor(modelPath));
  train.xs.dispose();
  val.xs.dispose();
  labelTensor.dispose();
  optimizer.dispose();
  return log;
}

export function logPathFor(modelPath: string): string {
  return modelPath.replace(/\.json$/, '') + '.log.csv';
}

function writeTrainingLog(log: EpochStats[], path: string): void {
  const lines = ['epoch,train_loss,val_accuracy'];
  for (const row of log) {
    lines.push(`${row.epoch},${row.trainLoss.toPrecision(9)},${row.valAccuracy.toPrecision(9)}`);
  }
  fs.writeFileSync(path, lines.join('\n') + '\n');
}
