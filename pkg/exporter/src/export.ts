import * as fs from 'fs';
import { loadDataset } from './data';
import { readManifest } from './manifest';
import { argmaxRow, loadModel, predictLogits } from './model';

export interface ExportResult {
  rows: number;
  /** Fraction of manifest entries whose argmax logit matches the label. */
  accuracy: number;
}

/**
 * Runs the saved model over every manifest entry, in manifest order, and
 * writes `label,logit_0,logit_1` rows with raw (pre-softmax) values.
 */
export function exportLogits(modelPath: string, manifestFile: string, outCsv: string): ExportResult {
  const { model, spec } = loadModel(modelPath);
  const entries = readManifest(manifestFile);
  const data = loadDataset(manifestFile, entries, spec.imageSize, spec.channels);
  const logits = predictLogits(model, data.xs);
  data.xs.dispose();

  const lines = ['label,logit_0,logit_1'];
  let correct = 0;
  logits.forEach((row, i) => {
    lines.push(`${entries[i].label},${row[0].toPrecision(9)},${row[1].toPrecision(9)}`);
    if (argmaxRow(row) === entries[i].label) correct++;
  });
  fs.writeFileSync(outCsv, lines.join('\n') + '\n');
  return { rows: logits.length, accuracy: correct / logits.length };
}
