export { readPgm, GrayImage } from './pgm';
export { readPng, toLuma, RgbImage } from './png';
export { readManifest, resolveEntry, ManifestEntry } from './manifest';
export { loadDataset, Dataset } from './data';
export { buildCnn, loadModel, saveModel, predictLogits, argmaxRow, ModelSpec } from './model';
export { trainCnn, logPathFor, TrainSpec, EpochStats } from './train';
export { exportLogits, ExportResult } from './export';
