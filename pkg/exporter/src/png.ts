import * as fs from 'fs';
import { PNG } from 'pngjs';

export interface RgbImage {
  width: number;
  height: number;
  /** Row-major RGB triples scaled to [0, 1]; alpha is dropped. */
  rgb: Float32Array;
}

export function readPng(path: string): RgbImage {
  const png = PNG.sync.read(fs.readFileSync(path));
  const n = png.width * png.height;
  const rgb = new Float32Array(n * 3);
  for (let i = 0; i < n; i++) {
    rgb[i * 3] = png.data[i * 4] / 255;
    rgb[i * 3 + 1] = png.data[i * 4 + 1] / 255;
    rgb[i * 3 + 2] = png.data[i * 4 + 2] / 255;
  }
  return { width: png.width, height: png.height, rgb };
}

/** Rec. 601 luma, the usual broadcast grayscale weighting. */
export function toLuma(img: RgbImage): Float32Array {
  const n = img.width * img.height;
  const out = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    out[i] = 0.299 * img.rgb[i * 3] + 0.587 * img.rgb[i * 3 + 1] + 0.114 * img.rgb[i * 3 + 2];
  }
  return out;
}
