import * as tf from '@tensorflow/tfjs';
import { ManifestEntry, resolveEntry } from './manifest';
import { readPgm } from './pgm';
import { readPng, toLuma } from './png';

export interface Dataset {
  /** [n, size, size, channels] float32 batch in manifest order. */
  xs: tf.Tensor4D;
  labels: number[];
}

/**
 * One image as an [h, w, channels] tensor. PGM files are grayscale and get
 * replicated when 3-channel training is requested; PNG files are RGB and
 * get collapsed to luma when 1-channel training is requested.
 */
function loadImage(file: string, channels: 1 | 3): tf.Tensor3D {
  if (file.toLowerCase().endsWith('.png')) {
    const img = readPng(file);
    if (channels === 1) {
      return tf.tensor3d(toLuma(img), [img.height, img.width, 1]);
    }
    return tf.tensor3d(img.rgb, [img.height, img.width, 3]);
  }
  const img = readPgm(file);
  const gray = tf.tensor3d(img.pixels, [img.height, img.width, 1]);
  return channels === 3 ? tf.tile(gray, [1, 1, 3]) : gray;
}

/** Loads every manifest image, resizes it to size x size and stacks the batch. */
export function loadDataset(
  manifestFile: string,
  entries: ManifestEntry[],
  size: number,
  channels: 1 | 3
): Dataset {
  const xs = tf.tidy(() => {
    const imgs = entries.map((entry) => {
      let t = loadImage(resolveEntry(manifestFile, entry), channels);
      if (t.shape[0] !== size || t.shape[1] !== size) {
        t = tf.image.resizeBilinear(t, [size, size]);
      }
      return t;
    });
    return tf.stack(imgs) as tf.Tensor4D;
  });
  return { xs, labels: entries.map((e) => e.label) };
}
