import * as fs from 'fs';

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major pixels scaled to [0, 1]. */
  pixels: Float32Array;
}

/**
 * Reads a binary (P5) PGM file. Comments starting with '#' are allowed
 * anywhere in the header; the maximum gray value must fit in one byte.
 */
export function readPgm(path: string): GrayImage {
  const buf = fs.readFileSync(path);
  let pos = 0;

  function nextToken(): string {
    // skip whitespace and comment lines
    for (;;) {
      while (pos < buf.length && isSpace(buf[pos])) pos++;
      if (pos < buf.length && buf[pos] === 0x23) {
        while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < buf.length && !isSpace(buf[pos]) && buf[pos] !== 0x23) pos++;
    if (start === pos) throw new Error(`${path}: truncated header`);
    return buf.toString('ascii', start, pos);
  }

  const magic = nextToken();
  if (magic !== 'P5') throw new Error(`${path}: not a binary PGM (magic ${magic})`);
  const width = parseInt(nextToken(), 10);
  const height = parseInt(nextToken(), 10);
  const maxval = parseInt(nextToken(), 10);
  if (!(width > 0 && height > 0)) throw new Error(`${path}: bad dimensions`);
  if (!(maxval > 0 && maxval < 256)) throw new Error(`${path}: unsupported maxval ${maxval}`);
  pos++; // single whitespace byte after maxval

  const n = width * height;
  if (buf.length - pos < n) throw new Error(`${path}: pixel data truncated`);
  const pixels = new Float32Array(n);
  for (let i = 0; i < n; i++) pixels[i] = buf[pos + i] / maxval;
  return { width, height, pixels };
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d || byte === 0x0b || byte === 0x0c;
}
