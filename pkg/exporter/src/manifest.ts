import * as fs from 'fs';
import * as path from 'path';

export interface ManifestEntry {
  /** Image path relative to the manifest's directory. */
  path: string;
  label: number;
}

/** Parses a `path,label` manifest CSV. Order is preserved. */
export function readManifest(file: string): ManifestEntry[] {
  const text = fs.readFileSync(file, 'utf-8');
  const lines = text.split('\n');
  if (lines[lines.length - 1] === '') lines.pop();
  if (lines.length === 0 || lines[0].replace(/\r$/, '') !== 'path,label') {
    throw new Error(`${file}: malformed header, expected "path,label"`);
  }
  const entries: ManifestEntry[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].replace(/\r$/, '').split(',');
    if (parts.length !== 2 || parts[0] === '') {
      throw new Error(`${file}: bad row on line ${i + 1}`);
    }
    const label = Number(parts[1]);
    if (!Number.isInteger(label) || label < 0) {
      throw new Error(`${file}: bad label on line ${i + 1}`);
    }
    entries.push({ path: parts[0], label });
  }
  if (entries.length === 0) throw new Error(`${file}: no entries`);
  return entries;
}

/** Absolute image path for a manifest entry. */
export function resolveEntry(manifestFile: string, entry: ManifestEntry): string {
  return path.resolve(path.dirname(manifestFile), entry.path);
}
