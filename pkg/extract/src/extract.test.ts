import * as fs from 'node:fs';
import * as os from 'node:os';
import * as path from 'node:path';

import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import {
  EmbeddingRecord, ExtractionSpec, manifestPathFor, runExtraction,
  sampleDates,
} from './extract.js';
import { CausalTransformer } from './model.js';

let workdir: string;
let modelPath: string;

beforeAll(() => {
  workdir = fs.mkdtempSync(path.join(os.tmpdir(), 'extract-test-'));
  modelPath = path.join(workdir, 'weights.json');
  const model = CausalTransformer.init(
    7, { dim: 16, nHeads: 4, nBlocks: 2, ffnDim: 64, maxSeq: 96 });
  fs.writeFileSync(modelPath, JSON.stringify(model.toJSON()));
});

afterAll(() => {
  fs.rmSync(workdir, { recursive: true, force: true });
});

function spec(overrides: Partial<ExtractionSpec>): ExtractionSpec {
  return {
    modelPath,
    languages: ['en'],
    formats: ['iso'],
    yearRange: [2000, 2001],
    samplesPerYear: 5,
    layers: null,
    seed: 0,
    outPath: path.join(workdir, 'dump.jsonl'),
    ...overrides,
  };
}

function readDump(p: string): EmbeddingRecord[] {
  return fs.readFileSync(p, 'utf8').trimEnd().split('\n')
    .map((line) => JSON.parse(line) as EmbeddingRecord);
}

describe('runExtraction', () => {
  it('one language, one format, two years, K=5, three layers -> 30 records', () => {
    const out = path.join(workdir, 'small.jsonl');
    const result = runExtraction(spec({ outPath: out }));
    expect(result.records).toBe(30);
    const records = readDump(out);
    expect(records).toHaveLength(30);
    for (const r of records) {
      expect(r.language).toBe('en');
      expect(r.format).toBe('iso');
      expect(r.date).toMatch(/^200[01]-\d{2}-\d{2}$/);
      expect(r.sample).toBeGreaterThanOrEqual(0);
      expect(r.sample).toBeLessThan(5);
      expect(r.layer).toBeGreaterThanOrEqual(0);
      expect(r.layer).toBeLessThan(3);
      expect(r.dim).toBe(16);
      expect(r.vector).toHaveLength(16);
      for (const v of r.vector) expect(Number.isFinite(v)).toBe(true);
    }
  });

  it('dates are distinct within each (format, year) cell', () => {
    const out = path.join(workdir, 'distinct.jsonl');
    runExtraction(spec({
      outPath: out, formats: ['iso', 'slash'], yearRange: [1990, 1994],
    }));
    const byCell = new Map<string, Set<string>>();
    for (const r of readDump(out)) {
      const year = r.date.slice(0, 4);
      const key = `${r.format}:${year}`;
      if (!byCell.has(key)) byCell.set(key, new Set());
      byCell.get(key)!.add(r.date);
      expect(Number(year)).toBeGreaterThanOrEqual(1990);
      expect(Number(year)).toBeLessThanOrEqual(1994);
    }
    expect(byCell.size).toBe(10);
    for (const dates of byCell.values()) {
      expect(dates.size).toBe(5);
    }
  });

  it('languages share the sampled dates', () => {
    const out = path.join(workdir, 'shared.jsonl');
    runExtraction(spec({ outPath: out, languages: ['en', 'ar', 'zh'] }));
    const perLanguage = new Map<string, string[]>();
    for (const r of readDump(out)) {
      if (!perLanguage.has(r.language)) perLanguage.set(r.language, []);
      if (r.layer === 0) {
        perLanguage.get(r.language)!.push(`${r.format}:${r.date}:${r.sample}`);
      }
    }
    const [first, ...others] = [...perLanguage.values()]
      .map((keys) => [...keys].sort());
    expect(perLanguage.size).toBe(3);
    for (const keys of others) expect(keys).toEqual(first);
  });

  it('the same seed reproduces the dump byte for byte', () => {
    const outA = path.join(workdir, 'rerun-a.jsonl');
    const outB = path.join(workdir, 'rerun-b.jsonl');
    runExtraction(spec({ outPath: outA, seed: 99 }));
    runExtraction(spec({ outPath: outB, seed: 99 }));
    expect(fs.readFileSync(outA, 'utf8')).toBe(fs.readFileSync(outB, 'utf8'));
  });

  it('a different seed draws different dates', () => {
    const a = sampleDates(spec({ seed: 1 }));
    const b = sampleDates(spec({ seed: 2 }));
    const flatten = (m: Map<string, { month: number; day: number }[]>) =>
      [...m.values()].flat().map((d) => `${d.month}-${d.day}`).join('|');
    expect(flatten(a)).not.toBe(flatten(b));
  });

  it('honours an explicit layer subset', () => {
    const out = path.join(workdir, 'layers.jsonl');
    const result = runExtraction(spec({ outPath: out, layers: [0, 2] }));
    expect(result.records).toBe(20);
    const layers = new Set(readDump(out).map((r) => r.layer));
    expect([...layers].sort()).toEqual([0, 2]);
  });

  it('writes a manifest describing the dump', () => {
    const out = path.join(workdir, 'manifested.jsonl');
    const result = runExtraction(spec({
      outPath: out, languages: ['en', 'de'], formats: ['iso', 'long'],
    }));
    expect(result.manifestPath).toBe(
      path.join(workdir, 'manifested.manifest.json'));
    const manifest = JSON.parse(fs.readFileSync(result.manifestPath, 'utf8'));
    expect(manifest.year_range).toEqual([2000, 2001]);
    expect(manifest.samples_per_year).toBe(5);
    expect(manifest.n_layers).toBe(3);
    expect(manifest.dim).toBe(16);
    expect(manifest.languages).toEqual(['en', 'de']);
    expect(manifest.formats).toEqual(['iso', 'long']);
    expect(manifest.layers).toEqual([0, 1, 2]);
    expect(manifest.seed).toBe(0);
    expect(manifest.model).toContain('s7');
    expect(manifest.records).toBe(2 * 2 * 2 * 5 * 3);
  });

  it('rejects unknown languages, bad ranges and bad layers', () => {
    expect(() => runExtraction(spec({ languages: ['xx'] })))
      .toThrow(/unknown language/);
    expect(() => runExtraction(spec({ yearRange: [2005, 2000] })))
      .toThrow(/bad year range/);
    expect(() => runExtraction(spec({ samplesPerYear: 400 })))
      .toThrow(/1\.\.365/);
    expect(() => runExtraction(spec({ layers: [3] })))
      .toThrow(/out of range/);
  });

  it('reports model problems as load errors', () => {
    expect(() => runExtraction(spec({
      modelPath: path.join(workdir, 'missing.json'),
    }))).toThrow(/cannot read model/);
    const garbled = path.join(workdir, 'garbled.json');
    fs.writeFileSync(garbled, '{nope');
    expect(() => runExtraction(spec({ modelPath: garbled })))
      .toThrow(/not valid JSON/);
  });

  it('removes partial output when a run dies midway', () => {
    // context window too small for any sentence: fails on the first record
    const tiny = path.join(workdir, 'tiny.json');
    const model = CausalTransformer.init(
      1, { dim: 16, nHeads: 4, nBlocks: 1, ffnDim: 64, maxSeq: 4 });
    fs.writeFileSync(tiny, JSON.stringify(model.toJSON()));
    const out = path.join(workdir, 'never', 'written.jsonl');
    expect(() => runExtraction(spec({ modelPath: tiny, outPath: out })))
      .toThrow(/exceeds context/);
    expect(fs.existsSync(out)).toBe(false);
    expect(fs.readdirSync(path.join(workdir, 'never'))).toEqual([]);
  });
});

describe('manifestPathFor', () => {
  it('swaps the extension', () => {
    expect(manifestPathFor('/a/b/dump.jsonl')).toBe('/a/b/dump.manifest.json');
    expect(manifestPathFor('bare')).toBe('bare.manifest.json');
  });
});
