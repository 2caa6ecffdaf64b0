#!/usr/bin/env node
/**
 * datefrag-extract: materialize a seeded model and dump its hidden
 * states for date sentences.
 *
 *   datefrag-extract init --seed 7 --out weights.json
 *   datefrag-extract run --model weights.json --languages en,ar \
 *       --formats iso,long --years 1990:2024 --samples 5 --layers all \
 *       --seed 0 --out dump.jsonl
 *
 * Exit codes: 0 ok, 1 operational failure, 2 bad arguments.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import { parseArgs } from 'node:util';

import { runExtraction } from './extract.js';
import { CausalTransformer, ModelConfig } from './model.js';
import { FORMAT_KINDS, FormatKind, supportedLanguages } from './templates.js';

class UsageError extends Error {}

function intFlag(value: string | undefined, name: string, fallback: number): number {
  if (value === undefined) return fallback;
  const n = Number(value);
  if (!Number.isInteger(n)) {
    throw new UsageError(`--${name} wants an integer, got '${value}'`);
  }
  return n;
}

function splitList(value: string): string[] {
  return value.split(',').map((s) => s.trim()).filter((s) => s.length > 0);
}

function cmdInit(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      seed: { type: 'string' },
      dim: { type: 'string' },
      heads: { type: 'string' },
      blocks: { type: 'string' },
      'max-seq': { type: 'string' },
      out: { type: 'string' },
    },
  });
  if (!values.out) throw new UsageError('init needs --out');
  const seed = intFlag(values.seed, 'seed', 7);
  const config: ModelConfig = {
    dim: intFlag(values.dim, 'dim', 32),
    nHeads: intFlag(values.heads, 'heads', 4),
    nBlocks: intFlag(values.blocks, 'blocks', 2),
    ffnDim: 0,
    maxSeq: intFlag(values['max-seq'], 'max-seq', 96),
  };
  config.ffnDim = 4 * config.dim;
  const model = CausalTransformer.init(seed, config);
  fs.mkdirSync(path.dirname(values.out), { recursive: true });
  fs.writeFileSync(values.out, JSON.stringify(model.toJSON()) + '\n');
  process.stdout.write(
    `wrote ${values.out} (dim=${config.dim} blocks=${config.nBlocks} `
    + `seed=${seed})\n`);
  return 0;
}

function parseYears(value: string | undefined): [number, number] {
  if (value === undefined) return [1990, 2024];
  const match = /^(-?\d+):(-?\d+)$/.exec(value);
  if (!match) throw new UsageError(`--years wants LO:HI, got '${value}'`);
  return [Number(match[1]), Number(match[2])];
}

function parseLayers(value: string | undefined): number[] | null {
  if (value === undefined || value === 'all') return null;
  const layers = splitList(value).map((part) => {
    const n = Number(part);
    if (!Number.isInteger(n)) {
      throw new UsageError(`--layers wants 'all' or integers, got '${part}'`);
    }
    return n;
  });
  if (layers.length === 0) throw new UsageError('--layers list is empty');
  return layers;
}

function cmdRun(argv: string[]): number {
  const { values } = parseArgs({
    args: argv,
    options: {
      model: { type: 'string' },
      languages: { type: 'string' },
      formats: { type: 'string' },
      years: { type: 'string' },
      samples: { type: 'string' },
      layers: { type: 'string' },
      seed: { type: 'string' },
      out: { type: 'string' },
    },
  });
  if (!values.model) throw new UsageError('run needs --model');
  if (!values.out) throw new UsageError('run needs --out');
  const languages = values.languages
    ? splitList(values.languages) : [...supportedLanguages()];
  const formats = values.formats
    ? splitList(values.formats) : [...FORMAT_KINDS];
  for (const format of formats) {
    if (!(FORMAT_KINDS as readonly string[]).includes(format)) {
      throw new UsageError(
        `unknown format '${format}' (have ${FORMAT_KINDS.join(', ')})`);
    }
  }
  const result = runExtraction({
    modelPath: values.model,
    languages,
    formats: formats as FormatKind[],
    yearRange: parseYears(values.years),
    samplesPerYear: intFlag(values.samples, 'samples', 5),
    layers: parseLayers(values.layers),
    seed: intFlag(values.seed, 'seed', 0),
    outPath: values.out,
  });
  process.stdout.write(
    `${result.records} records -> ${values.out} `
    + `(manifest ${result.manifestPath})\n`);
  return 0;
}

const USAGE = 'usage: datefrag-extract {init|run} [options]\n';

export function main(argv: string[]): number {
  const [command, ...rest] = argv;
  try {
    if (command === 'init') return cmdInit(rest);
    if (command === 'run') return cmdRun(rest);
    process.stderr.write(USAGE);
    return 2;
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    if (err instanceof Error && err.message.startsWith('Unknown option')) {
      process.stderr.write(`error: ${err.message}\n`);
      return 2;
    }
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 1;
  }
}

process.exit(main(process.argv.slice(2)));
