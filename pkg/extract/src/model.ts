/**
 * A small causal transformer with deterministic, seeded random weights.
 *
 * This is the "model" whose hidden states get dumped: byte-level input,
 * learned positional embeddings, pre-LN blocks with multi-head causal
 * attention and a GELU MLP. Nothing is trained; the point is a cheap,
 * fully reproducible forward pass with the real layer structure, so the
 * extraction pipeline and its consumers can be exercised end to end.
 *
 * Layer indexing convention for dumps: layer 0 is the embedding output
 * (token + position), layer i >= 1 is the residual stream after block i.
 */

import { Rng } from './rng.js';

export interface ModelConfig {
  dim: number;
  nHeads: number;
  nBlocks: number;
  ffnDim: number;
  maxSeq: number;
}

export const VOCAB_SIZE = 257; // 256 byte values + BOS
export const BOS = 256;

interface BlockWeights {
  ln1Gamma: Float32Array;
  ln1Beta: Float32Array;
  wq: Float32Array; // dim x dim, row-major [out][in]
  wk: Float32Array;
  wv: Float32Array;
  wo: Float32Array;
  ln2Gamma: Float32Array;
  ln2Beta: Float32Array;
  w1: Float32Array; // ffnDim x dim
  b1: Float32Array;
  w2: Float32Array; // dim x ffnDim
  b2: Float32Array;
}

function normalArray(rng: Rng, size: number, scale: number): Float32Array {
  const out = new Float32Array(size);
  for (let i = 0; i < size; i++) {
    out[i] = rng.normal() * scale;
  }
  return out;
}

function layerNorm(x: Float32Array, offset: number, dim: number,
  gamma: Float32Array, beta: Float32Array, out: Float32Array): void {
  let mean = 0;
  for (let d = 0; d < dim; d++) mean += x[offset + d]!;
  mean /= dim;
  let variance = 0;
  for (let d = 0; d < dim; d++) {
    const c = x[offset + d]! - mean;
    variance += c * c;
  }
  variance /= dim;
  const inv = 1.0 / Math.sqrt(variance + 1e-5);
  for (let d = 0; d < dim; d++) {
    out[d] = (x[offset + d]! - mean) * inv * gamma[d]! + beta[d]!;
  }
}

function gelu(x: number): number {
  return 0.5 * x * (1.0 + Math.tanh(
    Math.sqrt(2.0 / Math.PI) * (x + 0.044715 * x * x * x)));
}

/** out = W.x for row-major W of shape [rows][cols]. */
function matVec(w: Float32Array, x: Float32Array, rows: number,
  cols: number, out: Float32Array): void {
  for (let r = 0; r < rows; r++) {
    let acc = 0;
    const base = r * cols;
    for (let c = 0; c < cols; c++) {
      acc += w[base + c]! * x[c]!;
    }
    out[r] = acc;
  }
}

export class CausalTransformer {
  readonly config: ModelConfig;
  readonly seed: number;
  private tokEmb: Float32Array; // VOCAB_SIZE x dim
  private posEmb: Float32Array; // maxSeq x dim
  private blocks: BlockWeights[];

  private constructor(config: ModelConfig, seed: number,
    tokEmb: Float32Array, posEmb: Float32Array, blocks: BlockWeights[]) {
    this.config = config;
    this.seed = seed;
    this.tokEmb = tokEmb;
    this.posEmb = posEmb;
    this.blocks = blocks;
  }

  /** Number of dumpable layers: embedding plus one per block. */
  get nLayers(): number {
    return this.config.nBlocks + 1;
  }

  static init(seed: number, config: ModelConfig): CausalTransformer {
    if (config.dim % config.nHeads !== 0) {
      throw new Error(
        `dim ${config.dim} not divisible by ${config.nHeads} heads`);
    }
    const rng = new Rng(seed);
    const { dim, ffnDim } = config;
    const scale = 0.02;
    const tokEmb = normalArray(rng, VOCAB_SIZE * dim, scale);
    const posEmb = normalArray(rng, config.maxSeq * dim, scale);
    const blocks: BlockWeights[] = [];
    for (let b = 0; b < config.nBlocks; b++) {
      blocks.push({
        ln1Gamma: new Float32Array(dim).fill(1),
        ln1Beta: new Float32Array(dim),
        wq: normalArray(rng, dim * dim, scale),
        wk: normalArray(rng, dim * dim, scale),
        wv: normalArray(rng, dim * dim, scale),
        wo: normalArray(rng, dim * dim, scale),
        ln2Gamma: new Float32Array(dim).fill(1),
        ln2Beta: new Float32Array(dim),
        w1: normalArray(rng, ffnDim * dim, scale),
        b1: new Float32Array(ffnDim),
        w2: normalArray(rng, dim * ffnDim, scale),
        b2: new Float32Array(dim),
      });
    }
    return new CausalTransformer(config, seed, tokEmb, posEmb, blocks);
  }

  /** BOS-prefixed UTF-8 byte token ids for a sentence. */
  tokenize(text: string): number[] {
    const bytes = new TextEncoder().encode(text);
    if (bytes.length + 1 > this.config.maxSeq) {
      throw new Error(
        `sentence of ${bytes.length} bytes exceeds context `
        + `${this.config.maxSeq}`);
    }
    return [BOS, ...bytes];
  }

  /**
   * Run the model and return the final token's hidden state at every
   * layer: index 0 is the embedding output, index i the residual stream
   * after block i.
   */
  finalTokenStates(tokens: number[]): Float32Array[] {
    const { dim, nHeads } = this.config;
    const seq = tokens.length;
    const headDim = dim / nHeads;
    const x = new Float32Array(seq * dim);
    for (let p = 0; p < seq; p++) {
      const tok = tokens[p]!;
      if (tok < 0 || tok >= VOCAB_SIZE) {
        throw new Error(`token id ${tok} outside vocabulary`);
      }
      for (let d = 0; d < dim; d++) {
        x[p * dim + d] = this.tokEmb[tok * dim + d]! + this.posEmb[p * dim + d]!;
      }
    }
    const last = (seq - 1) * dim;
    const states: Float32Array[] = [x.slice(last, last + dim)];

    const normed = new Float32Array(dim);
    const q = new Float32Array(seq * dim);
    const k = new Float32Array(seq * dim);
    const v = new Float32Array(seq * dim);
    const attnOut = new Float32Array(dim);
    const proj = new Float32Array(dim);
    const hidden = new Float32Array(this.config.ffnDim);
    const scores = new Float32Array(seq);

    for (const block of this.blocks) {
      // attention sublayer
      for (let p = 0; p < seq; p++) {
        layerNorm(x, p * dim, dim, block.ln1Gamma, block.ln1Beta, normed);
        matVec(block.wq, normed, dim, dim, attnOut);
        q.set(attnOut, p * dim);
        matVec(block.wk, normed, dim, dim, attnOut);
        k.set(attnOut, p * dim);
        matVec(block.wv, normed, dim, dim, attnOut);
        v.set(attnOut, p * dim);
      }
      const invSqrt = 1.0 / Math.sqrt(headDim);
      for (let p = 0; p < seq; p++) {
        attnOut.fill(0);
        for (let h = 0; h < nHeads; h++) {
          const ho = h * headDim;
          let maxScore = -Infinity;
          for (let j = 0; j <= p; j++) {
            let dot = 0;
            for (let d = 0; d < headDim; d++) {
              dot += q[p * dim + ho + d]! * k[j * dim + ho + d]!;
            }
            const s = dot * invSqrt;
            scores[j] = s;
            if (s > maxScore) maxScore = s;
          }
          let total = 0;
          for (let j = 0; j <= p; j++) {
            const e = Math.exp(scores[j]! - maxScore);
            scores[j] = e;
            total += e;
          }
          for (let j = 0; j <= p; j++) {
            const weight = scores[j]! / total;
            for (let d = 0; d < headDim; d++) {
              attnOut[ho + d]! += weight * v[j * dim + ho + d]!;
            }
          }
        }
        matVec(block.wo, attnOut, dim, dim, proj);
        for (let d = 0; d < dim; d++) {
          x[p * dim + d]! += proj[d]!;
        }
      }
      // MLP sublayer
      for (let p = 0; p < seq; p++) {
        layerNorm(x, p * dim, dim, block.ln2Gamma, block.ln2Beta, normed);
        matVec(block.w1, normed, this.config.ffnDim, dim, hidden);
        for (let f = 0; f < this.config.ffnDim; f++) {
          hidden[f] = gelu(hidden[f]! + block.b1[f]!);
        }
        matVec(block.w2, hidden, dim, this.config.ffnDim, proj);
        for (let d = 0; d < dim; d++) {
          x[p * dim + d]! += proj[d]! + block.b2[d]!;
        }
      }
      states.push(x.slice(last, last + dim));
    }
    return states;
  }

  toJSON(): object {
    const tensors: Record<string, number[]> = {
      tok_emb: Array.from(this.tokEmb),
      pos_emb: Array.from(this.posEmb),
    };
    this.blocks.forEach((block, i) => {
      for (const [name, tensor] of Object.entries(block)) {
        tensors[`block${i}.${name}`] = Array.from(tensor as Float32Array);
      }
    });
    return {
      kind: 'datefrag-extract-weights',
      seed: this.seed,
      config: this.config,
      tensors,
    };
  }

  static fromJSON(data: unknown): CausalTransformer {
    const obj = data as {
      kind?: string;
      seed?: number;
      config?: ModelConfig;
      tensors?: Record<string, number[]>;
    };
    if (obj?.kind !== 'datefrag-extract-weights' || !obj.config
      || !obj.tensors || typeof obj.seed !== 'number') {
      throw new Error('not a weights file (missing kind/config/tensors/seed)');
    }
    const config = obj.config;
    const { dim, ffnDim } = config;
    const take = (name: string, size: number): Float32Array => {
      const raw = obj.tensors![name];
      if (!raw || raw.length !== size) {
        throw new Error(
          `tensor '${name}' missing or wrong size `
          + `(want ${size}, got ${raw?.length ?? 'none'})`);
      }
      return Float32Array.from(raw);
    };
    const tokEmb = take('tok_emb', VOCAB_SIZE * dim);
    const posEmb = take('pos_emb', config.maxSeq * dim);
    const blocks: BlockWeights[] = [];
    for (let b = 0; b < config.nBlocks; b++) {
      blocks.push({
        ln1Gamma: take(`block${b}.ln1Gamma`, dim),
        ln1Beta: take(`block${b}.ln1Beta`, dim),
        wq: take(`block${b}.wq`, dim * dim),
        wk: take(`block${b}.wk`, dim * dim),
        wv: take(`block${b}.wv`, dim * dim),
        wo: take(`block${b}.wo`, dim * dim),
        ln2Gamma: take(`block${b}.ln2Gamma`, dim),
        ln2Beta: take(`block${b}.ln2Beta`, dim),
        w1: take(`block${b}.w1`, ffnDim * dim),
        b1: take(`block${b}.b1`, ffnDim),
        w2: take(`block${b}.w2`, dim * ffnDim),
        b2: take(`block${b}.b2`, dim),
      });
    }
    return new CausalTransformer(config, obj.seed, tokEmb, posEmb, blocks);
  }
}
