/**
 * Seeded PRNG so weight init and date sampling replay exactly.
 *
 * mulberry32 core: one 32-bit word of state, good enough statistical
 * quality for initialization noise, and trivially portable.
 */

export class Rng {
  private state: number;
  private spare: number | null = null;

  constructor(seed: number) {
    this.state = seed >>> 0;
  }

  /** Uniform in [0, 1). */
  next(): number {
    this.state = (this.state + 0x6d2b79f5) >>> 0;
    let t = this.state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  }

  /** Standard normal via Box-Muller, caching the spare draw. */
  normal(): number {
    if (this.spare !== null) {
      const value = this.spare;
      this.spare = null;
      return value;
    }
    let u = 0;
    while (u === 0) u = this.next(); // log(0) guard
    const v = this.next();
    const radius = Math.sqrt(-2.0 * Math.log(u));
    this.spare = radius * Math.sin(2.0 * Math.PI * v);
    return radius * Math.cos(2.0 * Math.PI * v);
  }

  /** Integer in [0, bound). */
  int(bound: number): number {
    return Math.floor(this.next() * bound);
  }

  /** First k of a seeded Fisher-Yates shuffle of 0..n-1, all distinct. */
  sampleDistinct(n: number, k: number): number[] {
    if (k > n) {
      throw new Error(`cannot draw ${k} distinct values from ${n}`);
    }
    const pool = Array.from({ length: n }, (_, i) => i);
    for (let i = 0; i < k; i++) {
      const j = i + this.int(n - i);
      const a = pool[i]!;
      pool[i] = pool[j]!;
      pool[j] = a;
    }
    return pool.slice(0, k);
  }
}
