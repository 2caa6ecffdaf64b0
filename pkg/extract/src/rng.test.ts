import { describe, expect, it } from 'vitest';

import { Rng } from './rng.js';

describe('Rng', () => {
  it('replays the same sequence for the same seed', () => {
    const a = new Rng(42);
    const b = new Rng(42);
    for (let i = 0; i < 50; i++) {
      expect(a.next()).toBe(b.next());
    }
  });

  it('diverges across seeds', () => {
    const a = new Rng(1);
    const b = new Rng(2);
    const drawsA = Array.from({ length: 8 }, () => a.next());
    const drawsB = Array.from({ length: 8 }, () => b.next());
    expect(drawsA).not.toEqual(drawsB);
  });

  it('stays inside [0, 1)', () => {
    const rng = new Rng(7);
    for (let i = 0; i < 10000; i++) {
      const u = rng.next();
      expect(u).toBeGreaterThanOrEqual(0);
      expect(u).toBeLessThan(1);
    }
  });

  it('normal draws have roughly zero mean and unit spread', () => {
    const rng = new Rng(123);
    const n = 20000;
    let sum = 0;
    let sumSq = 0;
    for (let i = 0; i < n; i++) {
      const z = rng.normal();
      expect(Number.isFinite(z)).toBe(true);
      sum += z;
      sumSq += z * z;
    }
    const mean = sum / n;
    const variance = sumSq / n - mean * mean;
    expect(Math.abs(mean)).toBeLessThan(0.05);
    expect(Math.abs(variance - 1)).toBeLessThan(0.05);
  });

  it('int stays below the bound', () => {
    const rng = new Rng(5);
    for (let i = 0; i < 1000; i++) {
      const v = rng.int(7);
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThan(7);
      expect(Number.isInteger(v)).toBe(true);
    }
  });

  describe('sampleDistinct', () => {
    it('returns k distinct values in range', () => {
      const rng = new Rng(9);
      for (let trial = 0; trial < 200; trial++) {
        const draw = rng.sampleDistinct(365, 5);
        expect(draw).toHaveLength(5);
        expect(new Set(draw).size).toBe(5);
        for (const v of draw) {
          expect(v).toBeGreaterThanOrEqual(0);
          expect(v).toBeLessThan(365);
        }
      }
    });

    it('k == n yields a permutation', () => {
      const rng = new Rng(3);
      const draw = rng.sampleDistinct(10, 10);
      expect([...draw].sort((x, y) => x - y)).toEqual(
        Array.from({ length: 10 }, (_, i) => i));
    });

    it('rejects k > n', () => {
      const rng = new Rng(0);
      expect(() => rng.sampleDistinct(3, 4)).toThrow(/cannot draw/);
    });

    it('is seed-deterministic', () => {
      const a = new Rng(77).sampleDistinct(365, 20);
      const b = new Rng(77).sampleDistinct(365, 20);
      expect(a).toEqual(b);
    });
  });
});
