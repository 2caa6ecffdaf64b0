import { describe, expect, it } from 'vitest';

import {
  FORMAT_KINDS, dayOfYearToDate, isoDate, renderDate, renderSentence,
  supportedLanguages,
} from './templates.js';

const D = { year: 1995, month: 7, day: 3 };

describe('renderDate', () => {
  it('covers the three surface formats in English', () => {
    expect(renderDate(D, 'en', 'iso')).toBe('1995-07-03');
    expect(renderDate(D, 'en', 'slash')).toBe('03/07/1995');
    expect(renderDate(D, 'en', 'long')).toBe('3 July 1995');
  });

  it('pads single digits in iso and slash', () => {
    const d = { year: 2004, month: 1, day: 9 };
    expect(isoDate(d)).toBe('2004-01-09');
    expect(renderDate(d, 'de', 'slash')).toBe('09/01/2004');
  });

  it('uses native month names in long form', () => {
    expect(renderDate(D, 'de', 'long')).toBe('3 Juli 1995');
    expect(renderDate(D, 'ar', 'long')).toBe('3 يوليو 1995');
    expect(renderDate(D, 'ha', 'long')).toBe('3 Yuli 1995');
  });

  it('long form in Chinese uses counter words', () => {
    expect(renderDate(D, 'zh', 'long')).toBe('1995年7月3日');
  });
});

describe('renderSentence', () => {
  it('embeds the rendered date in the fixed template', () => {
    expect(renderSentence(D, 'en', 'iso')).toBe('The date is 1995-07-03.');
    expect(renderSentence(D, 'zh', 'long')).toBe('日期是1995年7月3日。');
  });

  it('every supported language has exactly one placeholder', () => {
    for (const lang of supportedLanguages()) {
      for (const format of FORMAT_KINDS) {
        const sentence = renderSentence(D, lang, format);
        expect(sentence).toContain(renderDate(D, lang, format));
        expect(sentence).not.toContain('{date}');
      }
    }
  });

  it('rejects unknown languages', () => {
    expect(() => renderSentence(D, 'xx', 'iso')).toThrow(/no template/);
  });
});

describe('dayOfYearToDate', () => {
  it('maps the endpoints', () => {
    expect(dayOfYearToDate(2000, 0)).toEqual({ year: 2000, month: 1, day: 1 });
    expect(dayOfYearToDate(2000, 364)).toEqual(
      { year: 2000, month: 12, day: 31 });
  });

  it('never lands on February 29, even in leap years', () => {
    expect(dayOfYearToDate(2020, 58)).toEqual(
      { year: 2020, month: 2, day: 28 });
    expect(dayOfYearToDate(2020, 59)).toEqual(
      { year: 2020, month: 3, day: 1 });
  });

  it('round-trips every index through a month/day pair', () => {
    const seen = new Set<string>();
    for (let i = 0; i < 365; i++) {
      const d = dayOfYearToDate(1999, i);
      expect(d.month).toBeGreaterThanOrEqual(1);
      expect(d.month).toBeLessThanOrEqual(12);
      expect(d.day).toBeGreaterThanOrEqual(1);
      seen.add(`${d.month}-${d.day}`);
    }
    expect(seen.size).toBe(365);
  });

  it('rejects out-of-range indices', () => {
    expect(() => dayOfYearToDate(2000, -1)).toThrow(/outside/);
    expect(() => dayOfYearToDate(2000, 365)).toThrow(/outside/);
  });
});
