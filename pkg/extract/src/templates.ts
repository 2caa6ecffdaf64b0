/**
 * Declarative sentence templates and date renderings per language.
 *
 * The wording is data, not behaviour: edit freely. Every template embeds
 * exactly one `{date}` placeholder; the three renderings (iso, slash,
 * long) are the probe surfaces whose hidden states get dumped.
 */

export type FormatKind = 'iso' | 'slash' | 'long';

export const FORMAT_KINDS: readonly FormatKind[] = ['iso', 'slash', 'long'];

export interface PlainDate {
  year: number;
  month: number; // 1-12
  day: number; // 1-31
}

const TEMPLATES: Record<string, string> = {
  en: 'The date is {date}.',
  de: 'Das Datum ist {date}.',
  zh: '日期是{date}。',
  ar: 'التاريخ هو {date}.',
  ha: 'Kwanan wata shine {date}.',
};

const MONTHS: Record<string, readonly string[]> = {
  en: ['January', 'February', 'March', 'April', 'May', 'June', 'July',
    'August', 'September', 'October', 'November', 'December'],
  de: ['Januar', 'Februar', 'März', 'April', 'Mai', 'Juni', 'Juli',
    'August', 'September', 'Oktober', 'November', 'Dezember'],
  ar: ['يناير', 'فبراير', 'مارس', 'أبريل', 'مايو', 'يونيو', 'يوليو',
    'أغسطس', 'سبتمبر', 'أكتوبر', 'نوفمبر', 'ديسمبر'],
  ha: ['Janairu', 'Fabrairu', 'Maris', 'Afrilu', 'Mayu', 'Yuni', 'Yuli',
    'Agusta', 'Satumba', 'Oktoba', 'Nuwamba', 'Disamba'],
};

export function supportedLanguages(): string[] {
  return Object.keys(TEMPLATES);
}

function pad(n: number, width: number): string {
  return String(n).padStart(width, '0');
}

export function isoDate(date: PlainDate): string {
  return `${pad(date.year, 4)}-${pad(date.month, 2)}-${pad(date.day, 2)}`;
}

/** Render one date in one surface format for one language. */
export function renderDate(date: PlainDate, language: string,
  format: FormatKind): string {
  switch (format) {
    case 'iso':
      return isoDate(date);
    case 'slash':
      return `${pad(date.day, 2)}/${pad(date.month, 2)}/${pad(date.year, 4)}`;
    case 'long': {
      if (language === 'zh') {
        return `${date.year}年${date.month}月${date.day}日`;
      }
      const months = MONTHS[language];
      if (!months) {
        throw new Error(`no long format for language '${language}'`);
      }
      return `${date.day} ${months[date.month - 1]} ${date.year}`;
    }
  }
}

/** The full declarative sentence the model sees. */
export function renderSentence(date: PlainDate, language: string,
  format: FormatKind): string {
  const template = TEMPLATES[language];
  if (!template) {
    throw new Error(`no template for language '${language}'`);
  }
  return template.replace('{date}', renderDate(date, language, format));
}

const MONTH_LENGTHS = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

/**
 * Day-of-year index (0-364) to month/day. Index 365 days in every year;
 * February 29 simply never gets sampled, which keeps every draw valid
 * without leap-year branching.
 */
export function dayOfYearToDate(year: number, dayIndex: number): PlainDate {
  if (dayIndex < 0 || dayIndex >= 365) {
    throw new Error(`day index ${dayIndex} outside 0-364`);
  }
  let remaining = dayIndex;
  for (let month = 0; month < 12; month++) {
    const length = MONTH_LENGTHS[month]!;
    if (remaining < length) {
      return { year, month: month + 1, day: remaining + 1 };
    }
    remaining -= length;
  }
  throw new Error('unreachable');
}
