"""Locale-driven date rendering, parsing and in-text extraction.

Each supported language ships a key=value locale table (data/locales/) that
names its month inventories, its calendar-marker lexemes and a template per
format kind. Templates are plain strings with uppercase placeholders:

    {YYYY} {MM} {DD}   zero-padded numeric fields
    {M} {D}            unpadded numeric fields
    {MONTH} {HMONTH}   Gregorian / Hijri month name
    {ORDDAY}           English ordinal day ("3rd")
    {LYEAR}            spelled-out lunar year ("二零二三")
    {GANZHI}           sexagenary year name ("癸卯")
    {LMONTH} {LDAY}    lunar month / day names ("六", "初九")

The same compiled template drives formatting, parsing and the semantic
segmentation in segmentation.py, so the three can never drift apart.
Formats beyond the four benchmark kinds (iso, numeric, textual, calendar)
are marked aux=true in the locale file; they take part in parsing and
segmentation but are never used to build benchmark variants.

A template's literal text is classified once at compile time: runs that
match one of the locale's marker lexemes become calendar markers, the rest
become delimiters. That classification is what makes "des Jahres" a single
marker unit while ". " stays a delimiter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .calendars import (CalendarDate, GregorianDate, HijriDate, LunarDate,
                        ganzhi_index)
from .errors import (InvalidDateError, OutOfRangeError, SchemaError,
                     UnparseableError, UnsupportedCombinationError,
                     UnsupportedLanguageError)

LANGUAGES = ('en', 'de', 'zh', 'ar', 'ha')
FORMAT_KINDS = ('iso', 'numeric', 'textual', 'calendar')

LRM = '‎'
RLM = '‏'

WESTERN_DIGITS = '0123456789'
EASTERN_DIGITS = '٠١٢٣٤٥٦٧٨٩'
_TO_EASTERN = str.maketrans(WESTERN_DIGITS, EASTERN_DIGITS)
_TO_WESTERN = str.maketrans(EASTERN_DIGITS, WESTERN_DIGITS)

_CN_DIGITS = '零一二三四五六七八九'
_CN_DIGIT_VALUES = {c: i for i, c in enumerate(_CN_DIGITS)}
_CN_DIGIT_VALUES['〇'] = 0

_STEMS = '甲乙丙丁戊己庚辛壬癸'
_BRANCHES = '子丑寅卯辰巳午未申酉戌亥'

_DIGIT_CLASS = '[0-9٠-٩]'


def convert_digits(s: str, script: str) -> str:
    """Rewrite decimal digits into the given script ('western' or 'eastern').

    Non-digit characters pass through untouched, so the conversion is an
    involution on any mixed string.
    """
    if script == 'eastern':
        return s.translate(_TO_EASTERN)
    if script == 'western':
        return s.translate(_TO_WESTERN)
    raise ValueError(f'unknown digit script {script!r}')


def ordinal_en(n: int) -> str:
    if 10 <= n % 100 <= 13:
        suffix = 'th'
    else:
        suffix = {1: 'st', 2: 'nd', 3: 'rd'}.get(n % 10, 'th')
    return f'{n}{suffix}'


def _cn_year(year: int) -> str:
    return ''.join(_CN_DIGITS[int(c)] for c in f'{year:04d}')


def _parse_cn_year(s: str) -> int:
    return int(''.join(str(_CN_DIGIT_VALUES[c]) for c in s))


def _cn_day_name(day: int) -> str:
    if day <= 10:
        return '初' + ('十' if day == 10 else _CN_DIGITS[day])
    if day < 20:
        return '十' + _CN_DIGITS[day - 10]
    if day == 20:
        return '二十'
    if day < 30:
        return '廿' + _CN_DIGITS[day - 20]
    return '三十'


_CN_DAY_NAMES = {_cn_day_name(d): d for d in range(1, 31)}


def ganzhi_name(index: int) -> str:
    return _STEMS[index % 10] + _BRANCHES[index % 12]


_GANZHI_YEARS = {ganzhi_name(ganzhi_index(y)): y for y in range(1984, 2044)}


def _alternation(names) -> str:
    return '|'.join(re.escape(n) for n in sorted(names, key=len, reverse=True))


@dataclass(frozen=True)
class Placeholder:
    token: str
    role: str  # year | month | day
    pattern: str  # regex fragment, built per locale where needed


def _placeholders(locale: 'Locale') -> dict[str, Placeholder]:
    digits = _DIGIT_CLASS
    table = {
        'YYYY': Placeholder('YYYY', 'year', digits + '{3,4}'),
        'MM': Placeholder('MM', 'month', digits + '{1,2}'),
        'DD': Placeholder('DD', 'day', digits + '{1,2}'),
        'M': Placeholder('M', 'month', digits + '{1,2}'),
        'D': Placeholder('D', 'day', digits + '{1,2}'),
        'ORDDAY': Placeholder('ORDDAY', 'day', '[0-9]{1,2}(?:st|nd|rd|th)'),
        'LYEAR': Placeholder('LYEAR', 'year', '[' + _CN_DIGITS + '〇]{4}'),
        'GANZHI': Placeholder('GANZHI', 'year',
                              f'[{_STEMS}][{_BRANCHES}]'),
        'LDAY': Placeholder('LDAY', 'day', _alternation(_CN_DAY_NAMES)),
    }
    if locale.months:
        table['MONTH'] = Placeholder('MONTH', 'month', _alternation(locale.months))
    if locale.hijri_months:
        table['HMONTH'] = Placeholder('HMONTH', 'month',
                                      _alternation(locale.hijri_months))
    if locale.lunar_months:
        table['LMONTH'] = Placeholder(
            'LMONTH', 'month', '闰?(?:' + _alternation(locale.lunar_months) + ')')
    return table


@dataclass(frozen=True)
class TemplatePart:
    """One compiled span of a template: a placeholder or classified literal."""

    kind: str  # 'ph' | 'marker' | 'delimiter'
    text: str = ''  # literal text for marker/delimiter parts
    ph: Placeholder | None = None


class DateTemplate:
    """A compiled (language, format) template.

    Holds the part list, a fullmatch regex with one group per part (used by
    both the parser and the segmenter) and the rendering configuration.
    """

    def __init__(self, name, locale, template, calendar='gregorian',
                 digits='western', lrm=False, aux=False):
        self.name = name
        self.locale = locale
        self.template = template
        self.calendar = calendar
        self.digits = digits
        self.lrm = lrm
        self.aux = aux
        self.parts = self._compile_parts(template, locale)
        if lrm:
            self.parts = ([TemplatePart('delimiter', LRM)] + self.parts
                          + [TemplatePart('delimiter', LRM)])
        body = ''.join(
            f'({p.ph.pattern})' if p.kind == 'ph'
            else '(' + re.escape(p.text) + ('?' if p.text == LRM else '') + ')'
            for p in self.parts)
        self.regex = re.compile(body)

    @staticmethod
    def _compile_parts(template, locale):
        placeholders = _placeholders(locale)
        parts = []
        pos = 0
        for m in re.finditer(r'\{([A-Z_]+)\}', template):
            if m.start() > pos:
                parts.extend(DateTemplate._classify(template[pos:m.start()], locale))
            ph = placeholders.get(m.group(1))
            if ph is None:
                raise SchemaError(f'unknown placeholder {m.group(0)} '
                                  f'in locale {locale.language!r}')
            parts.append(TemplatePart('ph', ph=ph))
            pos = m.end()
        if pos < len(template):
            parts.extend(DateTemplate._classify(template[pos:], locale))
        return parts

    @staticmethod
    def _classify(literal, locale):
        """Split literal text into marker and delimiter parts."""
        for marker in sorted(locale.markers, key=len, reverse=True):
            at = literal.find(marker)
            while at != -1:
                before, after = literal[:at], literal[at + len(marker):]
                # A marker must stand alone: letters may not continue it.
                if ((not before or not before[-1].isalpha())
                        and (not after or not after[0].isalpha())):
                    out = []
                    if before:
                        out.extend(DateTemplate._classify(before, locale))
                    out.append(TemplatePart('marker', marker))
                    if after:
                        out.extend(DateTemplate._classify(after, locale))
                    return out
                at = literal.find(marker, at + 1)
        return [TemplatePart('delimiter', literal)]

    # --- rendering ---

    def format(self, date: CalendarDate) -> str:
        return ''.join(text for _, text in self.render_parts(date))

    def render_parts(self, date: CalendarDate) -> list[tuple[TemplatePart, str]]:
        """Render one ``(part, text)`` pair per compiled part, in order.

        Concatenating the texts reproduces :meth:`format`; the pairing is
        what the segmenter uses to attach spans and roles.
        """
        fields = self._fields(date)
        return [(part,
                 part.text if part.kind != 'ph' else self._render(part.ph, fields))
                for part in self.parts]

    def _fields(self, date):
        if self.calendar == 'gregorian':
            if not isinstance(date, GregorianDate):
                raise UnsupportedCombinationError(
                    f'{self.locale.language}/{self.name} needs a Gregorian date')
            return {'y': date.year, 'm': date.month, 'd': date.day}
        if self.calendar == 'hijri':
            if not isinstance(date, HijriDate):
                raise UnsupportedCombinationError(
                    f'{self.locale.language}/{self.name} needs a Hijri date')
            return {'y': date.year, 'm': date.month, 'd': date.day}
        if not isinstance(date, LunarDate):
            raise UnsupportedCombinationError(
                f'{self.locale.language}/{self.name} needs a lunisolar date')
        return {'y': date.lunar_year, 'm': date.month, 'd': date.day,
                'leap': date.is_leap_month, 'ganzhi': date.ganzhi_index}

    def _render(self, ph, fields):
        token = ph.token
        if token == 'YYYY':
            text = f'{fields["y"]:04d}'
        elif token == 'MM':
            text = f'{fields["m"]:02d}'
        elif token == 'DD':
            text = f'{fields["d"]:02d}'
        elif token == 'M':
            text = str(fields['m'])
        elif token == 'D':
            text = str(fields['d'])
        elif token == 'ORDDAY':
            text = ordinal_en(fields['d'])
        elif token == 'MONTH':
            text = self.locale.months[fields['m'] - 1]
        elif token == 'HMONTH':
            text = self.locale.hijri_months[fields['m'] - 1]
        elif token == 'LYEAR':
            text = _cn_year(fields['y'])
        elif token == 'GANZHI':
            text = ganzhi_name(fields['ganzhi'])
        elif token == 'LMONTH':
            text = (('闰' if fields.get('leap') else '')
                    + self.locale.lunar_months[fields['m'] - 1])
        elif token == 'LDAY':
            text = _cn_day_name(fields['d'])
        else:
            raise AssertionError(f'unhandled placeholder {token}')
        if self.digits == 'eastern':
            text = convert_digits(text, 'eastern')
        return text

    # --- parsing ---

    def parse(self, s: str) -> CalendarDate | None:
        """Parse a full string; None when it does not match this template."""
        m = self.regex.fullmatch(s)
        if m is None:
            return None
        try:
            return self._build_date(m)
        except (InvalidDateError, OutOfRangeError, KeyError, ValueError):
            return None

    def _build_date(self, m):
        fields = {}
        for i, part in enumerate(self.parts, start=1):
            if part.kind != 'ph':
                continue
            fields[part.ph.token] = convert_digits(m.group(i), 'western')
        return self._date_from_fields(fields)

    def _date_from_fields(self, fields):
        if 'LYEAR' in fields or 'GANZHI' in fields:
            if 'LYEAR' in fields:
                year = _parse_cn_year(fields['LYEAR'])
            else:
                year = _GANZHI_YEARS[fields['GANZHI']]
            name = fields['LMONTH']
            leap = name.startswith('闰')
            month = self.locale.lunar_months.index(name.removeprefix('闰')) + 1
            return LunarDate(year, month, _CN_DAY_NAMES[fields['LDAY']],
                             is_leap_month=leap)
        year = int(fields['YYYY'])
        day = None
        month = None
        if 'ORDDAY' in fields:
            day = int(re.sub('[a-z]+$', '', fields['ORDDAY']))
        for token in ('DD', 'D'):
            if token in fields:
                day = int(fields[token])
        if 'MONTH' in fields:
            month = self.locale.months.index(fields['MONTH']) + 1
        if 'HMONTH' in fields:
            month = self.locale.hijri_months.index(fields['HMONTH']) + 1
        numeric_month = None
        for token in ('MM', 'M'):
            if token in fields:
                numeric_month = int(fields[token])
        if self.calendar == 'hijri':
            return HijriDate(year, month if month else numeric_month, day)
        if month is None:
            month = numeric_month
            # Day-first is canonical for the slash/dot numeric form; swap to
            # month-first only when the month slot cannot hold a month.
            if (self.name == 'numeric' and month is not None and month > 12
                    and day is not None and day <= 12):
                month, day = day, month
        return GregorianDate(year, month, day)


class Locale:
    """One language's tables plus its compiled templates."""

    def __init__(self, language, months, hijri_months, lunar_months,
                 markers, format_specs):
        self.language = language
        self.months = months
        self.hijri_months = hijri_months
        self.lunar_months = lunar_months
        self.markers = markers
        self.formats: dict[str, DateTemplate] = {}
        for name, spec in format_specs.items():
            self.formats[name] = DateTemplate(
                name, self, spec['template'],
                calendar=spec.get('calendar', 'gregorian'),
                digits=spec.get('digits', 'western'),
                lrm=spec.get('lrm', 'false') == 'true',
                aux=spec.get('aux', 'false') == 'true')

    @property
    def benchmark_formats(self):
        return [self.formats[k] for k in FORMAT_KINDS if k in self.formats]

    @classmethod
    def from_file(cls, path) -> 'Locale':
        with open(path, encoding='utf-8') as fh:
            return cls._parse(fh.read(), path)

    @classmethod
    def _parse(cls, text, path) -> 'Locale':
        values = {}
        format_specs: dict[str, dict] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if '=' not in line:
                raise SchemaError('expected key=value', lineno, path)
            key, _, value = line.partition('=')
            key = key.strip()
            if key.startswith('format.'):
                try:
                    _, name, attr = key.split('.', 2)
                except ValueError as exc:
                    raise SchemaError(f'bad format key {key!r}', lineno, path) from exc
                format_specs.setdefault(name, {})[attr] = value
            else:
                values[key] = value
        language = values.get('language')
        if not language:
            raise SchemaError('missing language key', None, path)

        def split(key):
            return tuple(v for v in values.get(key, '').split(',') if v)

        for name, spec in format_specs.items():
            if 'template' not in spec:
                raise SchemaError(f'format {name!r} lacks a template', None, path)
        return cls(language, split('months'), split('hijri_months'),
                   split('lunar_months'), split('markers'), format_specs)


@lru_cache(maxsize=None)
def _packaged_locale(lang: str) -> Locale:
    ref = resources.files('datefrag.data').joinpath(f'locales/{lang}.txt')
    try:
        text = ref.read_text(encoding='utf-8')
    except FileNotFoundError:
        raise UnsupportedLanguageError(f'no locale table for {lang!r}') from None
    return Locale._parse(text, f'locales/{lang}.txt')


def load_locale(lang: str, path=None) -> Locale:
    """Load a locale table, from a file path when given (extension point)."""
    if path is not None:
        return Locale.from_file(path)
    return _packaged_locale(lang)


def format_date(date: CalendarDate, lang: str, kind: str,
                locale: Locale | None = None) -> str:
    locale = locale or load_locale(lang)
    template = locale.formats.get(kind)
    if template is None:
        raise UnsupportedCombinationError(f'{lang} has no format {kind!r}')
    return template.format(date)


_PLAIN_ISO = re.compile(r'(\d{4})-(\d{2})-(\d{2})')


def parse_date(s: str, lang: str, locale: Locale | None = None) -> CalendarDate:
    """Parse a complete date string in any of the language's formats.

    Falls back to bare ISO (with or without directional marks) so ISO
    answers are always readable regardless of language.
    """
    locale = locale or load_locale(lang)
    for template in locale.formats.values():
        date = template.parse(s)
        if date is not None:
            return date
    stripped = s.strip().strip(LRM + RLM)
    m = _PLAIN_ISO.fullmatch(stripped)
    if m:
        try:
            return GregorianDate(*(int(g) for g in m.groups()))
        except (InvalidDateError, OutOfRangeError):
            pass
    raise UnparseableError(f'no {lang} date format matches {s!r}')


@dataclass(frozen=True)
class DateMatch:
    """A date found inside running text. Spans are in characters and bytes."""

    start: int
    end: int
    byte_start: int
    byte_end: int
    date: CalendarDate


_MONTHS_EN = ('January', 'February', 'March', 'April', 'May', 'June', 'July',
              'August', 'September', 'October', 'November', 'December')
_MONTH_ALT = _alternation(_MONTHS_EN)

# The extraction inventory: ISO, day-first numeric (slash and dot),
# month-name-first and day-first textual forms.
_EXTRACT_PATTERNS = (
    re.compile(r'(?<!\d)(\d{4})-(\d{2})-(\d{2})(?!\d)'),
    re.compile(r'(?<![\d/.])(\d{1,2})/(\d{1,2})/(\d{3,4})(?![\d/.])'),
    re.compile(r'(?<![\d/.])(\d{1,2})\.(\d{1,2})\.(\d{3,4})(?![\d/.])'),
    re.compile(rf'(?<![A-Za-z])({_MONTH_ALT}) (\d{{1,2}}), (\d{{3,4}})(?!\d)'),
    re.compile(rf'(?<!\d)(\d{{1,2}}) ({_MONTH_ALT}),? (\d{{3,4}})(?!\d)'),
)


def _numeric_day_month(a: int, b: int, year: int) -> GregorianDate | None:
    """Resolve a day/month pair, day first unless that reading is impossible."""
    for day, month in ((a, b), (b, a)) if b > 12 else ((a, b),):
        try:
            return GregorianDate(year, month, day)
        except (InvalidDateError, OutOfRangeError):
            continue
    return None


def _byte_span(text: str, start: int, end: int) -> tuple[int, int]:
    head = len(text[:start].encode('utf-8'))
    return head, head + len(text[start:end].encode('utf-8'))


def extract_dates(text: str, months: tuple[str, ...] = _MONTHS_EN) -> list[DateMatch]:
    """Find Gregorian dates in running text, left to right, non-overlapping.

    Recognizes ISO, DD/MM/YYYY, DD.MM.YYYY, "Month DD, YYYY" and
    "DD Month YYYY". Month-name forms use English names unless another
    inventory is supplied. Invalid candidates (months above 12 in both
    readings, day 31 in a 30-day month) are skipped, not reported.
    """
    patterns = list(_EXTRACT_PATTERNS)
    if months != _MONTHS_EN:
        alt = _alternation(months)
        patterns[3] = re.compile(rf'({alt}) (\d{{1,2}}), (\d{{3,4}})(?!\d)')
        patterns[4] = re.compile(rf'(?<!\d)(\d{{1,2}}) ({alt}),? (\d{{3,4}})(?!\d)')
    candidates = []
    for idx, pattern in enumerate(patterns):
        for m in pattern.finditer(text):
            date = None
            g = m.groups()
            try:
                if idx == 0:
                    date = GregorianDate(int(g[0]), int(g[1]), int(g[2]))
                elif idx in (1, 2):
                    date = _numeric_day_month(int(g[0]), int(g[1]), int(g[2]))
                elif idx == 3:
                    date = GregorianDate(int(g[2]), months.index(g[0]) + 1, int(g[1]))
                else:
                    date = GregorianDate(int(g[2]), months.index(g[1]) + 1, int(g[0]))
            except (InvalidDateError, OutOfRangeError, ValueError):
                date = None
            if date is not None:
                candidates.append((m.start(), -(m.end() - m.start()), m.end(), date))
    candidates.sort(key=lambda item: item[:3])
    out = []
    cursor = 0
    for start, _, end, date in candidates:
        if start < cursor:
            continue
        bs, be = _byte_span(text, start, end)
        out.append(DateMatch(start, end, bs, be, date))
        cursor = end
    return out


def scan_dates(text: str, langs) -> list[CalendarDate]:
    """Find dates of any supported calendar inside free-form text.

    Used by the scorer: every template of every given language is searched
    (not just fullmatched), plus the plain extraction inventory. Overlapping
    hits collapse leftmost-longest. Returns dates in reading order.
    """
    spans: list[tuple[int, int, int, CalendarDate]] = []
    for lang in langs:
        locale = load_locale(lang)
        for template in locale.formats.values():
            pattern = template.regex.pattern
            guarded = re.compile(rf'(?<!{_DIGIT_CLASS}){pattern}(?!{_DIGIT_CLASS})')
            for m in guarded.finditer(text):
                try:
                    date = template._build_date(m)
                except (InvalidDateError, OutOfRangeError, KeyError, ValueError):
                    continue
                spans.append((m.start(), -(m.end() - m.start()), m.end(), date))
    for match in extract_dates(text):
        spans.append((match.start, -(match.end - match.start), match.end, match.date))
    spans.sort(key=lambda item: item[:3])
    out = []
    cursor = 0
    for start, _, end, date in spans:
        if start < cursor:
            continue
        out.append(date)
        cursor = end
    return out
