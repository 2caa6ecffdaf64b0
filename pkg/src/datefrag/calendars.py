"""Calendar types and conversions between Gregorian, tabular Hijri and
Chinese lunisolar dates.

All conversions pivot through the Julian day number (JDN), so adding a
calendar means writing exactly two functions against a single integer
timeline. The Gregorian calendar is proleptic: dates before the 1582
reform are extrapolated backward rather than switched to Julian.

The Hijri converter is the arithmetic civil (tabular) calendar: 30-year
cycles of 10631 days with leap years where ((11*y + 14) mod 30) < 11 and
epoch 1 Muharram 1 AH = JDN 1948440 (Friday, 19 July 622 proleptic
Gregorian). Observational calendars such as Umm al-Qura differ from it by
up to about two days for some months; this converter trades that error for
a closed form that round-trips exactly.

The Chinese lunisolar calendar has no closed form at all, so it is table
driven: data/lunar_years.txt carries, for every lunar year 1900-2100, the
Gregorian New Year date, the leap month number (0 = none) and the ordered
month lengths. See scripts/build_lunar_table.py for provenance.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from importlib import resources

from .errors import InvalidDateError, OutOfRangeError, SchemaError

_GREGORIAN_MONTH_DAYS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)

# Cumulative day-of-year offsets of the first day of each Hijri month
# (months alternate 30/29; month 12 gains a day in leap years).
_HIJRI_MONTH_STARTS = tuple(-(-59 * (m - 1) // 2) for m in range(1, 13))

HIJRI_EPOCH_JDN = 1948440

LUNAR_TABLE_FIRST_YEAR = 1900
LUNAR_TABLE_LAST_YEAR = 2100


def is_gregorian_leap(year: int) -> bool:
    return year % 4 == 0 and (year % 100 != 0 or year % 400 == 0)


def gregorian_month_length(year: int, month: int) -> int:
    if month == 2 and is_gregorian_leap(year):
        return 29
    return _GREGORIAN_MONTH_DAYS[month - 1]


@dataclass(frozen=True, order=True)
class GregorianDate:
    """A proleptic Gregorian calendar day. Years 1-3000."""

    year: int
    month: int
    day: int

    def __post_init__(self):
        if not 1 <= self.year <= 3000:
            raise OutOfRangeError(f'year {self.year} outside 1-3000')
        if not 1 <= self.month <= 12:
            raise InvalidDateError(f'month {self.month} outside 1-12')
        if not 1 <= self.day <= gregorian_month_length(self.year, self.month):
            raise InvalidDateError(
                f'{self.year:04d}-{self.month:02d}-{self.day:02d} does not exist')

    def isoformat(self) -> str:
        return f'{self.year:04d}-{self.month:02d}-{self.day:02d}'

    @classmethod
    def from_isoformat(cls, s: str) -> 'GregorianDate':
        parts = s.split('-')
        if len(parts) != 3:
            raise InvalidDateError(f'not an ISO date: {s!r}')
        try:
            y, m, d = (int(p) for p in parts)
        except ValueError as exc:
            raise InvalidDateError(f'not an ISO date: {s!r}') from exc
        return cls(y, m, d)


@dataclass(frozen=True, order=True)
class HijriDate:
    """A day of the tabular civil Islamic calendar."""

    year: int
    month: int
    day: int

    def __post_init__(self):
        if self.year < 1:
            raise OutOfRangeError(f'Hijri year {self.year} before 1 AH')
        if not 1 <= self.month <= 12:
            raise InvalidDateError(f'month {self.month} outside 1-12')
        if not 1 <= self.day <= hijri_month_length(self.year, self.month):
            raise InvalidDateError(
                f'Hijri {self.year}-{self.month:02d}-{self.day:02d} does not exist')


@dataclass(frozen=True)
class LunarDate:
    """A day of the Chinese lunisolar calendar.

    `lunar_year` is the year whose New Year starts it (so late January
    Gregorian dates usually belong to the previous lunar year). The
    sexagenary (ganzhi) index is derived, never stored independently.
    """

    lunar_year: int
    month: int
    day: int
    is_leap_month: bool = False
    ganzhi_index: int = field(init=False)

    def __post_init__(self):
        entry = _lunar_table().entry(self.lunar_year)
        if not 1 <= self.month <= 12:
            raise InvalidDateError(f'lunar month {self.month} outside 1-12')
        if self.is_leap_month and entry.leap_month != self.month:
            raise InvalidDateError(
                f'lunar year {self.lunar_year} has no leap month {self.month}')
        length = entry.month_length(self.month, self.is_leap_month)
        if not 1 <= self.day <= length:
            raise InvalidDateError(
                f'lunar {self.lunar_year} month {self.month} has {length} days')
        object.__setattr__(self, 'ganzhi_index', ganzhi_index(self.lunar_year))


CalendarDate = GregorianDate | HijriDate | LunarDate


def ganzhi_index(lunar_year: int) -> int:
    """Position of a year in the sexagenary cycle (0 = jiazi)."""
    return (lunar_year - 4) % 60


def greg_to_jdn(d: GregorianDate) -> int:
    """Julian day number of a proleptic Gregorian date."""
    a = (14 - d.month) // 12
    y = d.year + 4800 - a
    m = d.month + 12 * a - 3
    return d.day + (153 * m + 2) // 5 + 365 * y + y // 4 - y // 100 + y // 400 - 32045


def jdn_to_greg(jdn: int) -> GregorianDate:
    a = jdn + 32044
    b = (4 * a + 3) // 146097
    c = a - 146097 * b // 4
    d = (4 * c + 3) // 1461
    e = c - 1461 * d // 4
    m = (5 * e + 2) // 153
    day = e - (153 * m + 2) // 5 + 1
    month = m + 3 - 12 * (m // 10)
    year = 100 * b + d - 4800 + m // 10
    return GregorianDate(year, month, day)


def hijri_is_leap(year: int) -> bool:
    """Tabular civil leap rule: 11 leap years per 30-year cycle."""
    return (11 * year + 14) % 30 < 11


def hijri_year_length(year: int) -> int:
    return 355 if hijri_is_leap(year) else 354


def hijri_month_length(year: int, month: int) -> int:
    if month == 12:
        return 30 if hijri_is_leap(year) else 29
    return 30 if month % 2 == 1 else 29


def hijri_to_jdn(h: HijriDate) -> int:
    return (h.day + _HIJRI_MONTH_STARTS[h.month - 1] + (h.year - 1) * 354
            + (3 + 11 * h.year) // 30 + HIJRI_EPOCH_JDN - 1)


def _hijri_year_start_jdn(year: int) -> int:
    return (year - 1) * 354 + (3 + 11 * year) // 30 + HIJRI_EPOCH_JDN


def jdn_to_hijri(jdn: int) -> HijriDate:
    if jdn < HIJRI_EPOCH_JDN:
        raise OutOfRangeError('date precedes 1 Muharram 1 AH')
    # Days per year average 10631/30; the estimate is off by at most one.
    year = max(1, (30 * (jdn - HIJRI_EPOCH_JDN) + 10646) // 10631)
    while jdn < _hijri_year_start_jdn(year):
        year -= 1
    while jdn >= _hijri_year_start_jdn(year + 1):
        year += 1
    doy = jdn - _hijri_year_start_jdn(year)  # zero based
    month = bisect.bisect_right(_HIJRI_MONTH_STARTS, doy)
    day = doy - _HIJRI_MONTH_STARTS[month - 1] + 1
    return HijriDate(year, month, day)


def greg_to_hijri(d: GregorianDate) -> HijriDate:
    return jdn_to_hijri(greg_to_jdn(d))


def hijri_to_greg(h: HijriDate) -> GregorianDate:
    return jdn_to_greg(hijri_to_jdn(h))


@dataclass(frozen=True)
class LunarYearEntry:
    """Decoded row of the lunar table: one lunisolar year."""

    lunar_year: int
    new_year_jdn: int
    leap_month: int
    month_lengths: tuple[int, ...]  # leap month, when present, in sequence

    def month_length(self, month: int, is_leap: bool) -> int:
        return self.month_lengths[self._month_index(month, is_leap)]

    def _month_index(self, month: int, is_leap: bool) -> int:
        """Position of (month, is_leap) in the year's month sequence."""
        idx = month - 1
        if self.leap_month and (month > self.leap_month or is_leap):
            idx += 1
        return idx

    def month_start_offset(self, month: int, is_leap: bool) -> int:
        return sum(self.month_lengths[:self._month_index(month, is_leap)])

    @property
    def total_days(self) -> int:
        return sum(self.month_lengths)


class LunarYearTable:
    """Lunisolar year data 1900-2100 loaded from the packaged data file."""

    def __init__(self, entries: list[LunarYearEntry]):
        self.entries = entries
        self.first_year = entries[0].lunar_year
        self.last_year = entries[-1].lunar_year
        self._starts = [e.new_year_jdn for e in entries]

    @classmethod
    def from_file(cls, path) -> 'LunarYearTable':
        with open(path, encoding='utf-8') as fh:
            return cls._parse(fh.read().splitlines(), path)

    @classmethod
    def _parse(cls, lines, path) -> 'LunarYearTable':
        entries = []
        year = LUNAR_TABLE_FIRST_YEAR
        for lineno, line in enumerate(lines, start=1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            parts = line.split(';')
            if len(parts) != 3:
                raise SchemaError('expected <iso>;<leap>;<lengths>', lineno, path)
            try:
                new_year = GregorianDate.from_isoformat(parts[0])
                leap = int(parts[1])
                lengths = tuple(int(p) for p in parts[2].split(','))
            except (ValueError, InvalidDateError) as exc:
                raise SchemaError(str(exc), lineno, path) from exc
            if not 0 <= leap <= 12:
                raise SchemaError(f'leap month {leap} outside 0-12', lineno, path)
            if len(lengths) != (13 if leap else 12):
                raise SchemaError(f'{len(lengths)} months for leap={leap}', lineno, path)
            if any(n not in (29, 30) for n in lengths):
                raise SchemaError('month lengths must be 29 or 30', lineno, path)
            if not 353 <= sum(lengths) <= 385:
                raise SchemaError(f'year of {sum(lengths)} days', lineno, path)
            entries.append(LunarYearEntry(year, greg_to_jdn(new_year), leap, lengths))
            year += 1
        if not entries:
            raise SchemaError('empty lunar table', None, path)
        for prev, cur in zip(entries, entries[1:]):
            if prev.new_year_jdn + prev.total_days != cur.new_year_jdn:
                raise SchemaError(
                    f'year {prev.lunar_year} lengths disagree with the next New Year')
        return cls(entries)

    def entry(self, lunar_year: int) -> LunarYearEntry:
        if not self.first_year <= lunar_year <= self.last_year:
            raise OutOfRangeError(
                f'lunar year {lunar_year} outside table range '
                f'{self.first_year}-{self.last_year}')
        return self.entries[lunar_year - self.first_year]


_DEFAULT_TABLE = None


def _lunar_table() -> LunarYearTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        ref = resources.files('datefrag.data').joinpath('lunar_years.txt')
        _DEFAULT_TABLE = LunarYearTable._parse(
            ref.read_text(encoding='utf-8').splitlines(), 'lunar_years.txt')
    return _DEFAULT_TABLE


def greg_to_lunar(d: GregorianDate, table: LunarYearTable | None = None) -> LunarDate:
    table = table or _lunar_table()
    jdn = greg_to_jdn(d)
    if jdn < table.entries[0].new_year_jdn:
        raise OutOfRangeError(f'{d.isoformat()} precedes the lunar table')
    idx = bisect.bisect_right(table._starts, jdn) - 1
    entry = table.entries[idx]
    offset = jdn - entry.new_year_jdn
    if offset >= entry.total_days:
        raise OutOfRangeError(f'{d.isoformat()} beyond the lunar table')
    cursor = 0
    for seq, length in enumerate(entry.month_lengths):
        if offset < cursor + length:
            if entry.leap_month and seq == entry.leap_month:
                month, is_leap = entry.leap_month, True
            elif entry.leap_month and seq > entry.leap_month:
                month, is_leap = seq, False
            else:
                month, is_leap = seq + 1, False
            return LunarDate(entry.lunar_year, month, offset - cursor + 1, is_leap)
        cursor += length
    raise AssertionError('unreachable: offset checked against total_days')


def lunar_to_greg(l: LunarDate, table: LunarYearTable | None = None) -> GregorianDate:
    table = table or _lunar_table()
    entry = table.entry(l.lunar_year)
    if l.is_leap_month and entry.leap_month != l.month:
        raise InvalidDateError(
            f'lunar year {l.lunar_year} has no leap month {l.month}')
    if l.day > entry.month_length(l.month, l.is_leap_month):
        raise InvalidDateError(
            f'lunar {l.lunar_year}-{l.month} has fewer than {l.day} days')
    jdn = entry.new_year_jdn + entry.month_start_offset(l.month, l.is_leap_month) + l.day - 1
    return jdn_to_greg(jdn)


def to_gregorian(date: CalendarDate) -> GregorianDate:
    """Pivot any supported calendar date onto the Gregorian calendar."""
    if isinstance(date, GregorianDate):
        return date
    if isinstance(date, HijriDate):
        return hijri_to_greg(date)
    return lunar_to_greg(date)
