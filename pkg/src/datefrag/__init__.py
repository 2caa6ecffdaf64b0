"""Diagnostics for how subword tokenizers fragment dates across languages.

The package measures the gap between a tokenizer's output and an ideal
semantic segmentation of a formatted date (year/month/day/marker units),
generates multi-format benchmark corpora from seed questions, scores model
outputs deterministically, and probes embedding dumps for linear date
structure. Everything is reachable from the `datefrag` command line tool.
"""

from .calendars import (CalendarDate, GregorianDate, HijriDate, LunarDate,
                        LunarYearTable, ganzhi_index, greg_to_hijri,
                        greg_to_jdn, greg_to_lunar, hijri_is_leap,
                        hijri_to_greg, jdn_to_greg, jdn_to_hijri,
                        lunar_to_greg, to_gregorian)
from .errors import DatefragError
from .formatting import (DateMatch, convert_digits, extract_dates,
                         format_date, load_locale, parse_date, scan_dates)

__version__ = '0.1.0'

__all__ = [
    'CalendarDate', 'DateMatch', 'DatefragError', 'GregorianDate',
    'HijriDate', 'LunarDate', 'LunarYearTable', 'convert_digits',
    'extract_dates', 'format_date', 'ganzhi_index', 'greg_to_hijri',
    'greg_to_jdn', 'greg_to_lunar', 'hijri_is_leap', 'hijri_to_greg',
    'jdn_to_greg', 'jdn_to_hijri', 'load_locale', 'lunar_to_greg',
    'parse_date', 'scan_dates', 'to_gregorian', '__version__',
]
