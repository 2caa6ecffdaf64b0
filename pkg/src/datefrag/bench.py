"""Benchmark corpus generation: seed questions fanned out over formats.

Each curated seed question carries at least one fully specified date in an
extractable form (ISO, slash, dot, or English month formats).  Expansion
rewrites every date occurrence into each of the language's four format
kinds, converting to the Hijri or Lunar calendar where the kind asks for
it, and regenerates the gold-answer alias set in all formats so scoring
can accept any correct rendering.

Translated seeds arrive as data; nothing here translates text.  Gold
answers that are labels rather than dates (relation tasks) are copied
verbatim.  Answers that embed a date in a longer phrase (timezone tasks,
e.g. "8 PM on 1352-03-01") have only the date substring reformatted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

from .calendars import (GregorianDate, greg_to_hijri, greg_to_lunar,
                        to_gregorian)
from .errors import (NoDateFoundError, OutOfRangeError, SchemaError,
                     UnsupportedLanguageError)
from .formatting import (FORMAT_KINDS, LANGUAGES, Locale, extract_dates,
                         format_date, load_locale, scan_dates)
from .jsonl import read_jsonl, write_jsonl

__all__ = [
    'TASKS', 'SEED_SOURCES', 'SeedQuestion', 'BenchmarkRecord',
    'CorpusReport', 'expand_seed', 'expand_corpus', 'validate_corpus',
    'load_seeds', 'load_records', 'write_records',
]

TASKS = ('arithmetic', 'timezone', 'relation')
SEED_SOURCES = ('tram', 'tot', 'freshbench')


@dataclass(frozen=True)
class SeedQuestion:
    """One curated question with its gold answers, in one language."""

    seed_id: str
    task: str
    language: str
    text: str
    gold: tuple[str, ...]
    source: str

    def __post_init__(self):
        if self.task not in TASKS:
            raise SchemaError(f'unknown task {self.task!r}')
        if self.language not in LANGUAGES:
            raise SchemaError(f'unknown language {self.language!r}')
        if self.source not in SEED_SOURCES:
            raise SchemaError(f'unknown source {self.source!r}')
        if not self.gold:
            raise SchemaError('seed needs at least one gold answer')

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> 'SeedQuestion':
        try:
            return cls(obj['seed_id'], obj['task'], obj['language'],
                       obj['text'], tuple(obj['gold']), obj['source'])
        except KeyError as exc:
            raise SchemaError(f'seed lacks key {exc.args[0]!r}') from exc

    def to_dict(self) -> dict[str, Any]:
        return {'seed_id': self.seed_id, 'task': self.task,
                'language': self.language, 'text': self.text,
                'gold': list(self.gold), 'source': self.source}


@dataclass(frozen=True)
class BenchmarkRecord:
    """One (seed, format) variant ready for model prompting and scoring."""

    record_id: str
    seed_id: str
    task: str
    language: str
    format_kind: str
    calendar: str
    question: str
    gold_aliases: tuple[str, ...]
    provenance: str

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> 'BenchmarkRecord':
        try:
            return cls(obj['record_id'], obj['seed_id'], obj['task'],
                       obj['language'], obj['format'], obj['calendar'],
                       obj['question'], tuple(obj['gold_aliases']),
                       obj['provenance'])
        except KeyError as exc:
            raise SchemaError(f'record lacks key {exc.args[0]!r}') from exc

    def to_dict(self) -> dict[str, Any]:
        return {'record_id': self.record_id, 'seed_id': self.seed_id,
                'task': self.task, 'language': self.language,
                'format': self.format_kind, 'calendar': self.calendar,
                'question': self.question,
                'gold_aliases': list(self.gold_aliases),
                'provenance': self.provenance}


def _convert(date: GregorianDate, calendar: str):
    if calendar == 'hijri':
        return greg_to_hijri(date)
    if calendar == 'lunar':
        return greg_to_lunar(date)
    return date


def _reformat_dates(text: str, kind: str, lang: str, locale: Locale) -> tuple[str, str]:
    """Rewrite every extractable date in ``text`` into the given kind.

    Returns the rewritten text and the calendar system actually used.
    Falls back to the Gregorian textual form when a date cannot exist in
    the kind's calendar (e.g. lunar-table years end at 2100).
    """
    matches = extract_dates(text)
    if not matches:
        raise NoDateFoundError(f'no extractable date in {text!r}')
    template = locale.formats[kind]
    calendar = template.calendar
    out = []
    pos = 0
    for m in matches:
        out.append(text[pos:m.start])
        try:
            out.append(format_date(_convert(m.date, calendar), lang, kind,
                                   locale=locale))
        except OutOfRangeError:
            out.append(format_date(m.date, lang, 'textual', locale=locale))
            calendar = 'gregorian'
        pos = m.end
    out.append(text[pos:])
    return ''.join(out), calendar


def _alias_set(gold: Iterable[str], lang: str, locale: Locale) -> tuple[str, ...]:
    """All format renderings of each gold answer, plus bare ISO, deduplicated.

    Labels without dates pass through verbatim; only date substrings are
    rewritten inside longer answers.
    """
    aliases: list[str] = []

    def add(alias: str) -> None:
        if alias not in aliases:
            aliases.append(alias)

    for answer in gold:
        matches = extract_dates(answer)
        if not matches:
            add(answer)
            continue
        for kind in FORMAT_KINDS:
            replaced, _ = _reformat_dates(answer, kind, lang, locale)
            add(replaced)
        out = []
        pos = 0
        for m in matches:
            out.append(answer[pos:m.start])
            out.append(f'{m.date.year:04d}-{m.date.month:02d}-{m.date.day:02d}')
            pos = m.end
        out.append(answer[pos:])
        add(''.join(out))
    return tuple(aliases)


def expand_seed(seed: SeedQuestion,
                locale: Locale | None = None) -> list[BenchmarkRecord]:
    """Produce the four per-format variants of one seed question."""
    if seed.language not in LANGUAGES:
        raise UnsupportedLanguageError(f'unsupported language {seed.language!r}')
    locale = locale or load_locale(seed.language)
    if not extract_dates(seed.text):
        raise NoDateFoundError(f'seed {seed.seed_id!r} has no extractable date')
    aliases = _alias_set(seed.gold, seed.language, locale)
    records = []
    for kind in FORMAT_KINDS:
        question, calendar = _reformat_dates(seed.text, kind, seed.language,
                                             locale)
        records.append(BenchmarkRecord(
            record_id=f'{seed.seed_id}:{kind}',
            seed_id=seed.seed_id,
            task=seed.task,
            language=seed.language,
            format_kind=kind,
            calendar=calendar,
            question=question,
            gold_aliases=aliases,
            provenance=seed.source,
        ))
    return records


def expand_corpus(seeds: Iterable[SeedQuestion]) -> Iterator[BenchmarkRecord]:
    """Expand seeds in order; per seed the four formats stay adjacent."""
    locales = {lang: load_locale(lang) for lang in LANGUAGES}
    for seed in seeds:
        yield from expand_seed(seed, locales[seed.language])


@dataclass
class CorpusReport:
    """Validation outcome with the offending record ids."""

    total: int = 0
    cell_counts: dict[tuple[str, str, str], int] = field(default_factory=dict)
    count_failures: list[str] = field(default_factory=list)
    alias_failures: list[str] = field(default_factory=list)
    purity_failures: list[str] = field(default_factory=list)
    duplicate_ids: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.count_failures or self.alias_failures
                    or self.purity_failures or self.duplicate_ids)

    def render(self) -> str:
        lines = [f'records: {self.total}',
                 f'cells: {len(self.cell_counts)}']
        for kind, failures in (('count', self.count_failures),
                               ('alias', self.alias_failures),
                               ('purity', self.purity_failures),
                               ('duplicate', self.duplicate_ids)):
            status = 'ok' if not failures else f'{len(failures)} failures'
            lines.append(f'{kind}: {status}')
            lines.extend(f'  {item}' for item in failures[:20])
            if len(failures) > 20:
                lines.append(f'  ... and {len(failures) - 20} more')
        lines.append('PASS' if self.ok else 'FAIL')
        return '\n'.join(lines) + '\n'


_ISO_IN_TEXT = re.compile(r'\d{4}-\d{2}-\d{2}')


def _canonical_dates(text: str, lang: str) -> frozenset[str]:
    langs = (lang, 'en') if lang != 'en' else ('en',)
    found = set()
    for date in scan_dates(text, langs):
        g = to_gregorian(date)
        found.add(f'{g.year:04d}-{g.month:02d}-{g.day:02d}')
    return frozenset(found)


def validate_corpus(records: Iterable[BenchmarkRecord],
                    expected_per_cell: int | None = None) -> CorpusReport:
    """Check counts, alias consistency, and format purity.

    Alias consistency asks that every alias carrying any parseable date
    refer to the same canonical day(s); pure-label aliases are exempt.
    Purity asks that non-ISO variants contain no leftover ISO strings.
    """
    report = CorpusReport()
    seen: set[str] = set()
    for record in records:
        report.total += 1
        if record.record_id in seen:
            report.duplicate_ids.append(record.record_id)
        seen.add(record.record_id)
        cell = (record.task, record.language, record.format_kind)
        report.cell_counts[cell] = report.cell_counts.get(cell, 0) + 1

        canon: frozenset[str] | None = None
        consistent = True
        for alias in record.gold_aliases:
            dates = _canonical_dates(alias, record.language)
            if not dates:
                continue
            if canon is None:
                canon = dates
            elif dates != canon:
                consistent = False
                break
        if not consistent:
            report.alias_failures.append(record.record_id)

        if record.format_kind != 'iso' and _ISO_IN_TEXT.search(record.question):
            report.purity_failures.append(record.record_id)

    if expected_per_cell is not None:
        expected_cells = {(task, lang, kind)
                          for task in TASKS for lang in LANGUAGES
                          for kind in FORMAT_KINDS}
        for cell in sorted(expected_cells | set(report.cell_counts)):
            count = report.cell_counts.get(cell, 0)
            if count != expected_per_cell:
                report.count_failures.append(
                    f'{"/".join(cell)}: {count} != {expected_per_cell}')
    return report


def load_seeds(path: str | Path) -> Iterator[SeedQuestion]:
    for lineno, obj in read_jsonl(path):
        try:
            yield SeedQuestion.from_dict(obj)
        except SchemaError as exc:
            raise SchemaError(exc.message, line=lineno, path=str(path)) from exc


def load_records(path: str | Path) -> Iterator[BenchmarkRecord]:
    for lineno, obj in read_jsonl(path):
        try:
            yield BenchmarkRecord.from_dict(obj)
        except SchemaError as exc:
            raise SchemaError(exc.message, line=lineno, path=str(path)) from exc


def write_records(path: str | Path,
                  records: Iterable[BenchmarkRecord]) -> int:
    return write_jsonl(path, (r.to_dict() for r in records))
