"""Deterministic scoring of model outputs against gold aliases.

A response is CORRECT when it verbatim-matches a gold alias (after
whitespace, case, digit-script, and directional-mark normalization), when
any date it contains resolves to the same day as a gold alias, or when it
states the gold relation label.  It is NOT_ATTEMPTED when it contains no
recognizable date or label at all (refusal phrases are reported as the
reason).  Everything else is INCORRECT.

This is a strict, reproducible stand-in for judge-based evaluation:
hedged or semantically implied answers that a human judge might accept
score INCORRECT here, so absolute accuracies are comparable only within
runs of this scorer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Iterator

from .bench import BenchmarkRecord
from .calendars import to_gregorian
from .errors import SchemaError, UnknownRecordError
from .formatting import LANGUAGES, LRM, RLM, convert_digits, scan_dates
from .jsonl import read_jsonl, write_csv

__all__ = [
    'CORRECT', 'INCORRECT', 'NOT_ATTEMPTED', 'Prediction', 'Verdict',
    'normalize_answer', 'score', 'score_predictions', 'accuracy_table',
    'AccuracyRow', 'load_predictions', 'write_verdicts',
]

CORRECT = 'CORRECT'
INCORRECT = 'INCORRECT'
NOT_ATTEMPTED = 'NOT_ATTEMPTED'

# Table column order for accuracy reports.
ACCURACY_LANGUAGES = ('ar', 'zh', 'en', 'de', 'ha')


@dataclass(frozen=True)
class Prediction:
    record_id: str
    raw_output: str

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> 'Prediction':
        try:
            return cls(obj['record_id'], obj['raw_output'])
        except KeyError as exc:
            raise SchemaError(f'prediction lacks key {exc.args[0]!r}') from exc


@dataclass(frozen=True)
class Verdict:
    record_id: str
    label: str
    matched_alias: str | None = None
    reason: str | None = None

    def __post_init__(self):
        if (self.matched_alias is not None) != (self.label == CORRECT):
            raise ValueError('matched_alias accompanies CORRECT only')


def normalize_answer(s: str) -> str:
    """Casefold, collapse whitespace, westernize digits, drop LRM/RLM."""
    s = convert_digits(s, 'western')
    s = s.replace(LRM, '').replace(RLM, '')
    return ' '.join(s.casefold().split())


_WORDS = re.compile(r'[^\W\d_]+', re.UNICODE)


def _word_sequence(label: str) -> tuple[str, ...]:
    return tuple(_WORDS.findall(normalize_answer(label)))


def _contains_sequence(haystack: tuple[str, ...],
                       needle: tuple[str, ...]) -> bool:
    if not needle or len(needle) > len(haystack):
        return False
    return any(haystack[i:i + len(needle)] == needle
               for i in range(len(haystack) - len(needle) + 1))


@lru_cache(maxsize=1)
def _relation_labels() -> tuple[str, ...]:
    text = resources.files('datefrag.data').joinpath(
        'relation_labels.txt').read_text(encoding='utf-8')
    return tuple(line.strip() for line in text.splitlines()
                 if line.strip() and not line.startswith('#'))


@lru_cache(maxsize=1)
def _refusal_phrases() -> dict[str, tuple[str, ...]]:
    text = resources.files('datefrag.data').joinpath(
        'refusals.txt').read_text(encoding='utf-8')
    table: dict[str, list[str]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith('#'):
            continue
        lang, sep, phrase = line.partition('\t')
        if not sep or lang not in LANGUAGES:
            raise SchemaError('expected <language>\\t<phrase>',
                              line=lineno, path='refusals.txt')
        table.setdefault(lang, []).append(normalize_answer(phrase))
    return {lang: tuple(phrases) for lang, phrases in table.items()}


def _canonical_dates(text: str, language: str) -> frozenset[str]:
    langs = (language, 'en') if language != 'en' else ('en',)
    found = set()
    for date in scan_dates(text, langs):
        g = to_gregorian(date)
        found.add(f'{g.year:04d}-{g.month:02d}-{g.day:02d}')
    return frozenset(found)


def _is_refusal(normalized: str, language: str) -> bool:
    phrases = _refusal_phrases()
    pool = phrases.get(language, ()) + (phrases.get('en', ())
                                        if language != 'en' else ())
    return any(phrase in normalized for phrase in pool)


def score(prediction: Prediction, record: BenchmarkRecord) -> Verdict:
    """Classify one model output against one benchmark record."""
    normalized = normalize_answer(prediction.raw_output)
    if not normalized:
        return Verdict(prediction.record_id, NOT_ATTEMPTED, reason='empty')

    for alias in record.gold_aliases:
        if normalize_answer(alias) == normalized:
            return Verdict(prediction.record_id, CORRECT, matched_alias=alias)

    found_dates = _canonical_dates(prediction.raw_output, record.language)
    alias_dates = {alias: _canonical_dates(alias, record.language)
                   for alias in record.gold_aliases}
    if found_dates:
        for alias, dates in alias_dates.items():
            if dates & found_dates:
                return Verdict(prediction.record_id, CORRECT,
                               matched_alias=alias)

    words = _word_sequence(prediction.raw_output)
    gold_labels = [alias for alias, dates in alias_dates.items() if not dates]
    for alias in gold_labels:
        if _contains_sequence(words, _word_sequence(alias)):
            return Verdict(prediction.record_id, CORRECT, matched_alias=alias)
    found_label = any(_contains_sequence(words, _word_sequence(label))
                      for label in _relation_labels())

    if found_dates or found_label:
        return Verdict(prediction.record_id, INCORRECT)
    reason = ('refusal' if _is_refusal(normalized, record.language)
              else 'no_answer')
    return Verdict(prediction.record_id, NOT_ATTEMPTED, reason=reason)


def score_predictions(predictions: Iterable[Prediction],
                      records: Iterable[BenchmarkRecord]) -> list[Verdict]:
    by_id = {record.record_id: record for record in records}
    verdicts = []
    for prediction in predictions:
        record = by_id.get(prediction.record_id)
        if record is None:
            raise UnknownRecordError(prediction.record_id)
        verdicts.append(score(prediction, record))
    return verdicts


@dataclass(frozen=True)
class AccuracyRow:
    model_id: str
    by_language: dict[str, float | None]
    average: float | None
    warnings: tuple[str, ...]


def accuracy_table(verdicts_by_model: dict[str, Iterable[Verdict]],
                   records: Iterable[BenchmarkRecord]) -> list[AccuracyRow]:
    """Accuracy per model and language, macro-averaged over tasks.

    A language cell is the unweighted mean of its per-task accuracies;
    tasks with no verdicts are skipped with a warning so partial runs
    still produce comparable numbers.
    """
    info = {record.record_id: (record.language, record.task)
            for record in records}
    rows = []
    for model_id in sorted(verdicts_by_model):
        tallies: dict[tuple[str, str], list[int]] = {}
        for verdict in verdicts_by_model[model_id]:
            if verdict.record_id not in info:
                raise UnknownRecordError(verdict.record_id)
            language, task = info[verdict.record_id]
            tallies.setdefault((language, task), []).append(
                1 if verdict.label == CORRECT else 0)
        by_language: dict[str, float | None] = {}
        warnings = []
        for language in ACCURACY_LANGUAGES:
            cells = []
            for task in ('arithmetic', 'timezone', 'relation'):
                outcomes = tallies.get((language, task))
                if outcomes:
                    cells.append(100.0 * sum(outcomes) / len(outcomes))
                else:
                    warnings.append(f'{language}/{task}: no verdicts')
            by_language[language] = (sum(cells) / len(cells)) if cells else None
        present = [v for v in by_language.values() if v is not None]
        average = sum(present) / len(present) if present else None
        rows.append(AccuracyRow(model_id, by_language, average,
                                tuple(warnings)))
    return rows


def accuracy_csv(rows: Iterable[AccuracyRow]) -> str:
    header = ['model'] + list(ACCURACY_LANGUAGES) + ['average']
    lines = [','.join(header)]
    for row in rows:
        cells = [row.model_id]
        for language in ACCURACY_LANGUAGES:
            value = row.by_language.get(language)
            cells.append('' if value is None else f'{value:.1f}')
        cells.append('' if row.average is None else f'{row.average:.1f}')
        lines.append(','.join(cells))
    return '\n'.join(lines) + '\n'


def load_predictions(path: str | Path) -> Iterator[Prediction]:
    for lineno, obj in read_jsonl(path):
        try:
            yield Prediction.from_dict(obj)
        except SchemaError as exc:
            raise SchemaError(exc.message, line=lineno, path=str(path)) from exc


def write_verdicts(path: str | Path, verdicts: Iterable[Verdict]) -> int:
    return write_csv(path, ('record_id', 'label', 'matched_alias'),
                     ((v.record_id, v.label, v.matched_alias or '')
                      for v in verdicts))
