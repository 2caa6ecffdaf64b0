"""Reference segmentation of a formatted date into semantic units.

The segmenter reuses the compiled template that can parse the string, so
every date string in a supported format decomposes losslessly into
year/month/day values, calendar markers, and the delimiters between them,
each with character and byte spans.  Units made only of whitespace or
directional marks are *transparent*: they carry no meaning a tokenizer
could destroy, and the fragmentation metric ignores them on both sides of
the comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Iterator

from .errors import (SchemaError, SegmentationFailureError,
                     UnsupportedCombinationError)
from .formatting import LRM, RLM, Locale, load_locale
from .jsonl import read_jsonl, write_jsonl
from .tokenizers import ModelTokenization, Token

__all__ = [
    'UnitRole', 'SemanticUnit', 'SemanticSegmentation', 'baseline_segment',
    'baseline_unit_count', 'segmentation_to_tokenization',
    'is_transparent_text', 'load_segmentations', 'write_segmentations',
]


def is_transparent_text(text: str) -> bool:
    """True when the text has no bytes a tokenizer could meaningfully cut."""
    return all(c.isspace() or c in (LRM, RLM) for c in text)


class UnitRole(str, Enum):
    YEAR = 'year'
    MONTH = 'month'
    DAY = 'day'
    CALENDAR_MARKER = 'calendar_marker'
    DELIMITER = 'delimiter'


@dataclass(frozen=True)
class SemanticUnit:
    """One meaningful span of a formatted date."""

    text: str
    role: UnitRole
    start: int
    end: int
    byte_start: int
    byte_end: int

    @property
    def is_effective(self) -> bool:
        return not is_transparent_text(self.text)


@dataclass(frozen=True)
class SemanticSegmentation:
    """A complete, gapless decomposition of one formatted date string."""

    text: str
    language: str
    format_kind: str
    calendar: str
    units: tuple[SemanticUnit, ...]

    def __post_init__(self):
        pos = byte_pos = 0
        for unit in self.units:
            if unit.start != pos or unit.byte_start != byte_pos:
                raise SchemaError(
                    f'unit {unit.text!r} starts at {unit.start}/{unit.byte_start}, '
                    f'expected {pos}/{byte_pos}')
            if self.text[unit.start:unit.end] != unit.text:
                raise SchemaError(f'unit text {unit.text!r} does not match '
                                  f'span [{unit.start}, {unit.end})')
            if unit.byte_end - unit.byte_start != len(unit.text.encode('utf-8')):
                raise SchemaError(f'unit {unit.text!r} has a wrong byte width')
            pos, byte_pos = unit.end, unit.byte_end
        if pos != len(self.text):
            raise SchemaError(
                f'units cover {pos} of {len(self.text)} characters')

    @property
    def effective_units(self) -> tuple[SemanticUnit, ...]:
        return tuple(u for u in self.units if u.is_effective)

    def to_dict(self) -> dict[str, Any]:
        return {
            'text': self.text,
            'language': self.language,
            'format': self.format_kind,
            'calendar': self.calendar,
            'units': [
                {'text': u.text, 'role': u.role.value, 'start': u.start,
                 'end': u.end, 'byte_start': u.byte_start,
                 'byte_end': u.byte_end}
                for u in self.units
            ],
        }

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> 'SemanticSegmentation':
        for key in ('text', 'language', 'format', 'calendar', 'units'):
            if key not in obj:
                raise SchemaError(f'missing key {key!r}')
        units = []
        for i, entry in enumerate(obj['units']):
            try:
                units.append(SemanticUnit(
                    text=entry['text'], role=UnitRole(entry['role']),
                    start=entry['start'], end=entry['end'],
                    byte_start=entry['byte_start'],
                    byte_end=entry['byte_end']))
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError(f'bad unit {i}: {exc}') from exc
        return cls(obj['text'], obj['language'], obj['format'],
                   obj['calendar'], tuple(units))


_PLACEHOLDER_ROLES = {
    'year': UnitRole.YEAR,
    'month': UnitRole.MONTH,
    'day': UnitRole.DAY,
}


def baseline_segment(text: str, lang: str, kind: str,
                     locale: Locale | None = None) -> SemanticSegmentation:
    """Decompose a date string against its (language, format) template.

    The compiled template carries one regex group per part, so a full
    match yields the units directly: one per placeholder, marker, or
    delimiter, in order.  Multi-word markers stay single units.
    """
    locale = locale or load_locale(lang)
    template = locale.formats.get(kind)
    if template is None:
        raise UnsupportedCombinationError(f'{lang} has no format {kind!r}')
    match = template.regex.fullmatch(text)
    if match is None:
        raise SegmentationFailureError(
            f'{text!r} does not match the {lang}/{kind} template')
    units = []
    byte_pos = 0
    for index, part in enumerate(template.parts, start=1):
        piece = match.group(index)
        if not piece:
            continue  # optional directional mark absent
        if part.kind == 'ph':
            role = _PLACEHOLDER_ROLES[part.ph.role]
        elif part.kind == 'marker':
            role = UnitRole.CALENDAR_MARKER
        else:
            role = UnitRole.DELIMITER
        start, end = match.span(index)
        width = len(piece.encode('utf-8'))
        units.append(SemanticUnit(piece, role, start, end,
                                  byte_pos, byte_pos + width))
        byte_pos += width
    return SemanticSegmentation(text, lang, kind, template.calendar,
                                tuple(units))


def baseline_unit_count(segmentation: SemanticSegmentation) -> int:
    """Number of units that carry content: everything except whitespace."""
    return len(segmentation.effective_units)


def segmentation_to_tokenization(
        segmentation: SemanticSegmentation,
        tokenizer_id: str = 'reference') -> ModelTokenization:
    """Treat each semantic unit as one token (the ideal tokenizer)."""
    tokens = tuple(Token(u.byte_start, u.byte_end, u.text)
                   for u in segmentation.units)
    return ModelTokenization(segmentation.text, tokenizer_id, tokens,
                             language=segmentation.language,
                             format_kind=segmentation.format_kind)


def load_segmentations(path) -> Iterator[SemanticSegmentation]:
    for lineno, obj in read_jsonl(path):
        try:
            yield SemanticSegmentation.from_dict(obj)
        except SchemaError as exc:
            raise SchemaError(exc.message, line=lineno, path=str(path)) from exc


def write_segmentations(path, segmentations: Iterable[SemanticSegmentation]) -> int:
    return write_jsonl(path, (s.to_dict() for s in segmentations))
