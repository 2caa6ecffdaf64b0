"""Date fragmentation ratio: features, scoring, weight calibration, reports.

The ratio compares a model tokenization of a formatted date against the
reference segmentation of the same string.  Four features feed a weighted
sum F in [0, 1]:

* ``split``: some year/month/day/marker unit has its opaque bytes spread
  over two or more tokens.
* ``delimiter_lost``: some non-whitespace delimiter byte shares its token
  with bytes of a non-delimiter unit.
* ``token_inflation``: relative growth of the effective token count over
  the effective unit count, clipped to [0, 1].
* ``divergence``: 1 − sqrt(N_b/N), how far the effective token count N has
  pulled away from the effective unit count N_b (0 when N ≤ N_b).

Effective means "has at least one byte outside whitespace and directional
marks".  Transparent bytes never count: a tokenizer that merely absorbs a
space into a neighbouring token is not penalized, and splitting whitespace
achieves nothing.  These conventions make the reference segmentation score
exactly 0 against itself and make F non-decreasing whenever a unit's
tokens are cut strictly further apart.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (DegenerateDesignError, InputMismatchError, SchemaError)
from .jsonl import write_text_atomic
from .segmentation import SemanticSegmentation, UnitRole
from .tokenizers import ModelTokenization

__all__ = [
    'FragFeatures', 'MdfrWeights', 'CalibrationResult', 'ReportRow',
    'REPORT_CELLS', 'compute_features', 'mdfr_score', 'mdfr_for',
    'nnls', 'calibrate_weights', 'load_ratings', 'aggregate_report',
]


@dataclass(frozen=True)
class FragFeatures:
    """Feature vector comparing one tokenization to one segmentation."""

    split: int
    delimiter_lost: int
    token_inflation: float
    divergence: float
    n_tokens: int = 0
    n_units: int = 0

    def as_vector(self) -> tuple[float, float, float, float]:
        return (float(self.split), float(self.delimiter_lost),
                self.token_inflation, self.divergence)


@dataclass(frozen=True)
class MdfrWeights:
    """Non-negative feature weights summing to one."""

    a1: float = 0.2
    a2: float = 0.2
    a3: float = 0.1
    a4: float = 0.5

    def __post_init__(self):
        vec = self.as_vector()
        if any(a < 0 for a in vec):
            raise ValueError(f'weights must be non-negative, got {vec}')
        if abs(sum(vec) - 1.0) > 1e-9:
            raise ValueError(f'weights must sum to 1, got {sum(vec)!r}')

    def as_vector(self) -> tuple[float, float, float, float]:
        return (self.a1, self.a2, self.a3, self.a4)

    def to_json(self, residual_rmse: float | None = None) -> str:
        obj: dict[str, Any] = {'a1': self.a1, 'a2': self.a2,
                               'a3': self.a3, 'a4': self.a4}
        if residual_rmse is not None:
            obj['residual_rmse'] = residual_rmse
        return json.dumps(obj, indent=2) + '\n'

    @classmethod
    def from_json(cls, text: str) -> 'MdfrWeights':
        obj = json.loads(text)
        try:
            return cls(obj['a1'], obj['a2'], obj['a3'], obj['a4'])
        except KeyError as exc:
            raise SchemaError(f'weights JSON lacks key {exc.args[0]!r}') from exc


def _opaque_byte_flags(text: str) -> list[bool]:
    """Per-byte mask: True where the byte belongs to a non-transparent char."""
    flags: list[bool] = []
    for char in text:
        opaque = not (char.isspace() or char in ('‎', '‏'))
        flags.extend([opaque] * len(char.encode('utf-8')))
    return flags


def compute_features(seg: SemanticSegmentation,
                     tok: ModelTokenization) -> FragFeatures:
    """Compare a tokenization to the reference segmentation of one string."""
    if seg.text != tok.text:
        raise InputMismatchError(
            f'segmentation is over {seg.text!r} but tokenization is over '
            f'{tok.text!r}')
    opaque = _opaque_byte_flags(seg.text)
    n_bytes = len(opaque)

    # Which token covers each byte.
    token_of = [0] * n_bytes
    for index, token in enumerate(tok.tokens):
        for b in range(token.start, token.end):
            token_of[b] = index
    effective_tokens = {token_of[b] for b in range(n_bytes) if opaque[b]}
    n_tokens = len(effective_tokens)

    n_units = 0
    split = 0
    delimiter_units = []
    # Tokens that cover at least one opaque byte of a non-delimiter unit.
    content_tokens: set[int] = set()
    for unit in seg.units:
        opaque_bytes = [b for b in range(unit.byte_start, unit.byte_end)
                        if opaque[b]]
        if not opaque_bytes:
            continue
        n_units += 1
        if unit.role is UnitRole.DELIMITER:
            delimiter_units.append(opaque_bytes)
            continue
        covering = {token_of[b] for b in opaque_bytes}
        content_tokens.update(covering)
        if len(covering) >= 2:
            split = 1
    delimiter_lost = 0
    for opaque_bytes in delimiter_units:
        if any(token_of[b] in content_tokens for b in opaque_bytes):
            delimiter_lost = 1
            break

    if n_units == 0 or n_tokens == 0:
        raise InputMismatchError('nothing but whitespace to compare')
    inflation = min(1.0, max(0.0, (n_tokens - n_units) / n_units))
    divergence = 1.0 - math.sqrt(n_units / n_tokens) if n_tokens > n_units else 0.0
    return FragFeatures(split, delimiter_lost, inflation, divergence,
                        n_tokens=n_tokens, n_units=n_units)


def mdfr_score(features: FragFeatures,
               weights: MdfrWeights | None = None) -> float:
    weights = weights or MdfrWeights()
    return float(sum(w * f for w, f in zip(weights.as_vector(),
                                           features.as_vector())))


def mdfr_for(seg: SemanticSegmentation, tok: ModelTokenization,
             weights: MdfrWeights | None = None) -> float:
    return mdfr_score(compute_features(seg, tok), weights)


# --- weight calibration ---


def nnls(design: np.ndarray, target: np.ndarray,
         max_iter: int | None = None) -> np.ndarray:
    """Least squares with non-negativity, by active-set iteration.

    Classic Lawson-Hanson: grow the passive set by the most promising
    coordinate, solve unconstrained on it, and step back toward the last
    feasible point whenever the sub-solution leaves the feasible region.
    """
    design = np.asarray(design, dtype=float)
    target = np.asarray(target, dtype=float)
    m, n = design.shape
    if target.shape != (m,):
        raise ValueError('design and target shapes disagree')
    max_iter = max_iter or 3 * n
    passive = np.zeros(n, dtype=bool)
    x = np.zeros(n)
    tol = 10.0 * np.finfo(float).eps * np.linalg.norm(design, 1) * max(m, n)
    outer = 0
    gradient = design.T @ (target - design @ x)
    while (~passive).any() and (gradient[~passive] > tol).any():
        outer += 1
        if outer > max_iter:
            break
        candidate = np.where(~passive, gradient, -np.inf)
        passive[int(np.argmax(candidate))] = True
        while True:
            trial = np.zeros(n)
            solution, *_ = np.linalg.lstsq(design[:, passive], target,
                                           rcond=None)
            trial[passive] = solution
            if (trial[passive] > tol).all():
                x = trial
                break
            blocking = passive & (trial <= tol)
            ratios = x[blocking] / (x[blocking] - trial[blocking])
            alpha = float(np.min(ratios))
            x = x + alpha * (trial - x)
            passive &= x > tol
        gradient = design.T @ (target - design @ x)
    return np.clip(x, 0.0, None)


@dataclass(frozen=True)
class CalibrationResult:
    weights: MdfrWeights
    residual_rmse: float
    n_items: int


def calibrate_weights(
        rows: Sequence[tuple[FragFeatures | Sequence[float], float]],
) -> CalibrationResult:
    """Fit weights to mean human ratings already rescaled to [0, 1].

    Solves non-negative least squares of the ratings on the four features
    and renormalizes the solution to sum to one.  The reported RMSE is for
    the raw (pre-normalization) fit.
    """
    design = np.array([
        features.as_vector() if isinstance(features, FragFeatures)
        else tuple(features)
        for features, _ in rows], dtype=float)
    target = np.array([rating for _, rating in rows], dtype=float)
    if len(rows) < 8:
        raise DegenerateDesignError(
            f'need at least 8 rated items, got {len(rows)}')
    if np.linalg.matrix_rank(design) < 4:
        raise DegenerateDesignError('features do not vary independently')
    raw = nnls(design, target)
    total = float(raw.sum())
    if total <= 0:
        raise DegenerateDesignError('all fitted weights are zero')
    residual = design @ raw - target
    rmse = float(np.sqrt(np.mean(residual ** 2)))
    weights = MdfrWeights(*(float(w / total) for w in raw))
    return CalibrationResult(weights, rmse, len(rows))


def load_ratings(path: str | Path) -> dict[str, list[int]]:
    """Read an ``item_id,annotator_id,rating`` CSV into per-item ratings."""
    import csv

    path = Path(path)
    ratings: dict[str, list[int]] = {}
    with path.open(encoding='utf-8', newline='') as handle:
        reader = csv.DictReader(handle)
        required = {'item_id', 'annotator_id', 'rating'}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise SchemaError(
                f'ratings CSV must have columns {sorted(required)}',
                path=str(path))
        for lineno, row in enumerate(reader, start=2):
            try:
                rating = int(row['rating'])
            except (TypeError, ValueError) as exc:
                raise SchemaError(f'bad rating {row["rating"]!r}',
                                  line=lineno, path=str(path)) from exc
            if not 1 <= rating <= 5:
                raise SchemaError(f'rating {rating} outside 1-5',
                                  line=lineno, path=str(path))
            ratings.setdefault(row['item_id'], []).append(rating)
    return ratings


def rescale_ratings(ratings: dict[str, list[int]]) -> dict[str, float]:
    """Mean per item after mapping the 1-5 scale onto [0, 1]."""
    return {item: sum((r - 1) / 4 for r in values) / len(values)
            for item, values in ratings.items()}


# --- aggregation ---

# Report cells in fixed column order: calendar system, then language.
REPORT_CELLS: tuple[tuple[str, str], ...] = (
    ('gregorian', 'ar'), ('gregorian', 'zh'), ('gregorian', 'en'),
    ('gregorian', 'de'), ('gregorian', 'ha'),
    ('lunar', 'zh'),
    ('hijri', 'ar'), ('hijri', 'en'), ('hijri', 'ha'),
)


@dataclass(frozen=True)
class ReportRow:
    tokenizer_id: str
    cells: tuple[float | None, ...]  # aligned with REPORT_CELLS

    @property
    def mean(self) -> float | None:
        present = [c for c in self.cells if c is not None]
        return sum(present) / len(present) if present else None


def aggregate_report(
        scores: Iterable[tuple[str, str, str, float]]) -> list[ReportRow]:
    """Mean score per tokenizer and (calendar, language) cell.

    ``scores`` holds ``(language, calendar, tokenizer_id, value)`` tuples.
    Rows come back sorted by tokenizer id; cells without data stay None.
    """
    sums: dict[str, dict[tuple[str, str], list[float]]] = {}
    for language, calendar, tokenizer_id, value in scores:
        cell = (calendar, language)
        if cell not in REPORT_CELLS:
            raise SchemaError(f'no report cell for calendar={calendar!r}, '
                              f'language={language!r}')
        sums.setdefault(tokenizer_id, {}).setdefault(cell, []).append(value)
    rows = []
    for tokenizer_id in sorted(sums):
        cells = tuple(
            (sum(values) / len(values)) if (values := sums[tokenizer_id].get(cell))
            else None
            for cell in REPORT_CELLS)
        rows.append(ReportRow(tokenizer_id, cells))
    return rows


def report_csv(rows: Sequence[ReportRow]) -> str:
    """Render report rows as CSV text with one column per cell."""
    header = ['tokenizer_id'] + [f'{cal}_{lang}' for cal, lang in REPORT_CELLS]
    header.append('mean')
    lines = [','.join(header)]
    for row in rows:
        cells = ['' if c is None else f'{c:.4f}' for c in row.cells]
        mean = row.mean
        cells.append('' if mean is None else f'{mean:.4f}')
        lines.append(','.join([row.tokenizer_id] + cells))
    return '\n'.join(lines) + '\n'


def write_weights(path: str | Path, result: CalibrationResult) -> None:
    write_text_atomic(path, result.weights.to_json(result.residual_rmse))
