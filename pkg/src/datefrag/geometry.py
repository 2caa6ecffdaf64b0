"""Geometry of date embeddings: year paths, linear probes, PCA.

Works over dumps of hidden-state vectors, one per (language, format, date,
sample, layer).  Three questions get answered here:

* Do mean year embeddings march along a line?  ``line_segments`` and
  ``path_direction`` measure the step vectors and how parallel they are.
* Can a linear readout recover the year / month / day?  ``fit_linear_probe``
  reports in-sample and 5-fold cross-validated R^2, because train/eval
  protocols differ between reasonable reimplementations.
* What does the point cloud look like in 2-D?  ``pca_project``.

All computations are plain numpy and deterministic for a given seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .calendars import GregorianDate
from .errors import (DegenerateTargetsError, GapInYearsError,
                     InvalidDateError, MissingSamplesError, SchemaError)
from .jsonl import read_jsonl, write_csv, write_jsonl

__all__ = [
    'EMBED_FORMATS', 'SAMPLES_PER_YEAR', 'EmbeddingRecord', 'EmbeddingDump',
    'ProbeResult', 'PathSummary', 'mean_year_embedding', 'line_segments',
    'path_direction', 'fit_linear_probe', 'pca_project', 'probe_dump',
    'linearity_summary', 'load_embeddings', 'write_probe_csv',
    'write_path_csv', 'write_pca_csv',
]

EMBED_FORMATS = ('iso', 'slash', 'long')
SAMPLES_PER_YEAR = 5
YEAR_RANGE = (1990, 2024)


@dataclass(frozen=True)
class EmbeddingRecord:
    """One hidden-state vector for one formatted date at one layer."""

    language: str
    format_kind: str
    date: GregorianDate
    sample_idx: int
    layer: int
    vector: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.format_kind not in EMBED_FORMATS:
            raise SchemaError(f'unknown embedding format {self.format_kind!r}')
        if self.sample_idx < 0:
            raise SchemaError('sample index must be >= 0')
        if self.layer < 0:
            raise SchemaError('layer must be >= 0')
        if not self.vector:
            raise SchemaError('empty vector')

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> 'EmbeddingRecord':
        try:
            date = GregorianDate.from_isoformat(str(data['date']))
            vector = tuple(float(x) for x in data['vector'])
            record = cls(language=str(data['language']),
                         format_kind=str(data['format']),
                         date=date,
                         sample_idx=int(data['sample']),
                         layer=int(data['layer']),
                         vector=vector)
        except KeyError as exc:
            raise SchemaError(f'missing embedding field {exc.args[0]!r}')
        except (InvalidDateError, ValueError) as exc:
            raise SchemaError(str(exc))
        if int(data.get('dim', len(vector))) != len(vector):
            raise SchemaError(f'dim {data["dim"]} does not match '
                              f'vector length {len(vector)}')
        return record

    def to_dict(self) -> dict[str, Any]:
        return {
            'language': self.language,
            'format': self.format_kind,
            'date': self.date.isoformat(),
            'sample': self.sample_idx,
            'layer': self.layer,
            'dim': len(self.vector),
            'vector': list(self.vector),
        }


class EmbeddingDump:
    """All records of one extraction run, indexed for the analyses below.

    Enforces a single vector dimension across the dump and exposes the
    distinct languages / formats / layers / years it contains.
    """

    def __init__(self, records: Sequence[EmbeddingRecord]) -> None:
        if not records:
            raise SchemaError('embedding dump is empty')
        dims = {len(r.vector) for r in records}
        if len(dims) > 1:
            raise SchemaError(f'mixed vector dimensions in dump: {sorted(dims)}')
        self.records = tuple(records)
        self.dim = dims.pop()
        self.languages = tuple(sorted({r.language for r in records}))
        self.formats = tuple(sorted({r.format_kind for r in records}))
        self.layers = tuple(sorted({r.layer for r in records}))
        self.years = tuple(sorted({r.date.year for r in records}))
        self._by_cell: dict[tuple[str, str, int, int], list[EmbeddingRecord]] = {}
        for r in records:
            key = (r.language, r.format_kind, r.layer, r.date.year)
            self._by_cell.setdefault(key, []).append(r)

    def cell(self, language: str, format_kind: str, layer: int,
             year: int) -> list[EmbeddingRecord]:
        return self._by_cell.get((language, format_kind, layer, year), [])

    def select(self, language: str, format_kind: str,
               layer: int) -> list[EmbeddingRecord]:
        out = []
        for year in self.years:
            out.extend(self.cell(language, format_kind, layer, year))
        return out


@dataclass(frozen=True)
class ProbeResult:
    """Linear readout quality for one calendar component at one layer."""

    component: str
    language: str
    format_kind: str
    layer: int
    r2_in: float
    r2_cv: float
    weight_norm: float
    n_samples: int
    n_folds: int = 5


@dataclass(frozen=True)
class PathSummary:
    """Year-to-year step statistics for one (language, format, layer)."""

    language: str
    format_kind: str
    layer: int
    n_segments: int
    mean_step_norm: float
    straightness: float


def mean_year_embedding(records: Sequence[EmbeddingRecord],
                        samples_per_year: int = SAMPLES_PER_YEAR) -> np.ndarray:
    """Average the vectors for one (language, format, year, layer) cell.

    Requires exactly ``samples_per_year`` records; a short or overfull cell
    means the dump is broken, not that we should silently renormalize.
    """
    if len(records) != samples_per_year:
        raise MissingSamplesError(
            f'expected {samples_per_year} samples, got {len(records)}')
    stack = np.array([r.vector for r in records], dtype=float)
    return stack.mean(axis=0)


def year_means(dump: EmbeddingDump, language: str, format_kind: str,
               layer: int,
               samples_per_year: int = SAMPLES_PER_YEAR
               ) -> dict[int, np.ndarray]:
    """Mean embedding per year for one (language, format, layer)."""
    means = {}
    for year in dump.years:
        cell = dump.cell(language, format_kind, layer, year)
        if not cell:
            raise MissingSamplesError(
                f'no samples for {language}/{format_kind} layer {layer} '
                f'year {year}')
        means[year] = mean_year_embedding(cell, samples_per_year)
    return means


def line_segments(means_by_year: Mapping[int, np.ndarray]) -> list[np.ndarray]:
    """Difference vectors between consecutive year means.

    The telescoping sum of the result equals last minus first, exactly up
    to accumulation error.
    """
    years = sorted(means_by_year)
    if len(years) < 2:
        raise GapInYearsError('need at least two years to form segments')
    for a, b in zip(years, years[1:]):
        if b != a + 1:
            raise GapInYearsError(f'years {a} and {b} are not consecutive')
    return [np.asarray(means_by_year[b], dtype=float)
            - np.asarray(means_by_year[a], dtype=float)
            for a, b in zip(years, years[1:])]


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    # Zero vectors contribute 0 by convention: no direction, no agreement.
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def path_direction(segments: Sequence[np.ndarray]
                   ) -> tuple[np.ndarray, float]:
    """Mean step vector and how parallel the individual steps are to it.

    Straightness is the mean cosine between each segment and the mean step,
    1.0 for a perfect line, 0.0 when steps cancel out.
    """
    if not segments:
        raise GapInYearsError('need at least one segment')
    stack = np.array([np.asarray(s, dtype=float) for s in segments])
    delta = stack.mean(axis=0)
    straightness = float(np.mean([_cosine(s, delta) for s in stack]))
    return delta, straightness


def _ridge_lambda(x_centered: np.ndarray) -> float:
    d = x_centered.shape[1]
    return 1e-6 * float(np.trace(x_centered.T @ x_centered)) / d


def _fit_weights(x: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, float]:
    """Least squares with intercept; ridge fallback on singular designs."""
    x_mean = x.mean(axis=0)
    c_mean = float(c.mean())
    xc = x - x_mean
    cc = c - c_mean
    n, d = x.shape
    if n > d and np.linalg.matrix_rank(xc) == d:
        w, *_ = np.linalg.lstsq(xc, cc, rcond=None)
    else:
        lam = _ridge_lambda(xc)
        if lam == 0.0:
            lam = 1e-12
        w = np.linalg.solve(xc.T @ xc + lam * np.eye(d), xc.T @ cc)
    b = c_mean - float(x_mean @ w)
    return w, b


def _r_squared(c: np.ndarray, pred: np.ndarray) -> float:
    ss_tot = float(np.sum((c - c.mean()) ** 2))
    ss_res = float(np.sum((c - pred) ** 2))
    return 1.0 - ss_res / ss_tot


def fit_linear_probe(vectors: Sequence[Sequence[float]],
                     targets: Sequence[float],
                     *,
                     component: str = 'Year',
                     language: str = '',
                     format_kind: str = '',
                     layer: int = 0,
                     n_folds: int = 5,
                     seed: int = 0) -> ProbeResult:
    """Fit target = W.x + b and report in-sample plus k-fold R^2.

    The k-fold value pools held-out predictions over a seeded shuffle, so
    a probe that memorizes noise scores near or below zero there.  Designs
    with fewer samples than dimensions get a small ridge term; the same
    happens inside every fold.
    """
    x = np.array(vectors, dtype=float)
    c = np.array(targets, dtype=float)
    if x.ndim != 2 or x.shape[0] != c.shape[0]:
        raise SchemaError('vectors and targets must align')
    if x.shape[0] < 2:
        raise DegenerateTargetsError('need at least two observations')
    if float(np.var(c)) == 0.0:
        raise DegenerateTargetsError('targets carry no variance')

    w, b = _fit_weights(x, c)
    r2_in = _r_squared(c, x @ w + b)

    n = x.shape[0]
    folds = min(n_folds, n)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    pred = np.empty(n, dtype=float)
    for part in np.array_split(order, folds):
        mask = np.ones(n, dtype=bool)
        mask[part] = False
        if float(np.var(c[mask])) == 0.0:
            # A constant training fold predicts its constant.
            pred[part] = c[mask].mean()
            continue
        wf, bf = _fit_weights(x[mask], c[mask])
        pred[part] = x[part] @ wf + bf
    r2_cv = _r_squared(c, pred)

    return ProbeResult(component=component, language=language,
                       format_kind=format_kind, layer=layer,
                       r2_in=r2_in, r2_cv=r2_cv,
                       weight_norm=float(np.linalg.norm(w)),
                       n_samples=n, n_folds=folds)


def pca_project(vectors: Sequence[Sequence[float]], k: int = 2
                ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top-k principal components of a point cloud.

    Returns (coordinates n x k, components k x d, explained variance
    ratios).  Uses whichever of the covariance or Gram matrix is smaller,
    so wide matrices (few points, many dimensions) stay cheap.  Sign
    convention: the first nonzero coordinate of each component is positive.
    """
    x = np.array(vectors, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2:
        raise SchemaError('need at least two points for a projection')
    n, d = x.shape
    k = min(k, n - 1, d)
    xc = x - x.mean(axis=0)
    total = float(np.sum(xc * xc)) / (n - 1)

    if d <= n:
        cov = (xc.T @ xc) / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1][:k]
        values = eigvals[order]
        components = eigvecs[:, order].T
    else:
        gram = (xc @ xc.T) / (n - 1)
        eigvals, eigvecs = np.linalg.eigh(gram)
        order = np.argsort(eigvals)[::-1][:k]
        values = eigvals[order]
        components = np.empty((k, d))
        for i, (val, idx) in enumerate(zip(values, order)):
            if val <= 0:
                components[i] = 0.0
                continue
            # Left singular vector u maps to right one via X^T u / s.
            components[i] = xc.T @ eigvecs[:, idx] / math.sqrt(val * (n - 1))

    for i in range(k):
        row = components[i]
        nonzero = np.nonzero(np.abs(row) > 1e-12)[0]
        if nonzero.size and row[nonzero[0]] < 0:
            components[i] = -row
    coords = xc @ components.T
    ratios = np.clip(values, 0.0, None) / total if total > 0 else np.zeros(k)
    return coords, components, ratios


COMPONENTS = ('Year', 'Month', 'Day')


def probe_dump(dump: EmbeddingDump,
               samples_per_year: int = SAMPLES_PER_YEAR,
               seed: int = 0) -> list[ProbeResult]:
    """All probes for a dump: Year on mean embeddings, Month/Day per date.

    Averaging the K samples per year sharpens the year signal but erases
    month and day entirely, so those components must see raw records.
    """
    results = []
    for language in dump.languages:
        for format_kind in dump.formats:
            for layer in dump.layers:
                means = year_means(dump, language, format_kind, layer,
                                   samples_per_year)
                years = sorted(means)
                results.append(fit_linear_probe(
                    [means[y] for y in years], [float(y) for y in years],
                    component='Year', language=language,
                    format_kind=format_kind, layer=layer, seed=seed))
                cell = dump.select(language, format_kind, layer)
                for component, value in (('Month', lambda r: r.date.month),
                                         ('Day', lambda r: r.date.day)):
                    targets = [float(value(r)) for r in cell]
                    if len(set(targets)) < 2:
                        continue
                    results.append(fit_linear_probe(
                        [r.vector for r in cell], targets,
                        component=component, language=language,
                        format_kind=format_kind, layer=layer, seed=seed))
    return results


def path_summaries(dump: EmbeddingDump,
                   samples_per_year: int = SAMPLES_PER_YEAR
                   ) -> list[PathSummary]:
    out = []
    for language in dump.languages:
        for format_kind in dump.formats:
            for layer in dump.layers:
                means = year_means(dump, language, format_kind, layer,
                                   samples_per_year)
                segments = line_segments(means)
                delta, straightness = path_direction(segments)
                out.append(PathSummary(
                    language=language, format_kind=format_kind, layer=layer,
                    n_segments=len(segments),
                    mean_step_norm=float(np.linalg.norm(delta)),
                    straightness=straightness))
    return out


@dataclass(frozen=True)
class LinearityRow:
    """Best layer per (language, format, component), by one evaluation."""

    language: str
    format_kind: str
    component: str
    layer: int
    r_squared: float


def linearity_summary(results: Sequence[ProbeResult],
                      evaluation: str = 'in_sample'
                      ) -> tuple[list[LinearityRow], dict[tuple[str, str], float]]:
    """Max-over-layers R^2 per component, plus the per-cell mean.

    ``evaluation`` picks which R^2 drives the summary ('in_sample' or
    'k_fold'); both live in the probe CSV either way.
    """
    if evaluation not in ('in_sample', 'k_fold'):
        raise SchemaError(f'unknown evaluation {evaluation!r}')
    value = (lambda r: r.r2_in) if evaluation == 'in_sample' else (
        lambda r: r.r2_cv)
    best: dict[tuple[str, str, str], ProbeResult] = {}
    for r in results:
        key = (r.language, r.format_kind, r.component)
        if key not in best or value(r) > value(best[key]):
            best[key] = r
    rows = [LinearityRow(language=lang, format_kind=fmt, component=comp,
                         layer=best[(lang, fmt, comp)].layer,
                         r_squared=value(best[(lang, fmt, comp)]))
            for lang, fmt, comp in sorted(best)]
    overall: dict[tuple[str, str], float] = {}
    cells: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        cells.setdefault((row.language, row.format_kind), []).append(
            row.r_squared)
    for cell, values in cells.items():
        overall[cell] = sum(values) / len(values)
    return rows, overall


def load_embeddings(path: str | Path) -> EmbeddingDump:
    records = []
    for lineno, data in read_jsonl(path):
        try:
            records.append(EmbeddingRecord.from_dict(data))
        except SchemaError as exc:
            raise SchemaError(exc.message, line=lineno, path=str(path))
    return EmbeddingDump(records)


def write_embeddings(path: str | Path,
                     records: Iterable[EmbeddingRecord]) -> int:
    return write_jsonl(path, (r.to_dict() for r in records))


def write_probe_csv(path: str | Path, results: Sequence[ProbeResult]) -> None:
    rows = [(r.language, r.format_kind, r.component, r.layer,
             f'{r.r2_in:.6f}', f'{r.r2_cv:.6f}') for r in results]
    write_csv(path, ('language', 'format', 'component', 'layer', 'r2_in',
                     'r2_cv'), rows)


def write_path_csv(path: str | Path, summaries: Sequence[PathSummary]) -> None:
    rows = [(s.language, s.format_kind, s.layer, s.n_segments,
             f'{s.mean_step_norm:.6f}', f'{s.straightness:.6f}')
            for s in summaries]
    write_csv(path, ('language', 'format', 'layer', 'n_segments',
                     'mean_step_norm', 'straightness'), rows)


def write_pca_csv(path: str | Path, dump: EmbeddingDump, k: int = 2,
                  samples_per_year: int = SAMPLES_PER_YEAR) -> None:
    """2-D coordinates of every year mean, for external plotting."""
    rows = []
    for language in dump.languages:
        for format_kind in dump.formats:
            for layer in dump.layers:
                means = year_means(dump, language, format_kind, layer,
                                   samples_per_year)
                years = sorted(means)
                coords, _, ratios = pca_project(
                    [means[y] for y in years], k)
                for year, point in zip(years, coords):
                    rows.append((language, format_kind, layer, year)
                                + tuple(f'{v:.6f}' for v in point)
                                + tuple(f'{v:.6f}' for v in ratios))
    header = (('language', 'format', 'layer', 'year')
              + tuple(f'pc{i + 1}' for i in range(k))
              + tuple(f'evr{i + 1}' for i in range(k)))
    write_csv(path, header, rows)
