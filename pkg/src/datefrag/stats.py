"""Correlation, z-scoring, logistic regression, and rater agreement.

The headline analysis regresses per-question correctness on z-scored
fragmentation, z-scored linearity, and a low-resource indicator with the
full three-way interaction.  A true crossed random-intercepts model is out
of scope; this module fits plain fixed-effects logistic regression (with
optional model dummies) and says so loudly in its report output, because
the standard errors are anti-conservative compared to the mixed model.

Everything is numpy plus closed-form formulas; no statistical libraries.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (DegenerateDesignError, DegenerateVarianceError,
                     InsufficientDataError, SchemaError,
                     SeparationDetectedError, UnsupportedLanguageError)
from .jsonl import write_text_atomic

__all__ = [
    'RESOURCE_LEVELS', 'AnalysisRow', 'RegressionResult', 'resource_level',
    'pearson', 'spearman', 'zscore', 'fe_logistic', 'krippendorff_alpha',
    'load_analysis_rows', 'write_analysis_rows', 'write_regression_csv',
]

# The resource split used throughout the analysis.
RESOURCE_LEVELS = {'en': 'high', 'de': 'high', 'zh': 'high',
                   'ar': 'low', 'ha': 'low'}

REGRESSION_NOTE = (
    'fixed-effects approximation: crossed random intercepts for question '
    'and model are replaced by optional model dummies; standard errors '
    'are likely anti-conservative')


def resource_level(language: str) -> str:
    try:
        return RESOURCE_LEVELS[language]
    except KeyError:
        raise UnsupportedLanguageError(
            f'no resource level defined for {language!r}')


@dataclass(frozen=True)
class AnalysisRow:
    """One (model, question) observation for the regression."""

    model_id: str
    question_id: str
    language: str
    resource: str
    mdfr: float
    linearity: float
    correct: int

    def __post_init__(self) -> None:
        if self.resource not in ('high', 'low'):
            raise SchemaError(f'resource must be high or low, '
                              f'got {self.resource!r}')
        if self.language in RESOURCE_LEVELS and \
                RESOURCE_LEVELS[self.language] != self.resource:
            raise SchemaError(
                f'{self.language} is a {RESOURCE_LEVELS[self.language]}-'
                f'resource language, row says {self.resource}')
        if self.correct not in (0, 1):
            raise SchemaError(f'correct must be 0 or 1, got {self.correct!r}')
        if not (math.isfinite(self.mdfr) and math.isfinite(self.linearity)):
            raise SchemaError('mdfr and linearity must be finite')

    @classmethod
    def build(cls, model_id: str, question_id: str, language: str,
              mdfr: float, linearity: float, correct: int) -> 'AnalysisRow':
        return cls(model_id=model_id, question_id=question_id,
                   language=language, resource=resource_level(language),
                   mdfr=mdfr, linearity=linearity, correct=correct)


@dataclass(frozen=True)
class RegressionResult:
    """Coefficient table of one logistic fit.  z = beta/se exactly."""

    names: tuple[str, ...]
    beta: tuple[float, ...]
    se: tuple[float, ...]
    converged: bool
    n_obs: int
    note: str = REGRESSION_NOTE

    @property
    def z(self) -> tuple[float, ...]:
        return tuple(b / s for b, s in zip(self.beta, self.se))

    @property
    def p(self) -> tuple[float, ...]:
        # Two-sided normal approximation of the Wald statistic.
        return tuple(math.erfc(abs(zv) / math.sqrt(2)) for zv in self.z)

    def coefficient(self, name: str) -> tuple[float, float]:
        idx = self.names.index(name)
        return self.beta[idx], self.se[idx]


def _clean_pair(x: Sequence[float], y: Sequence[float]
                ) -> tuple[np.ndarray, np.ndarray]:
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise SchemaError('inputs must be equal-length 1-D sequences')
    if xa.size < 3:
        raise InsufficientDataError('need at least three pairs')
    return xa, ya


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation."""
    xa, ya = _clean_pair(x, y)
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    sx = float(np.sqrt(np.sum(xd * xd)))
    sy = float(np.sqrt(np.sum(yd * yd)))
    if sx == 0.0 or sy == 0.0:
        raise DegenerateVarianceError('constant input to pearson')
    return float(np.dot(xd, yd) / (sx * sy))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values share the mean of their rank block."""
    order = np.argsort(values, kind='stable')
    ranks = np.empty(values.size, dtype=float)
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and \
                values[order[j + 1]] == values[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Rank correlation: pearson over average ranks."""
    xa, ya = _clean_pair(x, y)
    return pearson(_average_ranks(xa), _average_ranks(ya))


def zscore(x: Sequence[float]) -> np.ndarray:
    """Standardize to mean 0, sample standard deviation 1 (n-1)."""
    xa = np.asarray(x, dtype=float)
    if xa.size < 2:
        raise InsufficientDataError('need at least two values to z-score')
    std = float(xa.std(ddof=1))
    if std == 0.0:
        raise DegenerateVarianceError('constant input to zscore')
    return (xa - xa.mean()) / std


INTERACTION_TERMS = (
    'intercept', 'mdfr_z', 'lin_z', 'resource_low', 'mdfr_z:lin_z',
    'mdfr_z:resource_low', 'lin_z:resource_low', 'mdfr_z:lin_z:resource_low')

_BETA_LIMIT = 30.0
_IRLS_TOL = 1e-8
_IRLS_MAX_ITER = 100


def _design_matrix(rows: Sequence[AnalysisRow], include_model_dummies: bool
                   ) -> tuple[np.ndarray, tuple[str, ...]]:
    mdfr_z = zscore([r.mdfr for r in rows])
    lin_z = zscore([r.linearity for r in rows])
    low = np.array([1.0 if r.resource == 'low' else 0.0 for r in rows])
    cols = [np.ones(len(rows)), mdfr_z, lin_z, low, mdfr_z * lin_z,
            mdfr_z * low, lin_z * low, mdfr_z * lin_z * low]
    names = list(INTERACTION_TERMS)
    if include_model_dummies:
        models = sorted({r.model_id for r in rows})
        for model in models[1:]:  # first model is the reference level
            cols.append(np.array([1.0 if r.model_id == model else 0.0
                                  for r in rows]))
            names.append(f'model:{model}')
    return np.column_stack(cols), tuple(names)


def _irls(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, bool]:
    n, k = x.shape
    beta = np.zeros(k)
    converged = False
    info = None
    for _ in range(_IRLS_MAX_ITER):
        eta = x @ beta
        mu = 1.0 / (1.0 + np.exp(-eta))
        w = np.clip(mu * (1.0 - mu), 1e-10, None)
        info = x.T @ (x * w[:, None])
        try:
            delta = np.linalg.solve(info, x.T @ (y - mu))
        except np.linalg.LinAlgError:
            raise DegenerateDesignError('singular design in logistic fit')
        beta = beta + delta
        if float(np.max(np.abs(beta))) > _BETA_LIMIT:
            raise SeparationDetectedError(
                'coefficients diverged; a covariate separates the outcome')
        if float(np.max(np.abs(delta))) < _IRLS_TOL:
            converged = True
            break
    # Standard errors from the inverse observed information at the optimum.
    eta = x @ beta
    mu = 1.0 / (1.0 + np.exp(-eta))
    w = np.clip(mu * (1.0 - mu), 1e-10, None)
    info = x.T @ (x * w[:, None])
    try:
        cov = np.linalg.inv(info)
    except np.linalg.LinAlgError:
        raise DegenerateDesignError('singular information matrix')
    return beta, np.sqrt(np.diag(cov)), converged


def fe_logistic(rows: Sequence[AnalysisRow],
                include_model_dummies: bool = False) -> RegressionResult:
    """correct ~ mdfr_z * lin_z * resource_low (+ model dummies).

    Plain Newton / iteratively reweighted least squares.  Raises
    SeparationDetected instead of returning runaway coefficients.
    """
    if len(rows) < 10:
        raise InsufficientDataError('need at least ten observations')
    y = np.array([float(r.correct) for r in rows])
    if len(set(y.tolist())) < 2:
        raise InsufficientDataError('outcome has a single class')
    x, names = _design_matrix(rows, include_model_dummies)
    if np.linalg.matrix_rank(x) < x.shape[1]:
        raise DegenerateDesignError('design matrix is rank deficient')
    beta, se, converged = _irls(x, y)
    return RegressionResult(names=names, beta=tuple(beta), se=tuple(se),
                            converged=converged, n_obs=len(rows))


def krippendorff_alpha(ratings: Mapping[str, Sequence[float]] |
                       Iterable[Sequence[float]],
                       level: str = 'ordinal') -> float:
    """Ordinal Krippendorff alpha over per-item rating lists.

    Items rated once are unpairable and drop out, matching the treatment
    of missing data: agreement is only measurable where two raters met.
    """
    if level != 'ordinal':
        raise SchemaError(f'unsupported agreement level {level!r}')
    if isinstance(ratings, Mapping):
        units = [list(v) for v in ratings.values()]
    else:
        units = [list(v) for v in ratings]
    if len(units) < 2:
        raise InsufficientDataError('need at least two items')
    pairable = [u for u in units if len(u) >= 2]
    if not pairable:
        raise InsufficientDataError('no item carries two or more ratings')

    values = sorted({v for u in pairable for v in u})
    index = {v: i for i, v in enumerate(values)}
    m = len(values)
    coincidence = np.zeros((m, m))
    for unit in pairable:
        weight = 1.0 / (len(unit) - 1)
        for i, a in enumerate(unit):
            for j, b in enumerate(unit):
                if i != j:
                    coincidence[index[a], index[b]] += weight
    marginals = coincidence.sum(axis=1)
    n = float(marginals.sum())
    if n <= 1:
        raise InsufficientDataError('fewer than two pairable ratings')

    # Ordinal distance: squared count of marginal mass between two ranks.
    cumulative = np.concatenate(([0.0], np.cumsum(marginals)))
    delta2 = np.zeros((m, m))
    for c in range(m):
        for k in range(m):
            lo, hi = min(c, k), max(c, k)
            between = cumulative[hi + 1] - cumulative[lo]
            delta2[c, k] = (between - (marginals[c] + marginals[k]) / 2) ** 2

    d_obs = float(np.sum(coincidence * delta2)) / n
    d_exp = float(marginals @ delta2 @ marginals -
                  np.sum(marginals * np.diag(delta2))) / (n * (n - 1))
    if d_exp == 0.0:
        return 1.0
    return 1.0 - d_obs / d_exp


ANALYSIS_COLUMNS = ('model_id', 'question_id', 'language', 'resource',
                    'mdfr', 'linearity', 'correct')


def load_analysis_rows(path: str | Path) -> list[AnalysisRow]:
    path = Path(path)
    rows = []
    with path.open(encoding='utf-8', newline='') as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or \
                not set(ANALYSIS_COLUMNS) <= set(reader.fieldnames):
            raise SchemaError(
                f'analysis CSV must have columns {list(ANALYSIS_COLUMNS)}',
                path=str(path))
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append(AnalysisRow(
                    model_id=row['model_id'],
                    question_id=row['question_id'],
                    language=row['language'],
                    resource=row['resource'],
                    mdfr=float(row['mdfr']),
                    linearity=float(row['linearity']),
                    correct=int(row['correct'])))
            except (SchemaError, ValueError) as exc:
                message = exc.message if isinstance(exc, SchemaError) else \
                    str(exc)
                raise SchemaError(message, line=lineno, path=str(path))
    return rows


def write_analysis_rows(path: str | Path,
                        rows: Sequence[AnalysisRow]) -> None:
    from .jsonl import write_csv

    write_csv(path, ANALYSIS_COLUMNS,
              [(r.model_id, r.question_id, r.language, r.resource,
                f'{r.mdfr:.6f}', f'{r.linearity:.6f}', r.correct)
               for r in rows])


def write_regression_csv(path: str | Path, result: RegressionResult) -> None:
    """Coefficient table with the approximation caveat up front."""
    lines = [f'# {result.note}',
             f'# n_obs={result.n_obs} converged={result.converged}',
             'term,beta,se,z,p']
    for name, b, s, zv, pv in zip(result.names, result.beta, result.se,
                                  result.z, result.p):
        lines.append(f'{name},{b:.6f},{s:.6f},{zv:.6f},{pv:.6g}')
    write_text_atomic(path, '\n'.join(lines) + '\n')
