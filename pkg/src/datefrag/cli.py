"""Command line front end.

One subcommand per pipeline stage: generate a benchmark, segment dates,
tokenize them, score fragmentation, calibrate metric weights, grade model
outputs, probe embedding dumps, and run the statistics. Exit codes: 0 on
success, 1 when inputs are well-formed but fail validation, 2 on I/O or
schema problems. All randomness hangs off the single --seed flag and all
outputs are written atomically, so identical invocations produce
byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .bench import expand_corpus, load_seeds, validate_corpus, write_records
from .errors import (DatefragError, InputMismatchError, SchemaError,
                     UnknownRecordError)
from .geometry import (linearity_summary, load_embeddings, path_summaries,
                       probe_dump, write_path_csv, write_pca_csv,
                       write_probe_csv)
from .jsonl import read_jsonl, write_csv, write_jsonl, write_text_atomic
from .metric import (MdfrWeights, aggregate_report, calibrate_weights,
                     compute_features, load_ratings, mdfr_score, report_csv,
                     rescale_ratings, write_weights)
from .scoring import (accuracy_csv, accuracy_table, load_predictions,
                      score_predictions, write_verdicts)
from .segmentation import (baseline_segment, load_segmentations,
                           write_segmentations)
from .stats import (fe_logistic, krippendorff_alpha, load_analysis_rows,
                    pearson, spearman, write_regression_csv)
from .tokenizers import BpeModel, load_pretokenized, write_tokenizations

__all__ = ['main']


def _load_date_lines(path: str | Path):
    """Read the shared dates-file schema: id?, text, language, format."""
    for lineno, obj in read_jsonl(path):
        for key in ('text', 'language', 'format'):
            if key not in obj:
                raise SchemaError(f'missing key {key!r}', line=lineno,
                                  path=str(path))
        yield (obj.get('id', f'line{lineno}'), obj['text'],
               obj['language'], obj['format'])


def _cmd_gen(args) -> int:
    seeds = list(load_seeds(args.seeds))
    records = list(expand_corpus(seeds))
    report = validate_corpus(records, expected_per_cell=args.expected_per_cell)
    if not report.ok:
        sys.stderr.write(report.render())
        return 1
    write_records(args.out, records)
    print(f'{len(records)} records from {len(seeds)} seeds -> {args.out}')
    return 0


def _cmd_segment(args) -> int:
    segments = [baseline_segment(text, language, kind)
                for _, text, language, kind in _load_date_lines(args.input)]
    write_segmentations(args.out, segments)
    print(f'{len(segments)} segmentations -> {args.out}')
    return 0


def _cmd_tokenize(args) -> int:
    model = BpeModel.load(args.merges, tokenizer_id=args.tokenizer_id)
    tokenizations = [
        model.tokenize(text, record_id=record_id, language=language,
                       format_kind=kind)
        for record_id, text, language, kind in _load_date_lines(args.input)]
    write_tokenizations(args.out, tokenizations)
    print(f'{len(tokenizations)} tokenizations -> {args.out}')
    return 0


def _cmd_mdfr(args) -> int:
    segments = list(load_segmentations(args.segments))
    tokenizations = list(load_pretokenized(args.tokens))
    if len(segments) != len(tokenizations):
        raise InputMismatchError(
            f'{len(segments)} segmentations vs {len(tokenizations)} '
            f'tokenizations; the files must pair line by line')
    weights = MdfrWeights()
    if args.weights:
        weights = MdfrWeights.from_json(Path(args.weights).read_text(
            encoding='utf-8'))
    scores = []
    feature_lines = []
    for i, (seg, tok) in enumerate(zip(segments, tokenizations), start=1):
        features = compute_features(seg, tok)
        value = mdfr_score(features, weights)
        scores.append((seg.language, seg.calendar, tok.tokenizer_id, value))
        feature_lines.append({
            'id': tok.record_id or f'line{i}',
            'language': seg.language,
            'format': seg.format_kind,
            'calendar': seg.calendar,
            'tokenizer_id': tok.tokenizer_id,
            'split': features.split,
            'delimiter_lost': features.delimiter_lost,
            'token_inflation': features.token_inflation,
            'divergence': features.divergence,
            'mdfr': value,
        })
    if args.features:
        write_jsonl(args.features, feature_lines)
    write_text_atomic(args.out, report_csv(aggregate_report(scores)))
    print(f'{len(scores)} scores -> {args.out}')
    return 0


def _cmd_calibrate(args) -> int:
    features = {}
    for lineno, obj in read_jsonl(args.features):
        required = ('split', 'delimiter_lost', 'token_inflation', 'divergence')
        for key in required:
            if key not in obj:
                raise SchemaError(f'missing key {key!r}', line=lineno,
                                  path=str(args.features))
        features[obj.get('id', f'line{lineno}')] = tuple(
            float(obj[key]) for key in required)
    means = rescale_ratings(load_ratings(args.ratings))
    missing = sorted(set(means) - set(features))
    if missing:
        raise SchemaError(f'ratings reference unknown items: {missing[:5]}',
                          path=str(args.ratings))
    rows = [(features[item], means[item]) for item in sorted(means)]
    result = calibrate_weights(rows)
    write_weights(args.out, result)
    w = result.weights
    print(f'weights a1={w.a1:.4f} a2={w.a2:.4f} a3={w.a3:.4f} '
          f'a4={w.a4:.4f} rmse={result.residual_rmse:.4f} -> {args.out}')
    return 0


def _cmd_score(args) -> int:
    from .bench import load_records

    records = list(load_records(args.bench))
    verdicts = score_predictions(load_predictions(args.predictions), records)
    write_verdicts(args.out, verdicts)
    if args.accuracy:
        rows = accuracy_table({args.model_id: verdicts}, records)
        write_text_atomic(args.accuracy, accuracy_csv(rows))
        for row in rows:
            for warning in row.warnings:
                sys.stderr.write(f'warning: {warning}\n')
    print(f'{len(verdicts)} verdicts -> {args.out}')
    return 0


def _cmd_probe(args) -> int:
    dump = load_embeddings(args.embeddings)
    results = probe_dump(dump, seed=args.seed)
    write_probe_csv(args.out, results)
    if args.summary:
        rows, overall = linearity_summary(results, args.evaluation)
        table = [(r.language, r.format_kind, r.component, r.layer,
                  f'{r.r_squared:.6f}') for r in rows]
        table += [(language, format_kind, 'Overall', '', f'{value:.6f}')
                  for (language, format_kind), value in sorted(overall.items())]
        write_csv(args.summary,
                  ('language', 'format', 'component', 'layer', 'r_squared'),
                  table)
    print(f'{len(results)} probes -> {args.out}')
    return 0


def _cmd_geometry(args) -> int:
    dump = load_embeddings(args.embeddings)
    if args.paths:
        write_path_csv(args.paths, path_summaries(dump))
    if args.pca:
        write_pca_csv(args.pca, dump, k=args.k)
    if not (args.paths or args.pca):
        raise SchemaError('nothing to do: pass --paths and/or --pca')
    done = ' and '.join(p for p in (args.paths, args.pca) if p)
    print(f'geometry -> {done}')
    return 0


def _numeric_column(path: str, column: str) -> list[float]:
    with open(path, encoding='utf-8', newline='') as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise SchemaError(f'no column {column!r} in {path}')
        values = []
        for lineno, row in enumerate(reader, start=2):
            try:
                values.append(float(row[column]))
            except ValueError:
                raise SchemaError(f'non-numeric value {row[column]!r} in '
                                  f'column {column!r}', line=lineno, path=path)
    return values


def _cmd_correlate(args) -> int:
    x = _numeric_column(args.input, args.x)
    y = _numeric_column(args.input, args.y)
    value = (pearson if args.method == 'pearson' else spearman)(x, y)
    line = f'{args.method}={value:.6f} n={len(x)}'
    print(line)
    if args.out:
        write_csv(args.out, ('method', 'x', 'y', 'n', 'value'),
                  [(args.method, args.x, args.y, len(x), f'{value:.6f}')])
    return 0


def _cmd_regress(args) -> int:
    rows = load_analysis_rows(args.input)
    result = fe_logistic(rows, include_model_dummies=args.model_dummies)
    write_regression_csv(args.out, result)
    print(f'{len(result.names)} terms on {result.n_obs} rows -> {args.out}')
    return 0


def _cmd_alpha(args) -> int:
    ratings = load_ratings(args.ratings)
    value = krippendorff_alpha(ratings)
    print(f'alpha={value:.6f}')
    if args.out:
        write_text_atomic(args.out, f'alpha\n{value:.6f}\n')
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='datefrag',
        description='Date fragmentation diagnostics for multilingual '
                    'tokenizers.')
    parser.add_argument('--seed', type=int, default=0,
                        help='seed for every randomized procedure '
                             '(default 0)')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen', help='expand seed questions into the '
                                   'four-format benchmark')
    p.add_argument('--seeds', required=True,
                   help='JSONL: seed_id, task, language, text, gold, source')
    p.add_argument('--out', required=True, help='benchmark records JSONL')
    p.add_argument('--expected-per-cell', type=int, default=None,
                   help='validate this record count per task/language/format')
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser('segment', help='reference-segment formatted dates')
    p.add_argument('--in', dest='input', required=True,
                   help='JSONL: id?, text, language, format')
    p.add_argument('--out', required=True, help='segmentations JSONL')
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser('tokenize', help='run a merges-file BPE tokenizer')
    p.add_argument('--in', dest='input', required=True,
                   help='JSONL: id?, text, language, format')
    p.add_argument('--merges', required=True, help='BPE merges file')
    p.add_argument('--tokenizer-id', default=None,
                   help='override the tokenizer id recorded in the output')
    p.add_argument('--out', required=True, help='tokenizations JSONL')
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser('mdfr', help='score tokenizations against '
                                    'segmentations')
    p.add_argument('--segments', required=True, help='segmentations JSONL')
    p.add_argument('--tokens', required=True,
                   help='tokenizations JSONL, paired line by line')
    p.add_argument('--weights', default=None, help='weights JSON '
                                                   '(default 0.2/0.2/0.1/0.5)')
    p.add_argument('--features', default=None,
                   help='also dump per-item features JSONL here')
    p.add_argument('--out', required=True,
                   help='report CSV: one row per tokenizer, one column '
                        'per calendar/language cell')
    p.set_defaults(func=_cmd_mdfr)

    p = sub.add_parser('calibrate', help='fit metric weights to ratings')
    p.add_argument('--features', required=True,
                   help='per-item features JSONL (see mdfr --features)')
    p.add_argument('--ratings', required=True,
                   help='CSV: item_id, annotator_id, rating on 1-5')
    p.add_argument('--out', required=True, help='weights JSON')
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser('score', help='grade model outputs against the '
                                     'benchmark')
    p.add_argument('--bench', required=True, help='benchmark records JSONL')
    p.add_argument('--predictions', required=True,
                   help='JSONL: record_id, raw_output')
    p.add_argument('--model-id', default='model',
                   help='model name for the accuracy table')
    p.add_argument('--out', required=True, help='verdicts CSV')
    p.add_argument('--accuracy', default=None,
                   help='also write the per-language accuracy CSV here')
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser('probe', help='fit linear probes on an embedding dump')
    p.add_argument('--embeddings', required=True, help='embedding JSONL')
    p.add_argument('--out', required=True, help='probe results CSV')
    p.add_argument('--summary', default=None,
                   help='also write best-layer summary CSV here')
    p.add_argument('--evaluation', choices=('in_sample', 'k_fold'),
                   default='in_sample',
                   help='which R^2 drives the summary (default in_sample)')
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser('geometry', help='year-path and PCA summaries')
    p.add_argument('--embeddings', required=True, help='embedding JSONL')
    p.add_argument('--paths', default=None, help='path summaries CSV')
    p.add_argument('--pca', default=None, help='PCA coordinates CSV')
    p.add_argument('--k', type=int, default=2,
                   help='number of principal components (default 2)')
    p.set_defaults(func=_cmd_geometry)

    p = sub.add_parser('correlate', help='correlate two CSV columns')
    p.add_argument('--in', dest='input', required=True, help='input CSV')
    p.add_argument('--x', required=True, help='first column name')
    p.add_argument('--y', required=True, help='second column name')
    p.add_argument('--method', choices=('pearson', 'spearman'),
                   default='pearson')
    p.add_argument('--out', default=None, help='one-row result CSV')
    p.set_defaults(func=_cmd_correlate)

    p = sub.add_parser('regress', help='fixed-effects logistic regression '
                                       'of correctness')
    p.add_argument('--in', dest='input', required=True,
                   help='analysis CSV: model_id, question_id, language, '
                        'resource, mdfr, linearity, correct')
    p.add_argument('--model-dummies', action='store_true',
                   help='add per-model fixed effects')
    p.add_argument('--out', required=True, help='coefficient table CSV')
    p.set_defaults(func=_cmd_regress)

    p = sub.add_parser('alpha', help='ordinal inter-rater agreement')
    p.add_argument('--ratings', required=True,
                   help='CSV: item_id, annotator_id, rating on 1-5')
    p.add_argument('--out', default=None, help='write the value here too')
    p.set_defaults(func=_cmd_alpha)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, UnknownRecordError) as exc:
        sys.stderr.write(f'error: {exc}\n')
        return 2
    except OSError as exc:
        sys.stderr.write(f'error: {exc}\n')
        return 2
    except DatefragError as exc:
        sys.stderr.write(f'error: {exc}\n')
        return 1


if __name__ == '__main__':
    sys.exit(main())
