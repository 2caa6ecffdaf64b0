"""Line-oriented JSON and CSV helpers with atomic writes.

All readers report the offending line number in :class:`SchemaError` so
problems in large dumps can be located without bisecting the file.
"""

from __future__ import annotations

import csv
import json
import os
import tempfile
from collections.abc import Iterable, Iterator, Sequence
from pathlib import Path
from typing import Any

from .errors import SchemaError

__all__ = [
    'read_jsonl', 'write_jsonl', 'write_text_atomic', 'write_csv',
]


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield ``(line_number, object)`` pairs from a JSONL file.

    Blank lines are skipped.  Raises :class:`SchemaError` when a line is
    not valid JSON or decodes to something other than an object.
    """
    path = Path(path)
    with path.open('r', encoding='utf-8') as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f'invalid JSON: {exc.msg}',
                                  line=lineno, path=str(path)) from exc
            if not isinstance(obj, dict):
                raise SchemaError('expected a JSON object',
                                  line=lineno, path=str(path))
            yield lineno, obj


def _atomic_write(path: Path, write_body) -> None:
    # Write to a sibling temp file and rename so readers never observe a
    # half-written file and interrupted runs leave the old content intact.
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=path.name,
                                    suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            write_body(handle)
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> int:
    """Atomically write records as one JSON object per line.

    Keys are emitted in insertion order with a fixed separator style so
    repeated runs produce byte-identical files.  Returns the record count.
    """
    path = Path(path)
    count = 0

    def body(handle) -> None:
        nonlocal count
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False,
                                    separators=(',', ':')))
            handle.write('\n')
            count += 1

    _atomic_write(path, body)
    return count


def write_text_atomic(path: str | Path, text: str) -> None:
    """Atomically replace ``path`` with ``text``."""
    _atomic_write(Path(path), lambda handle: handle.write(text))


def write_csv(path: str | Path, header: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> int:
    """Atomically write a CSV file with a header row; returns row count."""
    path = Path(path)
    count = 0

    def body(handle) -> None:
        nonlocal count
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
            count += 1

    _atomic_write(path, body)
    return count
