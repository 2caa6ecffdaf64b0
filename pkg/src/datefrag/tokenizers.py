"""Tokenizations over byte spans, pretokenized dumps, and a byte-level BPE.

A tokenization is a partition of a string's UTF-8 bytes into contiguous
pieces.  Byte offsets are the ground truth everywhere: subword tokenizers
routinely cut multi-byte characters in half, so character offsets are not
always well defined.  Piece texts are decoded with ``surrogateescape`` so
that re-encoding the concatenation reproduces the original bytes exactly.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Iterator

import regex as _regex

from .errors import SchemaError
from .jsonl import read_jsonl, write_jsonl, write_text_atomic

__all__ = [
    'Token', 'ModelTokenization', 'BpeModel',
    'load_pretokenized', 'write_tokenizations',
]

# Pre-split pattern used by byte-level BPE before merging: contractions,
# letter runs, digit runs, punctuation runs, then trailing whitespace.
PRESPLIT_PATTERN = (
    r"'s|'t|'re|'ve|'m|'ll|'d"
    r"| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+"
    r"|\s+(?!\S)|\s+"
)


def _decode(piece: bytes) -> str:
    return piece.decode('utf-8', errors='surrogateescape')


def _encode(text: str) -> bytes:
    return text.encode('utf-8', errors='surrogateescape')


@dataclass(frozen=True)
class Token:
    """One piece of a tokenization, addressed by byte offsets."""

    start: int
    end: int
    text: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise SchemaError(f'bad token span [{self.start}, {self.end})')


@dataclass(frozen=True)
class ModelTokenization:
    """A full tokenization of one string by one tokenizer.

    Tokens must tile the UTF-8 encoding of ``text`` without gaps, and each
    token's text must decode its byte slice.  The optional identity fields
    carry provenance when tokenizations are read from corpus-wide dumps.
    """

    text: str
    tokenizer_id: str
    tokens: tuple[Token, ...]
    record_id: str | None = None
    language: str | None = None
    format_kind: str | None = None

    def __post_init__(self):
        data = self.text.encode('utf-8')
        pos = 0
        for token in self.tokens:
            if token.start != pos:
                raise SchemaError(
                    f'token at byte {token.start} does not continue from {pos}')
            if token.end > len(data):
                raise SchemaError(
                    f'token span [{token.start}, {token.end}) exceeds '
                    f'{len(data)} bytes')
            if _encode(token.text) != data[token.start:token.end]:
                raise SchemaError(
                    f'token text {token.text!r} does not match bytes '
                    f'[{token.start}, {token.end})')
            pos = token.end
        if pos != len(data):
            raise SchemaError(f'tokens cover {pos} of {len(data)} bytes')

    @classmethod
    def from_texts(cls, text: str, pieces: Iterable[str], tokenizer_id: str,
                   **identity: Any) -> 'ModelTokenization':
        """Build from piece texts alone, deriving byte spans by position."""
        tokens = []
        pos = 0
        for piece in pieces:
            width = len(_encode(piece))
            tokens.append(Token(pos, pos + width, piece))
            pos += width
        return cls(text, tokenizer_id, tuple(tokens), **identity)

    @property
    def token_texts(self) -> tuple[str, ...]:
        return tuple(token.text for token in self.tokens)

    def to_dict(self) -> dict[str, Any]:
        # Piece texts that slice a multi-byte character apart carry lone
        # surrogates and cannot survive a UTF-8 file; spans alone are
        # authoritative, so such texts are simply omitted.
        tokens = []
        for token in self.tokens:
            entry: dict[str, Any] = {'start': token.start, 'end': token.end}
            try:
                token.text.encode('utf-8')
            except UnicodeEncodeError:
                pass
            else:
                entry['text'] = token.text
            tokens.append(entry)
        record: dict[str, Any] = {}
        if self.record_id is not None:
            record['id'] = self.record_id
        record['text'] = self.text
        record['tokenizer_id'] = self.tokenizer_id
        if self.language is not None:
            record['language'] = self.language
        if self.format_kind is not None:
            record['format'] = self.format_kind
        record['tokens'] = tokens
        return record

    @classmethod
    def from_dict(cls, obj: dict[str, Any]) -> 'ModelTokenization':
        for key in ('text', 'tokenizer_id', 'tokens'):
            if key not in obj:
                raise SchemaError(f'missing key {key!r}')
        text = obj['text']
        if not isinstance(text, str):
            raise SchemaError('"text" must be a string')
        if not isinstance(obj['tokens'], list):
            raise SchemaError('"tokens" must be a list')
        data = text.encode('utf-8')
        tokens = []
        for i, entry in enumerate(obj['tokens']):
            if not isinstance(entry, dict) or 'start' not in entry or 'end' not in entry:
                raise SchemaError(f'token {i} needs "start" and "end"')
            start, end = entry['start'], entry['end']
            if not isinstance(start, int) or not isinstance(end, int):
                raise SchemaError(f'token {i} has non-integer span')
            piece = entry.get('text')
            if piece is None:
                if not (0 <= start <= end <= len(data)):
                    raise SchemaError(f'token {i} span out of range')
                piece = _decode(data[start:end])
            tokens.append(Token(start, end, piece))
        return cls(text, obj['tokenizer_id'], tuple(tokens),
                   record_id=obj.get('id'), language=obj.get('language'),
                   format_kind=obj.get('format'))


def load_pretokenized(path: str | Path) -> Iterator[ModelTokenization]:
    """Read tokenizations from a JSONL dump, re-raising with line numbers."""
    for lineno, obj in read_jsonl(path):
        try:
            yield ModelTokenization.from_dict(obj)
        except SchemaError as exc:
            raise SchemaError(exc.message, line=lineno, path=str(path)) from exc


def write_tokenizations(path: str | Path,
                        tokenizations: Iterable[ModelTokenization]) -> int:
    return write_jsonl(path, (t.to_dict() for t in tokenizations))


@functools.lru_cache(maxsize=1)
def _byte_alphabet() -> dict[int, str]:
    """Bijection from byte values to printable unicode characters.

    Printable latin-1 bytes map to themselves; the rest are relocated above
    U+0100 so merge tables stay readable and whitespace-free.
    """
    keep = (list(range(ord('!'), ord('~') + 1))
            + list(range(0xA1, 0xAC + 1)) + list(range(0xAE, 0xFF + 1)))
    table = {b: chr(b) for b in keep}
    shifted = 0
    for b in range(256):
        if b not in table:
            table[b] = chr(256 + shifted)
            shifted += 1
    return table


@functools.lru_cache(maxsize=1)
def _byte_alphabet_inverse() -> dict[str, int]:
    return {c: b for b, c in _byte_alphabet().items()}


class BpeModel:
    """Byte-level BPE with a regex pre-split and rank-ordered merges.

    The vocabulary is implicit: 256 byte symbols plus one new symbol per
    merge.  Merges apply greedily, lowest rank first, within each pre-split
    chunk; chunks never merge across their boundary.
    """

    def __init__(self, merges: Iterable[tuple[str, str]],
                 tokenizer_id: str = 'bpe',
                 presplit: str = PRESPLIT_PATTERN):
        self.merges = list(merges)
        self.ranks = {pair: rank for rank, pair in enumerate(self.merges)}
        if len(self.ranks) != len(self.merges):
            raise SchemaError('duplicate merge pair')
        self.tokenizer_id = tokenizer_id
        self._presplit = _regex.compile(presplit)

    # --- encoding ---

    def _symbols(self, chunk: str) -> list[str]:
        table = _byte_alphabet()
        return [table[b] for b in chunk.encode('utf-8')]

    def _merge_chunk(self, symbols: list[str]) -> list[str]:
        while len(symbols) > 1:
            best_rank = None
            best_at = -1
            for i in range(len(symbols) - 1):
                rank = self.ranks.get((symbols[i], symbols[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank, best_at = rank, i
            if best_rank is None:
                break
            pair = (symbols[best_at], symbols[best_at + 1])
            merged = pair[0] + pair[1]
            out = []
            i = 0
            while i < len(symbols):
                if (i < len(symbols) - 1
                        and (symbols[i], symbols[i + 1]) == pair):
                    out.append(merged)
                    i += 2
                else:
                    out.append(symbols[i])
                    i += 1
            symbols = out
        return symbols

    def tokenize(self, text: str, **identity: Any) -> ModelTokenization:
        inverse = _byte_alphabet_inverse()
        tokens = []
        pos = 0
        for chunk in self._presplit.findall(text):
            for piece in self._merge_chunk(self._symbols(chunk)):
                raw = bytes(inverse[c] for c in piece)
                tokens.append(Token(pos, pos + len(raw), _decode(raw)))
                pos += len(raw)
        return ModelTokenization(text, self.tokenizer_id, tuple(tokens),
                                 **identity)

    # --- training ---

    @classmethod
    def train(cls, corpus: Iterable[str], num_merges: int,
              tokenizer_id: str = 'bpe',
              presplit: str = PRESPLIT_PATTERN) -> 'BpeModel':
        """Learn merges by iterated most-frequent-pair counting.

        Frequency ties break on the lexicographically smallest pair so
        training is deterministic for a given corpus order.
        """
        splitter = _regex.compile(presplit)
        table = _byte_alphabet()
        words: dict[tuple[str, ...], int] = {}
        for line in corpus:
            for chunk in splitter.findall(line):
                key = tuple(table[b] for b in chunk.encode('utf-8'))
                if key:
                    words[key] = words.get(key, 0) + 1
        merges: list[tuple[str, str]] = []
        for _ in range(num_merges):
            counts: dict[tuple[str, str], int] = {}
            for word, freq in words.items():
                for pair in zip(word, word[1:]):
                    counts[pair] = counts.get(pair, 0) + freq
            if not counts:
                break
            best = min(counts, key=lambda p: (-counts[p], p))
            merges.append(best)
            merged = best[0] + best[1]
            rebuilt: dict[tuple[str, ...], int] = {}
            for word, freq in words.items():
                out = []
                i = 0
                while i < len(word):
                    if i < len(word) - 1 and (word[i], word[i + 1]) == best:
                        out.append(merged)
                        i += 2
                    else:
                        out.append(word[i])
                        i += 1
                key = tuple(out)
                rebuilt[key] = rebuilt.get(key, 0) + freq
            words = rebuilt
        return cls(merges, tokenizer_id=tokenizer_id, presplit=presplit)

    # --- persistence ---

    def save(self, path: str | Path) -> None:
        lines = [f'{a} {b}' for a, b in self.merges]
        write_text_atomic(path, '\n'.join(lines) + ('\n' if lines else ''))

    @classmethod
    def load(cls, path: str | Path, tokenizer_id: str | None = None) -> 'BpeModel':
        path = Path(path)
        merges = []
        with path.open(encoding='utf-8') as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.rstrip('\n')
                if not line or line.startswith('#'):
                    continue
                parts = line.split(' ')
                if len(parts) != 2:
                    raise SchemaError('expected two space-separated symbols',
                                      line=lineno, path=str(path))
                merges.append((parts[0], parts[1]))
        return cls(merges, tokenizer_id=tokenizer_id or path.stem)
