"""Small shared helpers: tokenization, seeded substreams, NDJSON I/O."""

from __future__ import annotations

import json
import random
import re
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import ConfigError, DataError

# CJK unified ideographs (base + extension A) are split into unigrams;
# everything alphanumeric is grouped into lowercased runs.
_TOKEN_RE = re.compile(r"[一-鿿㐀-䶿]|[A-Za-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Default tokenizer: CJK unigrams plus lowercased alphanumeric runs."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def substream(seed: int, name: str) -> random.Random:
    """Named deterministic RNG derived from the run seed.

    Seeding with a string is stable across processes and Python versions
    (CPython hashes str seeds with sha512, not the salted hash()).
    """
    return random.Random(f"{seed}:{name}")


def read_ndjson(path: str | Path, context: str) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) for each non-blank line of an NDJSON file."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {context} file: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{context}: line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(obj, dict):
                raise DataError(f"{context}: line {lineno}: expected an object")
            yield lineno, obj


def write_ndjson(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def require_fields(record: dict, fields: Iterable[str], context: str, lineno: int) -> None:
    for field in fields:
        if field not in record:
            raise DataError(f"{context}: line {lineno}: missing field {field!r}")


def json_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def field_str(record: dict, key: str, context: str, lineno: int) -> str:
    value = record.get(key)
    if not isinstance(value, str):
        raise DataError(f"{context}: line {lineno}: field {key!r} must be a string")
    return value


def as_number(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DataError(f"{what} must be a number, got {value!r}")
    return float(value)
