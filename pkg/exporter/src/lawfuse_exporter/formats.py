"""Readers and writers for the retrieval engine's published file formats.

The engine's interfaces are NDJSON corpus files, a line-oriented rulebase
text format, and score/embedding files with a leading header record. Only
the predicate declarations of the rulebase are needed here, so a full
formula parser is not.
"""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Iterable, Iterator

DELIMITERS = "。！？；\n"  # the engine's default terminators

_TOKEN_RE = re.compile(r"[一-鿿㐀-䶿]|[A-Za-z0-9]+")

_PRED_LINE = re.compile(
    r'^\s*pred\s+([A-Za-z0-9_][A-Za-z0-9_.\-]*)\s*@\s*([A-Za-z0-9_][A-Za-z0-9_.\-]*)'
    r'\s*:\s*"((?:[^"\\]|\\.)*)"\s*(?:#.*)?$'
)
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


class FormatError(Exception):
    pass


def tokenize(text: str) -> list[str]:
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def split_sentences(text: str, delimiters: str = DELIMITERS) -> list[str]:
    """Terminator-attached splitting matching the engine's convention."""
    sentences: list[str] = []
    buf: list[str] = []

    def flush():
        frag = "".join(buf)
        content = frag
        for d in delimiters:
            content = content.replace(d, "")
        if content.strip():
            sentences.append(frag)
        buf.clear()

    for ch in text:
        buf.append(ch)
        if ch in delimiters:
            flush()
    flush()
    return sentences


def sentence_id(doc_id: str, index: int) -> str:
    return f"{doc_id}:{index}"


def read_ndjson(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"{path}: line {lineno}: invalid JSON ({exc.msg})") from exc


def read_docs(path: str | Path) -> dict[str, dict]:
    """Queries or cases: id -> record (cases keep their 'articles' list)."""
    docs: dict[str, dict] = {}
    for rec in read_ndjson(path):
        if "id" not in rec or "text" not in rec:
            raise FormatError(f"{path}: record without id/text")
        docs[rec["id"]] = rec
    return docs


def read_qrels_pairs(path: str | Path) -> list[tuple[str, str]]:
    return [(rec["query_id"], rec["case_id"]) for rec in read_ndjson(path)]


def _unescape(raw: str) -> str:
    out: list[str] = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\" and i + 1 < len(raw):
            out.append(_ESCAPES.get(raw[i + 1], raw[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def read_predicate_decls(rulebase_path: str | Path) -> dict[str, tuple[str, str]]:
    """pred id -> (article id, text), from 'pred ...' lines of the rulebase."""
    decls: dict[str, tuple[str, str]] = {}
    text = Path(rulebase_path).read_text(encoding="utf-8")
    for line in text.splitlines():
        stripped = line.lstrip()
        if not stripped.startswith("pred"):
            continue
        match = _PRED_LINE.match(line)
        if not match:
            raise FormatError(f"unparseable predicate declaration: {line!r}")
        pid, article, raw = match.groups()
        decls[pid] = (article, _unescape(raw))
    return decls


def write_score_file(
    path: str | Path, kind: str, lo: float, hi: float,
    rows: Iterable[tuple[str, str, float]],
) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"kind": kind, "range": [lo, hi]}) + "\n")
        for left, right, score in rows:
            fh.write(
                json.dumps({"left": left, "right": right, "score": score}, ensure_ascii=False)
                + "\n"
            )
            n += 1
    return n


def write_embedding_file(path: str | Path, dim: int, rows: Iterable[tuple[str, list[float]]]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"dim": dim}) + "\n")
        for sent_id, vector in rows:
            fh.write(json.dumps({"id": sent_id, "vector": vector}) + "\n")
            n += 1
    return n
