"""Pluggable scoring backends: relevance, predicate satisfaction, embeddings.

External score files are NDJSON with a header record:
  {"kind": "relevance"|"predicate", "range": [lo, hi]}
  {"left": str, "right": str, "score": float} ...
External embedding files:
  {"dim": int}
  {"id": str, "vector": [float, ...]} ...
Sentence ids follow the ``<doc_id>:<index>`` convention (0-based).
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._util import as_number, field_str, read_ndjson, tokenize, write_ndjson
from .corpus import CandidateCase, Query
from .errors import MissingScoreError, ScoreTableError

Tokenizer = Callable[[str], list[str]]

DEFAULT_EMBED_DIM = 512


def sentence_id(doc_id: str, index: int) -> str:
    return f"{doc_id}:{index}"


# ---------------------------------------------------------------------------
# External tables
# ---------------------------------------------------------------------------

class ScoreTable:
    """Immutable (left, right) -> score map with a declared range."""

    def __init__(self, kind: str, lo: float, hi: float, scores: Mapping[tuple[str, str], float]):
        if lo > hi:
            raise ScoreTableError(f"invalid range [{lo}, {hi}]")
        self.kind = kind
        self.lo = lo
        self.hi = hi
        self._scores = dict(scores)
        for pair, score in self._scores.items():
            self._check_range(pair, score)

    def _check_range(self, pair: tuple[str, str], score: float) -> None:
        if not (self.lo <= score <= self.hi) or not math.isfinite(score):
            raise ScoreTableError(
                f"score {score} for {pair} outside declared range [{self.lo}, {self.hi}]"
            )

    def get(self, left: str, right: str) -> float:
        try:
            return self._scores[(left, right)]
        except KeyError:
            raise MissingScoreError(
                f"no {self.kind} score for pair ({left!r}, {right!r})"
            ) from None

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self._scores

    def __len__(self) -> int:
        return len(self._scores)

    @classmethod
    def load(cls, path: str | Path) -> "ScoreTable":
        header = None
        scores: dict[tuple[str, str], float] = {}
        for lineno, rec in read_ndjson(path, "scores"):
            if header is None:
                if "kind" not in rec or "range" not in rec:
                    raise ScoreTableError(
                        f"scores: line {lineno}: first record must be a header with kind/range"
                    )
                rng = rec["range"]
                if not (isinstance(rng, list) and len(rng) == 2):
                    raise ScoreTableError(f"scores: line {lineno}: range must be [lo, hi]")
                header = (str(rec["kind"]), as_number(rng[0], "range lo"), as_number(rng[1], "range hi"))
                continue
            left = field_str(rec, "left", "scores", lineno)
            right = field_str(rec, "right", "scores", lineno)
            score = as_number(rec.get("score"), f"scores line {lineno}: score")
            if (left, right) in scores:
                raise ScoreTableError(f"scores: line {lineno}: duplicate pair ({left!r}, {right!r})")
            scores[(left, right)] = score
        if header is None:
            raise ScoreTableError("scores: empty file, header record required")
        return cls(header[0], header[1], header[2], scores)

    def save(self, path: str | Path) -> None:
        def records():
            yield {"kind": self.kind, "range": [self.lo, self.hi]}
            for (left, right), score in self._scores.items():
                yield {"left": left, "right": right, "score": score}

        write_ndjson(path, records())


class EmbeddingTable:
    """Immutable sentence id -> vector map of constant dimension."""

    def __init__(self, dim: int, vectors: Mapping[str, Sequence[float]]):
        if dim < 1:
            raise ScoreTableError(f"embedding dimension must be >= 1, got {dim}")
        self.dim = dim
        self._vectors: dict[str, np.ndarray] = {}
        for key, vec in vectors.items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise ScoreTableError(
                    f"vector for {key!r} has dimension {arr.shape}, expected ({dim},)"
                )
            if not np.all(np.isfinite(arr)):
                raise ScoreTableError(f"vector for {key!r} has non-finite entries")
            self._vectors[key] = arr

    def get(self, sent_id: str) -> np.ndarray:
        try:
            return self._vectors[sent_id]
        except KeyError:
            raise MissingScoreError(f"no embedding for sentence id {sent_id!r}") from None

    def __contains__(self, sent_id: str) -> bool:
        return sent_id in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        dim = None
        vectors: dict[str, list[float]] = {}
        for lineno, rec in read_ndjson(path, "embeddings"):
            if dim is None:
                if "dim" not in rec:
                    raise ScoreTableError(
                        f"embeddings: line {lineno}: first record must be a header with dim"
                    )
                dim = int(as_number(rec["dim"], "dim"))
                continue
            key = field_str(rec, "id", "embeddings", lineno)
            vec = rec.get("vector")
            if not isinstance(vec, list):
                raise ScoreTableError(f"embeddings: line {lineno}: 'vector' must be a list")
            if key in vectors:
                raise ScoreTableError(f"embeddings: line {lineno}: duplicate id {key!r}")
            vectors[key] = vec
        if dim is None:
            raise ScoreTableError("embeddings: empty file, header record required")
        return cls(dim, vectors)

    def save(self, path: str | Path) -> None:
        def records():
            yield {"dim": self.dim}
            for key, vec in self._vectors.items():
                yield {"id": key, "vector": [float(x) for x in vec]}

        write_ndjson(path, records())


# ---------------------------------------------------------------------------
# BM25 (Okapi form)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Bm25Params:
    """k1/b plus the collection statistics the score formula needs."""

    k1: float
    b: float
    n_docs: int
    avg_len: float
    doc_freq: Mapping[str, int]

    @classmethod
    def from_docs(
        cls, docs: Iterable[Sequence[str]], k1: float = 1.2, b: float = 0.75
    ) -> "Bm25Params":
        if k1 <= 0:
            raise ScoreTableError(f"k1 must be > 0, got {k1}")
        if not 0.0 <= b <= 1.0:
            raise ScoreTableError(f"b must lie in [0, 1], got {b}")
        df: Counter[str] = Counter()
        n_docs = 0
        total_len = 0
        for tokens in docs:
            n_docs += 1
            total_len += len(tokens)
            df.update(set(tokens))
        avg_len = total_len / n_docs if n_docs else 0.0
        return cls(k1, b, n_docs, avg_len, dict(df))


def bm25_score(query_tokens: Sequence[str], doc_tokens: Sequence[str], params: Bm25Params) -> float:
    """Okapi BM25 with idf = ln((N - df + 0.5) / (df + 0.5) + 1)."""
    if not query_tokens or not doc_tokens:
        return 0.0
    tf = Counter(doc_tokens)
    doc_len = len(doc_tokens)
    norm = params.k1 * (1.0 - params.b + params.b * doc_len / params.avg_len) if params.avg_len else params.k1
    score = 0.0
    for term in query_tokens:
        freq = tf.get(term)
        if not freq:
            continue
        df = params.doc_freq.get(term, 0)
        idf = math.log((params.n_docs - df + 0.5) / (df + 0.5) + 1.0)
        score += idf * freq * (params.k1 + 1.0) / (freq + norm)
    return score


# ---------------------------------------------------------------------------
# Relevance backends (query x case)
# ---------------------------------------------------------------------------

class TableRelevance:
    def __init__(self, table: ScoreTable):
        self.table = table

    def score(self, query: Query, case: CandidateCase) -> float:
        return self.table.get(query.id, case.id)


class Bm25Relevance:
    """Built-in lexical relevance over the loaded case collection."""

    def __init__(
        self,
        cases: Iterable[CandidateCase],
        k1: float = 1.2,
        b: float = 0.75,
        tokenizer: Tokenizer = tokenize,
    ):
        self.tokenizer = tokenizer
        self._doc_tokens = {c.id: tokenizer(c.text) for c in cases}
        self.params = Bm25Params.from_docs(self._doc_tokens.values(), k1=k1, b=b)

    def score(self, query: Query, case: CandidateCase) -> float:
        doc = self._doc_tokens.get(case.id)
        if doc is None:
            doc = self.tokenizer(case.text)
        return bm25_score(self.tokenizer(query.text), doc, self.params)


def neural_relevance(query: Query, case: CandidateCase, backend) -> float:
    return backend.score(query, case)


# ---------------------------------------------------------------------------
# Predicate backends (query x predicate)
# ---------------------------------------------------------------------------

class TablePredicateScorer:
    def __init__(self, table: ScoreTable):
        if table.lo < 0.0 or table.hi > 1.0:
            raise ScoreTableError(
                f"predicate score table must declare a range within [0, 1], got "
                f"[{table.lo}, {table.hi}]"
            )
        self.table = table

    def score(self, query: Query, predicate_text: str, predicate_id: str) -> float:
        return self.table.get(query.id, predicate_id)


class LexicalPredicateScorer:
    """Fraction of the predicate's unique tokens that occur in the query."""

    def __init__(self, tokenizer: Tokenizer = tokenize):
        self.tokenizer = tokenizer

    def score(self, query: Query, predicate_text: str, predicate_id: str) -> float:
        pred_tokens = set(self.tokenizer(predicate_text))
        if not pred_tokens:
            return 0.0
        query_tokens = set(self.tokenizer(query.text))
        return len(pred_tokens & query_tokens) / len(pred_tokens)


def predicate_score(query: Query, predicate_text: str, predicate_id: str, backend) -> float:
    return backend.score(query, predicate_text, predicate_id)


# ---------------------------------------------------------------------------
# Sentence embedding backends
# ---------------------------------------------------------------------------

class TableEmbedder:
    def __init__(self, table: EmbeddingTable):
        self.table = table
        self.dim = table.dim

    def embed(self, sentence: str, sent_id: str) -> np.ndarray:
        return self.table.get(sent_id)


class HashedEmbedder:
    """Hashed term-frequency vectors, L2-normalized; zero stays zero."""

    def __init__(self, dim: int = DEFAULT_EMBED_DIM, tokenizer: Tokenizer = tokenize):
        if dim < 1:
            raise ScoreTableError(f"embedding dimension must be >= 1, got {dim}")
        self.dim = dim
        self.tokenizer = tokenizer

    def _bucket(self, token: str) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % self.dim

    def embed(self, sentence: str, sent_id: str = "") -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for token in self.tokenizer(sentence):
            vec[self._bucket(token)] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec


def embed_sentence(sentence: str, sent_id: str, backend) -> np.ndarray:
    return backend.embed(sentence, sent_id)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity clipped to [-1, 1]; zero vectors score 0."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.clip(float(np.dot(u, v)) / (nu * nv), -1.0, 1.0))
