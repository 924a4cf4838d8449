"""Queries, candidate cases, relevance judgments, and candidate pools.

File formats (all NDJSON, UTF-8):
  queries  {"id": str, "text": str}
  cases    {"id": str, "text": str, "articles": [str]}
  qrels    {"query_id": str, "case_id": str, "label": int}
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ._util import field_str, read_ndjson, substream, write_ndjson
from .errors import CorpusError
from .fol import RuleBase

DEFAULT_DELIMITERS = "。！？；\n"  # 。！？； and newline


@dataclass(frozen=True)
class CorpusConfig:
    max_level: int = 3
    delimiters: str = DEFAULT_DELIMITERS
    binarize_threshold: float = 2.0 / 3.0

    def __post_init__(self):
        if self.max_level < 1:
            raise CorpusError(f"max_level must be >= 1, got {self.max_level}")
        if not 0.0 <= self.binarize_threshold <= 1.0:
            raise CorpusError("binarize_threshold must lie in [0, 1]")


@dataclass(frozen=True)
class Query:
    id: str
    text: str
    sentences: tuple[str, ...]


@dataclass(frozen=True)
class CandidateCase:
    id: str
    text: str
    sentences: tuple[str, ...]
    cited_article_ids: tuple[str, ...]


class Qrels:
    """Graded judgments keyed by (query_id, case_id), normalized to [0, 1]."""

    def __init__(self, max_level: int):
        self.max_level = max_level
        self._raw: dict[tuple[str, str], int] = {}

    def add(self, query_id: str, case_id: str, raw: int) -> None:
        key = (query_id, case_id)
        if key in self._raw:
            raise CorpusError(f"duplicate qrels entry for {key}")
        if not 0 <= raw <= self.max_level:
            raise CorpusError(
                f"label {raw} for {key} outside [0, {self.max_level}]"
            )
        self._raw[key] = raw

    def raw(self, query_id: str, case_id: str) -> int:
        return self._raw[(query_id, case_id)]

    def normalized(self, query_id: str, case_id: str) -> float:
        return normalize_label(self._raw[(query_id, case_id)], self.max_level)

    def pairs(self) -> Iterable[tuple[str, str, int]]:
        for (qid, cid), raw in self._raw.items():
            yield qid, cid, raw

    def query_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for qid, _ in self._raw:
            seen.setdefault(qid, None)
        return list(seen)

    def cases_for(self, query_id: str) -> list[str]:
        return [cid for (qid, cid) in self._raw if qid == query_id]

    def gains_for(self, query_id: str) -> dict[str, float]:
        return {
            cid: normalize_label(raw, self.max_level)
            for (qid, cid), raw in self._raw.items()
            if qid == query_id
        }

    def relevant_for(self, query_id: str, threshold: float) -> set[str]:
        return {
            cid
            for (qid, cid), raw in self._raw.items()
            if qid == query_id and normalize_label(raw, self.max_level) >= threshold
        }

    def __len__(self) -> int:
        return len(self._raw)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Qrels)
            and self.max_level == other.max_level
            and self._raw == other._raw
        )


@dataclass(frozen=True)
class Corpus:
    queries: dict[str, Query]
    cases: dict[str, CandidateCase]
    qrels: Qrels
    candidates: dict[str, tuple[str, ...]]  # query id -> judged case ids, file order
    config: CorpusConfig
    rulebase: RuleBase | None = None

    def with_rulebase(self, base: RuleBase) -> "Corpus":
        return Corpus(self.queries, self.cases, self.qrels, self.candidates, self.config, base)

    def cases_without_citations(self) -> list[str]:
        return [c.id for c in self.cases.values() if not c.cited_article_ids]


def split_sentences(text: str, delimiters: str = DEFAULT_DELIMITERS) -> list[str]:
    """Split on terminator characters, keeping each terminator attached.

    Fragments that are empty apart from whitespace/terminators are dropped;
    a trailing fragment without a terminator is kept.
    """
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


def normalize_label(raw: int, max_level: int) -> float:
    if max_level < 1:
        raise CorpusError(f"max_level must be >= 1, got {max_level}")
    if not 0 <= raw <= max_level:
        raise CorpusError(f"label {raw} outside [0, {max_level}]")
    return raw / max_level


def load_queries(path: str | Path, config: CorpusConfig = CorpusConfig()) -> dict[str, Query]:
    queries: dict[str, Query] = {}
    for lineno, rec in read_ndjson(path, "queries"):
        qid = field_str(rec, "id", "queries", lineno)
        text = field_str(rec, "text", "queries", lineno)
        if qid in queries:
            raise CorpusError(f"queries: line {lineno}: duplicate query id {qid!r}")
        sentences = split_sentences(text, config.delimiters)
        if not sentences:
            raise CorpusError(f"queries: line {lineno}: query {qid!r} has no sentences")
        queries[qid] = Query(qid, text, tuple(sentences))
    return queries


def load_cases(path: str | Path, config: CorpusConfig = CorpusConfig()) -> dict[str, CandidateCase]:
    cases: dict[str, CandidateCase] = {}
    for lineno, rec in read_ndjson(path, "cases"):
        cid = field_str(rec, "id", "cases", lineno)
        text = field_str(rec, "text", "cases", lineno)
        articles = rec.get("articles", [])
        if not isinstance(articles, list) or not all(isinstance(a, str) for a in articles):
            raise CorpusError(f"cases: line {lineno}: 'articles' must be a list of strings")
        if cid in cases:
            raise CorpusError(f"cases: line {lineno}: duplicate case id {cid!r}")
        sentences = split_sentences(text, config.delimiters)
        if not sentences:
            raise CorpusError(f"cases: line {lineno}: case {cid!r} has no sentences")
        cases[cid] = CandidateCase(cid, text, tuple(sentences), tuple(articles))
    return cases


def load_qrels(
    path: str | Path,
    max_level: int,
    queries: Mapping[str, Query] | None = None,
    cases: Mapping[str, CandidateCase] | None = None,
) -> Qrels:
    """Load judgments; cross-check ids when queries/cases are supplied."""
    qrels = Qrels(max_level)
    for lineno, rec in read_ndjson(path, "qrels"):
        qid = field_str(rec, "query_id", "qrels", lineno)
        cid = field_str(rec, "case_id", "qrels", lineno)
        label = rec.get("label")
        if isinstance(label, bool) or not isinstance(label, int):
            raise CorpusError(f"qrels: line {lineno}: 'label' must be an integer")
        if queries is not None and qid not in queries:
            raise CorpusError(f"qrels: line {lineno}: unknown query id {qid!r}")
        if cases is not None and cid not in cases:
            raise CorpusError(f"qrels: line {lineno}: unknown case id {cid!r}")
        qrels.add(qid, cid, label)
    return qrels


def load_corpus(
    query_path: str | Path,
    case_path: str | Path,
    qrels_path: str | Path,
    config: CorpusConfig = CorpusConfig(),
    rulebase: RuleBase | None = None,
) -> Corpus:
    """Load and cross-validate the three corpus files."""
    queries = load_queries(query_path, config)
    cases = load_cases(case_path, config)
    qrels = load_qrels(qrels_path, config.max_level, queries, cases)

    candidates: dict[str, list[str]] = {qid: [] for qid in queries}
    for qid, cid, _raw in qrels.pairs():
        candidates[qid].append(cid)

    return Corpus(
        queries,
        cases,
        qrels,
        {qid: tuple(cids) for qid, cids in candidates.items()},
        config,
        rulebase,
    )


def save_corpus(corpus: Corpus, query_path: str | Path, case_path: str | Path, qrels_path: str | Path) -> None:
    write_ndjson(query_path, ({"id": q.id, "text": q.text} for q in corpus.queries.values()))
    write_ndjson(
        case_path,
        (
            {"id": c.id, "text": c.text, "articles": list(c.cited_article_ids)}
            for c in corpus.cases.values()
        ),
    )
    write_ndjson(
        qrels_path,
        (
            {"query_id": qid, "case_id": cid, "label": raw}
            for qid, cid, raw in corpus.qrels.pairs()
        ),
    )


@dataclass(frozen=True)
class CandidatePool:
    case_ids: tuple[str, ...]
    positives: tuple[str, ...]
    hard_negatives: tuple[str, ...]
    soft_negatives: tuple[str, ...]
    soft_shortfall: int = 0
    hard_shortfall: int = 0


def build_candidate_pool(
    positive_ids: Sequence[str],
    corpus_case_ids: Sequence[str],
    retriever_runs: Sequence[Sequence[str]],
    pool_size: int,
    hard_soft_ratio: tuple[int, int] = (1, 4),
    seed: int = 0,
    top_n: int = 100,
) -> CandidatePool:
    """Positives plus sampled hard/soft negatives.

    Hard negatives rank inside the top ``top_n`` of at least one retriever
    run; soft negatives rank outside the top ``top_n`` of every run. The
    non-positive slots are split hard:soft by ``hard_soft_ratio``, rounding
    toward hard. A shortfall in one category is filled from the other.
    """
    if not retriever_runs:
        raise CorpusError("at least one retriever run is required")
    if pool_size > len(corpus_case_ids):
        raise CorpusError(
            f"pool_size {pool_size} exceeds corpus size {len(corpus_case_ids)}"
        )
    positives = list(dict.fromkeys(positive_ids))
    if len(positives) > pool_size:
        raise CorpusError("more positives than pool slots")

    in_top = set()
    for run in retriever_runs:
        in_top.update(run[:top_n])
    positive_set = set(positives)
    hard_pool = sorted(cid for cid in corpus_case_ids if cid in in_top and cid not in positive_set)
    soft_pool = sorted(
        cid for cid in corpus_case_ids if cid not in in_top and cid not in positive_set
    )

    remaining = pool_size - len(positives)
    h, s = hard_soft_ratio
    want_hard = math.ceil(remaining * h / (h + s))
    want_soft = remaining - want_hard

    rng = substream(seed, "candidate-pool")
    hard = rng.sample(hard_pool, min(want_hard, len(hard_pool)))
    soft = rng.sample(soft_pool, min(want_soft, len(soft_pool)))
    soft_shortfall = want_soft - len(soft)
    hard_shortfall = want_hard - len(hard)

    if soft_shortfall > 0:
        extra_pool = sorted(set(hard_pool) - set(hard))
        hard += rng.sample(extra_pool, min(soft_shortfall, len(extra_pool)))
    if hard_shortfall > 0:
        extra_pool = sorted(set(soft_pool) - set(soft))
        soft += rng.sample(extra_pool, min(hard_shortfall, len(extra_pool)))

    return CandidatePool(
        case_ids=tuple(positives + hard + soft),
        positives=tuple(positives),
        hard_negatives=tuple(hard),
        soft_negatives=tuple(soft),
        soft_shortfall=max(0, soft_shortfall),
        hard_shortfall=max(0, hard_shortfall),
    )
