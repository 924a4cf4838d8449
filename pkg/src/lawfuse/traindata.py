"""Pretraining data for an external predicate scorer.

For each usable candidate case: a pseudo query from its fact text,
lexically matched predicates of its cited articles as positives, and
negatives split between the cited articles' chapters (hard) and other
chapters (easy). Totals are balanced: negatives = positives, hard:easy
configurable (default 1:1, rounding toward hard).

Output records: {"query": str, "predicate_id": str, "predicate": str,
"label": 0|1, "kind": "pos"|"hard"|"easy"}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ._util import substream, tokenize, write_ndjson
from .corpus import CandidateCase, Corpus
from .errors import DataError
from .fol import RuleBase
from .scorers import Bm25Params, bm25_score


@dataclass(frozen=True)
class PretrainRecord:
    query: str
    predicate_id: str
    predicate: str
    label: int  # 1 positive, 0 negative
    kind: str  # "pos" | "hard" | "easy"

    def __post_init__(self):
        if self.label == 1 and self.kind != "pos":
            raise DataError(f"label 1 record must have kind 'pos', got {self.kind!r}")
        if self.label == 0 and self.kind not in ("hard", "easy"):
            raise DataError(f"label 0 record must be 'hard' or 'easy', got {self.kind!r}")

    def as_dict(self) -> dict:
        return {
            "query": self.query,
            "predicate_id": self.predicate_id,
            "predicate": self.predicate,
            "label": self.label,
            "kind": self.kind,
        }


@dataclass(frozen=True)
class TraindataConfig:
    top_m: int = 5
    max_query_chars: int | None = None
    hard_easy_ratio: tuple[int, int] = (1, 1)
    holdout_case_ids: frozenset[str] = frozenset()


@dataclass
class TraindataSummary:
    cases_used: int = 0
    cases_skipped_holdout: int = 0
    cases_skipped_no_articles: int = 0
    cases_skipped_no_positives: int = 0
    n_pos: int = 0
    n_hard: int = 0
    n_easy: int = 0
    hard_shortfalls: int = 0
    easy_shortfalls: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def make_pseudo_query(case: CandidateCase, max_chars: int | None = None) -> str:
    """The case's fact text, optionally truncated to a prefix."""
    if not case.text:
        raise DataError(f"case {case.id!r} has empty text")
    if max_chars is not None and len(case.text) > max_chars:
        return case.text[:max_chars]
    return case.text


def _predicate_bm25(base: RuleBase, tokenizer: Callable[[str], list[str]]):
    docs = {p.id: tokenizer(p.text) for p in base.predicates.values()}
    params = Bm25Params.from_docs(docs.values())
    return docs, params


def select_positive_predicates(
    pseudo_query: str,
    case: CandidateCase,
    base: RuleBase,
    top_m: int = 5,
    tokenizer: Callable[[str], list[str]] = tokenize,
    _index=None,
) -> list[str]:
    """Predicate ids of cited articles with positive lexical match, ranked.

    Each predicate text is a miniature document; the collection statistics
    cover every predicate in the rulebase.
    """
    cited = [a for a in dict.fromkeys(case.cited_article_ids) if a in base.rules]
    if not cited:
        raise DataError(f"case {case.id!r} cites no annotated article")
    docs, params = _index if _index is not None else _predicate_bm25(base, tokenizer)
    query_tokens = tokenizer(pseudo_query)
    candidates = [p.id for a in cited for p in base.predicates_of(a)]
    scored = [(bm25_score(query_tokens, docs[pid], params), pid) for pid in candidates]
    ranked = sorted(
        ((s, pid) for s, pid in scored if s > 0.0), key=lambda t: (-t[0], t[1])
    )
    return [pid for _, pid in ranked[:top_m]]


def sample_negatives(
    positives: Sequence[str],
    case: CandidateCase,
    base: RuleBase,
    seed: int = 0,
    hard_easy_ratio: tuple[int, int] = (1, 1),
    summary: TraindataSummary | None = None,
) -> list[tuple[str, str]]:
    """(predicate_id, kind) negatives, as many as there are positives.

    Hard negatives come from chapters containing a cited article, easy
    negatives from all other chapters; a shortfall in one category is
    filled from the other and reported on the summary.
    """
    positive_set = set(positives)
    cited_chapters = {
        base.chapters[a] for a in case.cited_article_ids if a in base.rules
    }
    hard_pool = sorted(
        p.id
        for p in base.predicates.values()
        if base.chapters.get(p.article_id) in cited_chapters and p.id not in positive_set
    )
    easy_pool = sorted(
        p.id
        for p in base.predicates.values()
        if base.chapters.get(p.article_id) not in cited_chapters and p.id not in positive_set
    )

    total = len(positives)
    h, e = hard_easy_ratio
    want_hard = math.ceil(total * h / (h + e))
    want_easy = total - want_hard

    rng = substream(seed, f"negatives:{case.id}")
    hard = rng.sample(hard_pool, min(want_hard, len(hard_pool)))
    easy = rng.sample(easy_pool, min(want_easy, len(easy_pool)))
    hard_short = want_hard - len(hard)
    easy_short = want_easy - len(easy)
    if easy_short > 0:
        extra = sorted(set(hard_pool) - set(hard))
        hard += rng.sample(extra, min(easy_short, len(extra)))
    if hard_short > 0:
        extra = sorted(set(easy_pool) - set(easy))
        easy += rng.sample(extra, min(hard_short, len(extra)))
    if summary is not None:
        summary.hard_shortfalls += 1 if hard_short > 0 else 0
        summary.easy_shortfalls += 1 if easy_short > 0 else 0
    return [(pid, "hard") for pid in hard] + [(pid, "easy") for pid in easy]


def build_pretraining_set(
    corpus: Corpus,
    base: RuleBase,
    config: TraindataConfig = TraindataConfig(),
    seed: int = 0,
    tokenizer: Callable[[str], list[str]] = tokenize,
) -> tuple[list[PretrainRecord], TraindataSummary]:
    """One record per (pseudo query, predicate, label); deterministic shuffle."""
    records: list[PretrainRecord] = []
    summary = TraindataSummary()
    index = _predicate_bm25(base, tokenizer) if base.predicates else None
    for case in corpus.cases.values():
        if case.id in config.holdout_case_ids:
            summary.cases_skipped_holdout += 1
            continue
        cited = [a for a in dict.fromkeys(case.cited_article_ids) if a in base.rules]
        if not cited:
            summary.cases_skipped_no_articles += 1
            continue
        pseudo = make_pseudo_query(case, config.max_query_chars)
        positives = select_positive_predicates(
            pseudo, case, base, config.top_m, tokenizer, _index=index
        )
        if not positives:
            summary.cases_skipped_no_positives += 1
            continue
        summary.cases_used += 1
        for pid in positives:
            records.append(
                PretrainRecord(pseudo, pid, base.predicates[pid].text, 1, "pos")
            )
            summary.n_pos += 1
        for pid, kind in sample_negatives(
            positives, case, base, seed, config.hard_easy_ratio, summary
        ):
            records.append(
                PretrainRecord(pseudo, pid, base.predicates[pid].text, 0, kind)
            )
            if kind == "hard":
                summary.n_hard += 1
            else:
                summary.n_easy += 1
    substream(seed, "shuffle").shuffle(records)
    return records, summary


def write_pretraining_file(records: Iterable[PretrainRecord], path: str | Path) -> None:
    write_ndjson(path, (r.as_dict() for r in records))
