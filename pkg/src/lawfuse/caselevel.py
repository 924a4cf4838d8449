"""Sentence-alignment relevance: top-K cosine pairs, geometric-mean score.

Pairs with cosine <= 0 are filtered out before aggregation. The geometric
mean leans toward low scores, so one badly aligned pair drags the whole
case-level score down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .corpus import CandidateCase, Query
from .scorers import cosine, sentence_id

ExponentMode = Literal["survivors", "nq_k"]

DEFAULT_K = 3
PERMITTED_K = (1, 3, 5)


@dataclass(frozen=True)
class AlignedPair:
    q_idx: int
    c_idx: int
    score: float  # cosine in (0, 1]


@dataclass(frozen=True)
class CaseExplanation:
    query_id: str
    case_id: str
    pairs: tuple[AlignedPair, ...]
    k: int
    n_q: int
    n_c: int
    query_sentences: tuple[str, ...] = ()
    case_sentences: tuple[str, ...] = ()


def align_top_k(
    query_vectors: Sequence[np.ndarray],
    case_vectors: Sequence[np.ndarray],
    k: int,
) -> list[AlignedPair]:
    """Per query sentence: the K highest-cosine case sentences, then the
    cosine <= 0 filter. Ties break by ascending case-sentence index."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    pairs: list[AlignedPair] = []
    for i, qv in enumerate(query_vectors):
        scored = [(cosine(qv, cv), j) for j, cv in enumerate(case_vectors)]
        scored.sort(key=lambda t: (-t[0], t[1]))
        for score, j in scored[:k]:
            if score > 0.0:
                pairs.append(AlignedPair(i, j, score))
    pairs.sort(key=lambda p: (p.q_idx, -p.score, p.c_idx))
    return pairs


def induce_case_score(
    pairs: Sequence[AlignedPair],
    exponent_mode: ExponentMode = "survivors",
    n_q: int | None = None,
    k: int | None = None,
) -> float:
    """Geometric mean of surviving pair scores; empty set scores 0.

    ``survivors`` divides the log-sum by the surviving pair count;
    ``nq_k`` uses the nominal N_q * K denominator, which treats filtered
    pairs as if they existed.
    """
    if not pairs:
        return 0.0
    if exponent_mode == "survivors":
        denom = len(pairs)
    elif exponent_mode == "nq_k":
        if n_q is None or k is None:
            raise ValueError("nq_k mode requires n_q and k")
        denom = n_q * k
    else:
        raise ValueError(f"unknown exponent mode {exponent_mode!r}")
    # scores are > 0 after the filter, so logs stay finite
    log_sum = sum(math.log(p.score) for p in pairs)
    return min(1.0, math.exp(log_sum / denom))


def build_case_explanation(
    query: Query,
    case: CandidateCase,
    embedder,
    k: int = DEFAULT_K,
) -> CaseExplanation:
    query_vectors = [
        embedder.embed(s, sentence_id(query.id, i)) for i, s in enumerate(query.sentences)
    ]
    case_vectors = [
        embedder.embed(s, sentence_id(case.id, j)) for j, s in enumerate(case.sentences)
    ]
    pairs = align_top_k(query_vectors, case_vectors, k)
    return CaseExplanation(
        query_id=query.id,
        case_id=case.id,
        pairs=tuple(pairs),
        k=k,
        n_q=len(query.sentences),
        n_c=len(case.sentences),
        query_sentences=query.sentences,
        case_sentences=case.sentences,
    )


def case_score(explanation: CaseExplanation, exponent_mode: ExponentMode = "survivors") -> float:
    return induce_case_score(
        explanation.pairs, exponent_mode, n_q=explanation.n_q, k=explanation.k
    )


def case_explanation_record(explanation: CaseExplanation, score: float) -> dict:
    return {
        "query_id": explanation.query_id,
        "case_id": explanation.case_id,
        "k": explanation.k,
        "pairs": [
            {
                "q_idx": p.q_idx,
                "c_idx": p.c_idx,
                "q_text": explanation.query_sentences[p.q_idx],
                "c_text": explanation.case_sentences[p.c_idx],
                "cos": p.score,
            }
            for p in explanation.pairs
        ],
        "r_case": score,
    }
