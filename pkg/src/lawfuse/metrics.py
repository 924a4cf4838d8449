"""Ranking evaluation: P@k, MAP, NDCG@k over runs and graded judgments.

Binary metrics (P@k, MAP) binarize the normalized labels at a threshold;
NDCG uses the normalized labels as gains, linear by default. Discount is
log2(position + 1) with positions starting at 1. Queries without any
relevant candidate are excluded from the P@k/MAP means and reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

from .corpus import Qrels
from .errors import DataError

GainForm = Literal["linear", "exp"]

PRECISION_CUTOFFS = (5, 10)
NDCG_CUTOFFS = (10, 20, 30)


def precision_at_k(ranked_ids: Sequence[str], relevant: set[str], k: int) -> float:
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    hits = sum(1 for cid in ranked_ids[:k] if cid in relevant)
    return hits / k


def average_precision(ranked_ids: Sequence[str], relevant: set[str]) -> float:
    """(1/R) * sum of precision@p over relevant hit positions p."""
    if not relevant:
        raise DataError("average_precision needs at least one relevant candidate")
    hits = 0
    total = 0.0
    for pos, cid in enumerate(ranked_ids, start=1):
        if cid in relevant:
            hits += 1
            total += hits / pos
    return total / len(relevant)


def mean_average_precision(
    run: Mapping[str, Sequence[str]], relevant_by_query: Mapping[str, set[str]]
) -> float:
    """Mean AP over queries that have at least one relevant candidate."""
    values = [
        average_precision(ranked, relevant_by_query[qid])
        for qid, ranked in run.items()
        if relevant_by_query.get(qid)
    ]
    if not values:
        return 0.0
    return sum(values) / len(values)


def _gain(value: float, form: GainForm) -> float:
    if form == "linear":
        return value
    if form == "exp":
        return 2.0 ** value - 1.0
    raise ValueError(f"unknown gain form {form!r}")


def ndcg_at_k(
    ranked_ids: Sequence[str],
    gains: Mapping[str, float],
    k: int,
    gain_form: GainForm = "linear",
) -> float:
    """DCG_k / IDCG_k; 0 when the ideal DCG is 0 (all gains zero)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    dcg = 0.0
    for pos, cid in enumerate(ranked_ids[:k], start=1):
        g = _gain(gains.get(cid, 0.0), gain_form)
        dcg += g / math.log2(pos + 1)
    ideal = sorted(gains.values(), reverse=True)
    idcg = 0.0
    for pos, value in enumerate(ideal[:k], start=1):
        idcg += _gain(value, gain_form) / math.log2(pos + 1)
    if idcg == 0.0:
        return 0.0
    return dcg / idcg


@dataclass(frozen=True)
class MetricReport:
    per_query: dict[str, dict[str, float]]  # metric -> query id -> value
    means: dict[str, float]
    binarize_threshold: float
    precision_cutoffs: tuple[int, ...]
    ndcg_cutoffs: tuple[int, ...]
    skipped_queries: tuple[str, ...] = ()  # no relevant candidate; out of binary means

    def metric_names(self) -> list[str]:
        return list(self.means)

    def records(self) -> list[dict]:
        out = []
        for metric, mean in self.means.items():
            out.append({"metric": metric, "query_id": "mean", "value": mean})
        for metric, values in self.per_query.items():
            for qid, value in values.items():
                out.append({"metric": metric, "query_id": qid, "value": value})
        return out

    def table(self) -> str:
        width = max(len(m) for m in self.means) + 2
        lines = [f"{'metric'.ljust(width)}mean"]
        for metric, mean in self.means.items():
            lines.append(f"{metric.ljust(width)}{mean:.4f}")
        if self.skipped_queries:
            lines.append(
                f"# {len(self.skipped_queries)} queries without relevant candidates "
                f"excluded from P@k/MAP means: {', '.join(self.skipped_queries)}"
            )
        return "\n".join(lines) + "\n"


def evaluate_run(
    run: Mapping[str, Sequence[str]],
    qrels: Qrels,
    binarize_threshold: float = 2.0 / 3.0,
    precision_cutoffs: Sequence[int] = PRECISION_CUTOFFS,
    ndcg_cutoffs: Sequence[int] = NDCG_CUTOFFS,
    gain_form: GainForm = "linear",
) -> MetricReport:
    known = set(qrels.query_ids())
    for qid in run:
        if qid not in known:
            raise DataError(f"run contains query {qid!r} absent from qrels")

    metric_order = [f"P@{k}" for k in precision_cutoffs] + ["MAP"] + [
        f"NDCG@{k}" for k in ndcg_cutoffs
    ]
    per_query: dict[str, dict[str, float]] = {m: {} for m in metric_order}
    skipped: list[str] = []

    for qid, ranked in run.items():
        relevant = qrels.relevant_for(qid, binarize_threshold)
        gains = qrels.gains_for(qid)
        if relevant:
            for k in precision_cutoffs:
                per_query[f"P@{k}"][qid] = precision_at_k(ranked, relevant, k)
            per_query["MAP"][qid] = average_precision(ranked, relevant)
        else:
            skipped.append(qid)
        for k in ndcg_cutoffs:
            per_query[f"NDCG@{k}"][qid] = ndcg_at_k(ranked, gains, k, gain_form)

    means = {
        metric: (sum(values.values()) / len(values) if values else 0.0)
        for metric, values in per_query.items()
    }
    return MetricReport(
        per_query=per_query,
        means=means,
        binarize_threshold=binarize_threshold,
        precision_cutoffs=tuple(precision_cutoffs),
        ndcg_cutoffs=tuple(ndcg_cutoffs),
        skipped_queries=tuple(skipped),
    )
