"""Metric definitions against hand anchors and the frozen two-query fixture."""

import json
import math
import random
from pathlib import Path

import pytest

from lawfuse.corpus import Qrels
from lawfuse.errors import DataError
from lawfuse.metrics import (
    average_precision,
    evaluate_run,
    mean_average_precision,
    ndcg_at_k,
    precision_at_k,
)

FIXTURE = Path(__file__).parent / "fixtures" / "metrics_expected.json"


def _qrels_from(labels_by_query, max_level=3):
    qrels = Qrels(max_level)
    for qid, labels in labels_by_query.items():
        for cid, raw in labels.items():
            qrels.add(qid, cid, raw)
    return qrels


class TestPrecision:
    def test_all_relevant(self):
        assert precision_at_k(list("abcde"), set("abcde"), 5) == 1.0

    def test_none_relevant(self):
        assert precision_at_k(list("abcdefghij"), {"z"}, 10) == 0.0

    def test_three_of_five(self):
        assert precision_at_k(list("abcde"), {"a", "c", "e"}, 5) == 0.6

    def test_denominator_is_k_even_when_short(self):
        assert precision_at_k(["a"], {"a"}, 5) == 0.2


class TestAveragePrecision:
    def test_perfect_prefix(self):
        assert average_precision(["a", "b", "c"], {"a", "b"}) == 1.0

    def test_single_relevant_at_four(self):
        assert average_precision(list("abcd"), {"d"}) == 0.25

    def test_hand_value(self):
        # hits at ranks 2 and 5, R=2: (1/2 + 2/5)/2 = 0.45
        assert average_precision(list("abcde"), {"b", "e"}) == pytest.approx(0.45)

    def test_unretrieved_relevant_counts_in_denominator(self):
        assert average_precision(["a"], {"a", "zz"}) == 0.5

    def test_map_skips_queries_without_relevant(self):
        run = {"q1": ["a", "b"], "q2": ["c"]}
        relevant = {"q1": {"a"}, "q2": set()}
        assert mean_average_precision(run, relevant) == 1.0


class TestNdcg:
    def test_ideal_is_one(self):
        gains = {"a": 1.0, "b": 2 / 3, "c": 0.0}
        assert ndcg_at_k(["a", "b", "c"], gains, 10) == pytest.approx(1.0)

    def test_all_zero_gains(self):
        assert ndcg_at_k(["a", "b"], {"a": 0.0, "b": 0.0}, 10) == 0.0

    def test_hand_value(self):
        # gains in rank order [0, 1], k=2: DCG = 1/log2(3), IDCG = 1
        got = ndcg_at_k(["a", "b"], {"a": 0.0, "b": 1.0}, 2)
        assert got == pytest.approx(1.0 / math.log2(3.0), abs=1e-12)

    def test_reversed_strictly_below_one(self):
        gains = {"a": 1.0, "b": 0.5, "c": 0.0}
        assert ndcg_at_k(["c", "b", "a"], gains, 3) < 1.0

    def test_tie_permutation_invariant(self):
        gains = {"a": 0.5, "b": 0.5, "c": 1.0}
        x = ndcg_at_k(["c", "a", "b"], gains, 3)
        y = ndcg_at_k(["c", "b", "a"], gains, 3)
        assert x == pytest.approx(y, abs=1e-12)

    def test_exp_gain_form(self):
        gains = {"a": 1.0, "b": 0.0}
        got = ndcg_at_k(["b", "a"], gains, 2, gain_form="exp")
        assert got == pytest.approx((2 ** 1.0 - 1) / math.log2(3.0), abs=1e-12)


class TestEvaluateRun:
    def test_frozen_fixture(self):
        fixture = json.loads(FIXTURE.read_text(encoding="utf-8"))
        qrels = _qrels_from(fixture["labels"], fixture["max_level"])
        report = evaluate_run(
            fixture["run"], qrels, binarize_threshold=fixture["binarize_threshold"]
        )
        for metric, want in fixture["means"].items():
            assert report.means[metric] == pytest.approx(want, abs=1e-9), metric
        for qid in ("qa", "qb"):
            for metric, want in fixture["per_query"][qid].items():
                assert report.per_query[metric][qid] == pytest.approx(want, abs=1e-9)

    def test_ideal_ordering_gives_ndcg_one(self):
        rng = random.Random(77)
        for _ in range(100):
            n = rng.randint(1, 40)
            labels = {f"c{i}": rng.randint(0, 3) for i in range(n)}
            if not any(labels.values()):
                labels["c0"] = 3
            qrels = _qrels_from({"q": labels})
            ideal = sorted(labels, key=lambda c: (-labels[c], c))
            report = evaluate_run({"q": ideal}, qrels)
            for k in (10, 20, 30):
                assert report.means[f"NDCG@{k}"] == pytest.approx(1.0, abs=1e-12)

    def test_unknown_query_is_error(self):
        qrels = _qrels_from({"q1": {"a": 1}})
        with pytest.raises(DataError, match="q9"):
            evaluate_run({"q9": ["a"]}, qrels)

    def test_rank_determined_not_score_determined(self):
        # identical orderings must yield identical reports however scores
        # were transformed upstream
        labels = {"a": 3, "b": 1, "c": 0}
        qrels = _qrels_from({"q": labels})
        r1 = evaluate_run({"q": ["b", "a", "c"]}, qrels)
        r2 = evaluate_run({"q": ["b", "a", "c"]}, qrels)
        assert r1.means == r2.means

    def test_skipped_queries_reported(self):
        qrels = _qrels_from({"q1": {"a": 3, "b": 0}, "q2": {"c": 0}})
        report = evaluate_run({"q1": ["a", "b"], "q2": ["c"]}, qrels)
        assert report.skipped_queries == ("q2",)
        # P@k / MAP means averaged over q1 only
        assert report.means["P@5"] == pytest.approx(0.2)
        assert report.means["MAP"] == pytest.approx(1.0)

    def test_report_outputs(self):
        qrels = _qrels_from({"q1": {"a": 3, "b": 0}})
        report = evaluate_run({"q1": ["a", "b"]}, qrels)
        records = report.records()
        assert {"metric": "MAP", "query_id": "mean", "value": 1.0} in records
        assert {"metric": "MAP", "query_id": "q1", "value": 1.0} in records
        table = report.table()
        assert "P@5" in table and "NDCG@30" in table
