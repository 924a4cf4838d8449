"""Corpus loading, sentence splitting, label normalization, pool building."""

import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lawfuse.corpus import (
    CorpusConfig,
    build_candidate_pool,
    load_corpus,
    normalize_label,
    save_corpus,
    split_sentences,
)
from lawfuse.errors import CorpusError, DataError


def _write_ndjson(path, records):
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records),
        encoding="utf-8",
    )


def make_corpus_files(tmp_path, queries, cases, qrels):
    qp, cp, rp = tmp_path / "q.ndjson", tmp_path / "c.ndjson", tmp_path / "r.ndjson"
    _write_ndjson(qp, queries)
    _write_ndjson(cp, cases)
    _write_ndjson(rp, qrels)
    return qp, cp, rp


class TestSplitSentences:
    def test_two_terminators(self):
        assert split_sentences("甲盗窃。乙销赃。") == ["甲盗窃。", "乙销赃。"]

    def test_no_delimiter(self):
        assert split_sentences("just one sentence") == ["just one sentence"]

    def test_consecutive_terminators_drop_empty(self):
        assert split_sentences("A。。B！") == ["A。", "B！"]

    def test_whitespace_only(self):
        assert split_sentences("  \n ") == []

    def test_trailing_fragment_kept(self):
        assert split_sentences("A。B") == ["A。", "B"]

    @given(st.text(alphabet="AB。！ \n", max_size=60))
    def test_partition_no_characters_lost(self, text):
        sentences = split_sentences(text)
        joined = "".join(sentences)
        # every character of every sentence appears in order in the original
        it = iter(text)
        for ch in joined:
            for orig in it:
                if orig == ch:
                    break
            else:
                pytest.fail("sentence characters not a subsequence of the input")
        # dropped fragments contain no content characters
        residue = text
        for s in sentences:
            residue = residue.replace(s, "", 1)
        assert not residue.replace("。", "").replace("！", "").strip()


class TestNormalizeLabel:
    def test_endpoints(self):
        assert normalize_label(3, 3) == 1.0
        assert normalize_label(0, 3) == 0.0

    def test_partial_match_level(self):
        assert normalize_label(1, 2) == 0.5

    def test_out_of_range(self):
        with pytest.raises(CorpusError):
            normalize_label(4, 3)
        with pytest.raises(CorpusError):
            normalize_label(-1, 3)

    def test_monotone(self):
        values = [normalize_label(r, 5) for r in range(6)]
        assert values == sorted(values)
        assert values[0] == 0.0 and values[-1] == 1.0


class TestLoadCorpus:
    def test_counts(self, tmp_path):
        queries = [{"id": f"q{i}", "text": "甲盗窃。乙销赃。"} for i in range(2)]
        cases = [
            {"id": f"c{i}", "text": "事实一。事实二。", "articles": ["264"]} for i in range(4)
        ]
        qrels = [
            {"query_id": f"q{i}", "case_id": f"c{j}", "label": (i + j) % 4}
            for i in range(2)
            for j in range(4)
        ]
        corpus = load_corpus(*make_corpus_files(tmp_path, queries, cases, qrels))
        assert len(corpus.queries) == 2
        assert len(corpus.cases) == 4
        assert all(len(v) == 4 for v in corpus.candidates.values())
        assert corpus.qrels.normalized("q0", "c1") == pytest.approx(1 / 3)

    def test_dangling_case_reference(self, tmp_path):
        files = make_corpus_files(
            tmp_path,
            [{"id": "q1", "text": "a。"}],
            [{"id": "c1", "text": "b。", "articles": []}],
            [{"query_id": "q1", "case_id": "c9", "label": 1}],
        )
        with pytest.raises(CorpusError, match="c9"):
            load_corpus(*files)

    def test_duplicate_query_id(self, tmp_path):
        files = make_corpus_files(
            tmp_path,
            [{"id": "q1", "text": "a。"}, {"id": "q1", "text": "b。"}],
            [{"id": "c1", "text": "b。", "articles": []}],
            [],
        )
        with pytest.raises(CorpusError, match="duplicate query id"):
            load_corpus(*files)

    def test_malformed_record_reports_line(self, tmp_path):
        qp = tmp_path / "q.ndjson"
        qp.write_text('{"id": "q1", "text": "a。"}\n{"id": "q2"}\n', encoding="utf-8")
        cp, rp = tmp_path / "c.ndjson", tmp_path / "r.ndjson"
        cp.write_text("", encoding="utf-8")
        rp.write_text("", encoding="utf-8")
        with pytest.raises(DataError, match="line 2"):
            load_corpus(qp, cp, rp)

    def test_lecard_shape(self, tmp_path):
        queries = [{"id": f"q{i:03d}", "text": "查明事实。"} for i in range(107)]
        cases = [{"id": f"c{i:05d}", "text": "基本案情。", "articles": []} for i in range(100)]
        qrels = [
            {"query_id": q["id"], "case_id": c["id"], "label": 0}
            for q in queries
            for c in cases
        ]
        corpus = load_corpus(*make_corpus_files(tmp_path, queries, cases, qrels))
        assert len(corpus.queries) == 107
        assert all(len(v) == 100 for v in corpus.candidates.values())

    def test_save_load_round_trip(self, tmp_path):
        files = make_corpus_files(
            tmp_path,
            [{"id": "q1", "text": "甲盗窃。乙销赃。"}],
            [{"id": "c1", "text": "事实。", "articles": ["264", "266"]}],
            [{"query_id": "q1", "case_id": "c1", "label": 2}],
        )
        corpus = load_corpus(*files)
        out = (tmp_path / "q2.ndjson", tmp_path / "c2.ndjson", tmp_path / "r2.ndjson")
        save_corpus(corpus, *out)
        reloaded = load_corpus(*out)
        assert reloaded.queries == corpus.queries
        assert reloaded.cases == corpus.cases
        assert reloaded.qrels == corpus.qrels
        assert reloaded.candidates == corpus.candidates


class TestCandidatePool:
    def _runs(self, ids, rng, n_runs=2, top=100):
        runs = []
        for _ in range(n_runs):
            shuffled = list(ids)
            rng.shuffle(shuffled)
            runs.append(shuffled)
        return runs

    def test_shape_50_with_10_positives(self):
        corpus_ids = [f"c{i:04d}" for i in range(400)]
        positives = corpus_ids[:10]
        rng = random.Random(1)
        runs = self._runs(corpus_ids, rng)
        pool = build_candidate_pool(positives, corpus_ids, runs, 50, (1, 4), seed=42)
        assert len(pool.positives) == 10
        assert len(pool.hard_negatives) == 8
        assert len(pool.soft_negatives) == 32
        assert len(pool.case_ids) == 50
        assert pool.soft_shortfall == 0

    def test_membership_constraints(self):
        corpus_ids = [f"c{i:04d}" for i in range(400)]
        rng = random.Random(5)
        runs = self._runs(corpus_ids, rng)
        top = {cid for run in runs for cid in run[:100]}
        pool = build_candidate_pool(corpus_ids[:5], corpus_ids, runs, 40, (1, 4), seed=9)
        assert all(cid in top for cid in pool.hard_negatives)
        assert all(cid not in top for cid in pool.soft_negatives)
        assert set(pool.positives).isdisjoint(pool.hard_negatives)
        assert set(pool.positives).isdisjoint(pool.soft_negatives)

    def test_soft_shortfall_filled_with_hards(self):
        corpus_ids = [f"c{i:03d}" for i in range(80)]  # all inside every top-100
        runs = [list(corpus_ids), list(reversed(corpus_ids))]
        pool = build_candidate_pool(corpus_ids[:4], corpus_ids, runs, 24, (1, 4), seed=3)
        assert pool.soft_shortfall == 16
        assert not pool.soft_negatives
        assert len(pool.hard_negatives) == 20
        assert len(pool.case_ids) == 24

    def test_deterministic_under_seed(self):
        corpus_ids = [f"c{i:04d}" for i in range(300)]
        rng = random.Random(11)
        runs = self._runs(corpus_ids, rng)
        a = build_candidate_pool(corpus_ids[:6], corpus_ids, runs, 50, (1, 4), seed=7)
        b = build_candidate_pool(corpus_ids[:6], corpus_ids, runs, 50, (1, 4), seed=7)
        c = build_candidate_pool(corpus_ids[:6], corpus_ids, runs, 50, (1, 4), seed=8)
        assert a == b
        assert a != c

    def test_pool_size_exceeds_corpus(self):
        with pytest.raises(CorpusError, match="pool_size"):
            build_candidate_pool(["a"], ["a", "b"], [["a", "b"]], 5, seed=0)


class TestConfig:
    def test_invalid_threshold(self):
        with pytest.raises(CorpusError):
            CorpusConfig(binarize_threshold=1.5)

    def test_invalid_max_level(self):
        with pytest.raises(CorpusError):
            CorpusConfig(max_level=0)
