"""Batch export of embeddings and scores in the engine's file formats."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .formats import (
    read_docs,
    read_predicate_decls,
    read_qrels_pairs,
    sentence_id,
    split_sentences,
    write_embedding_file,
    write_score_file,
)


@dataclass
class ExportManifest:
    model_id: str
    inputs: dict[str, str] = field(default_factory=dict)  # path -> sha256
    outputs: list[str] = field(default_factory=list)
    dim: int | None = None
    score_range: list[float] | None = None
    seed: int | None = None
    records: int = 0

    def add_input(self, path: str | Path) -> None:
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        self.inputs[str(path)] = digest

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.__dict__, indent=2) + "\n", encoding="utf-8")


def _doc_sentences(queries_path, cases_path) -> list[tuple[str, str]]:
    """(sentence id, sentence text) for every query and case sentence."""
    rows: list[tuple[str, str]] = []
    for path in (queries_path, cases_path):
        for doc_id, rec in read_docs(path).items():
            for idx, sentence in enumerate(split_sentences(rec["text"])):
                rows.append((sentence_id(doc_id, idx), sentence))
    return rows


def export_embeddings(
    queries_path: str | Path,
    cases_path: str | Path,
    encoder,
    out_path: str | Path,
    batch_size: int = 128,
) -> ExportManifest:
    rows = _doc_sentences(queries_path, cases_path)
    manifest = ExportManifest(model_id=encoder.model_id, dim=encoder.dim,
                              seed=getattr(encoder, "seed", None))
    manifest.add_input(queries_path)
    manifest.add_input(cases_path)

    def vectors():
        for start in range(0, len(rows), batch_size):
            chunk = rows[start : start + batch_size]
            encoded = encoder.encode([text for _, text in chunk])
            for (sent_id, _), vec in zip(chunk, encoded):
                yield sent_id, [float(x) for x in vec]

    manifest.records = write_embedding_file(out_path, encoder.dim, vectors())
    manifest.outputs.append(str(out_path))
    return manifest


def required_predicate_pairs(
    queries_path: str | Path,
    cases_path: str | Path,
    qrels_path: str | Path,
    rulebase_path: str | Path,
) -> list[tuple[str, str, str]]:
    """(query id, predicate id, predicate text) covering every pair the
    engine's law level can request: all predicates of annotated articles
    cited by any judged candidate of the query."""
    cases = read_docs(cases_path)
    decls = read_predicate_decls(rulebase_path)
    by_article: dict[str, list[tuple[str, str]]] = {}
    for pid, (article, text) in decls.items():
        by_article.setdefault(article, []).append((pid, text))

    pairs: list[tuple[str, str, str]] = []
    seen: set[tuple[str, str]] = set()
    for query_id, case_id in read_qrels_pairs(qrels_path):
        case = cases.get(case_id)
        if case is None:
            continue
        for article in case.get("articles", []):
            for pid, text in by_article.get(article, []):
                if (query_id, pid) not in seen:
                    seen.add((query_id, pid))
                    pairs.append((query_id, pid, text))
    return pairs


def export_predicate_scores(
    queries_path: str | Path,
    cases_path: str | Path,
    qrels_path: str | Path,
    rulebase_path: str | Path,
    scorer,
    out_path: str | Path,
) -> ExportManifest:
    queries = read_docs(queries_path)
    pairs = required_predicate_pairs(queries_path, cases_path, qrels_path, rulebase_path)
    scores = scorer.score_pairs(
        [(text, queries[qid]["text"]) for qid, _, text in pairs]
    )
    manifest = ExportManifest(model_id="predicate-scorer", score_range=[0.0, 1.0])
    for path in (queries_path, cases_path, qrels_path, rulebase_path):
        manifest.add_input(path)
    manifest.records = write_score_file(
        out_path,
        "predicate",
        0.0,
        1.0,
        (
            (qid, pid, min(1.0, max(0.0, score)))
            for (qid, pid, _), score in zip(pairs, scores)
        ),
    )
    manifest.outputs.append(str(out_path))
    return manifest


def export_relevance_scores(
    queries_path: str | Path,
    cases_path: str | Path,
    qrels_path: str | Path,
    encoder,
    out_path: str | Path,
) -> ExportManifest:
    """Whole-document cosine relevance for every judged (query, case) pair."""
    queries = read_docs(queries_path)
    cases = read_docs(cases_path)
    doc_vec: dict[str, np.ndarray] = {}
    ids = list(queries) + list(cases)
    texts = [queries.get(d, cases.get(d))["text"] for d in ids]
    encoded = encoder.encode(texts)
    for doc_id, vec in zip(ids, encoded):
        doc_vec[doc_id] = vec

    def cos(u, v):
        nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
        if nu == 0.0 or nv == 0.0:
            return 0.0
        return float(np.clip(float(np.dot(u, v)) / (nu * nv), -1.0, 1.0))

    manifest = ExportManifest(model_id=encoder.model_id, score_range=[-1.0, 1.0],
                              seed=getattr(encoder, "seed", None))
    for path in (queries_path, cases_path, qrels_path):
        manifest.add_input(path)
    manifest.records = write_score_file(
        out_path,
        "relevance",
        -1.0,
        1.0,
        (
            (qid, cid, cos(doc_vec[qid], doc_vec[cid]))
            for qid, cid in read_qrels_pairs(qrels_path)
        ),
    )
    manifest.outputs.append(str(out_path))
    return manifest
