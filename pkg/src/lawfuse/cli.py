"""Command-line pipeline driver.

Commands: ingest, rank, eval, ablate, prep-train, prompts, llm-eval,
rules stats. A flat JSON config file supplies defaults; flags override.
Exit codes: 0 success, 1 usage/config error, 2 data error, 3 endpoint
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

from . import caselevel, lawlevel
from ._util import read_ndjson, write_ndjson
from .corpus import (
    Corpus,
    CorpusConfig,
    Qrels,
    load_cases,
    load_corpus,
    load_qrels,
)
from .caselevel import AlignedPair, CaseExplanation
from .errors import ConfigError, DataError, EndpointError, LawfuseError
from .explain import (
    EndpointConfig,
    Exemplar,
    PromptSpec,
    PromptTemplates,
    RenderConfig,
    build_prompt,
    judge_completion,
    render_explanation,
    run_prompts,
)
from .fol import RuleBase, atom_ids, parse_rulebase
from .fusion import (
    CASE,
    FusionConfig,
    LAW,
    NEURAL,
    ModuleRanking,
    fuse,
    rank_candidates,
    read_run_file,
    write_run_file,
)
from .lawlevel import LawEntry, LawExplanation
from .metrics import evaluate_run
from .scorers import (
    Bm25Relevance,
    EmbeddingTable,
    HashedEmbedder,
    LexicalPredicateScorer,
    ScoreTable,
    TableEmbedder,
    TablePredicateScorer,
    TableRelevance,
)
from .traindata import TraindataConfig, build_pretraining_set, write_pretraining_file

PROMPT_KINDS = (
    "zero_shot_without",
    "zero_shot_with",
    "few_shot_without",
    "few_shot_with",
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors map to exit code 1, not argparse's 2
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a flat JSON object")
    return data


def _opt(args, config: dict, key: str, default=None, required: bool = False):
    value = getattr(args, key.replace("-", "_"), None)
    if value is None:
        value = config.get(key, default)
    if required and value is None:
        raise ConfigError(f"missing required option --{key}")
    return value


def _corpus_config(args, config) -> CorpusConfig:
    return CorpusConfig(
        max_level=int(_opt(args, config, "max-level", 3)),
        delimiters=str(_opt(args, config, "delimiters", CorpusConfig().delimiters)),
        binarize_threshold=float(_opt(args, config, "binarize-threshold", 2.0 / 3.0)),
    )


def _load_inputs(args, config) -> tuple[Corpus, RuleBase]:
    cc = _corpus_config(args, config)
    rulebase_path = _opt(args, config, "rulebase", required=True)
    base = _read_rulebase(rulebase_path)
    corpus = load_corpus(
        _opt(args, config, "queries", required=True),
        _opt(args, config, "cases", required=True),
        _opt(args, config, "qrels", required=True),
        cc,
        base,
    )
    return corpus, base


def _read_rulebase(path: str) -> RuleBase:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read rulebase: {exc}") from exc
    return parse_rulebase(text)


def _read_text(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {what}: {exc}") from exc


def _make_relevance_backend(spec: str, corpus: Corpus):
    if spec == "bm25":
        return Bm25Relevance(corpus.cases.values())
    return TableRelevance(ScoreTable.load(spec))


def _make_predicate_backend(spec: str):
    if spec == "lexical":
        return LexicalPredicateScorer()
    return TablePredicateScorer(ScoreTable.load(spec))


def _make_embedder(spec: str, dim: int):
    if spec == "hashed":
        return HashedEmbedder(dim)
    return TableEmbedder(EmbeddingTable.load(spec))


# ---------------------------------------------------------------------------
# Module computation shared by rank/ablate
# ---------------------------------------------------------------------------

class _QueryResult:
    __slots__ = ("query_id", "neural", "law", "case", "law_records", "case_records")

    def __init__(self, query_id, neural, law, case, law_records, case_records):
        self.query_id = query_id
        self.neural = neural  # cid -> float
        self.law = law  # cid -> float | None
        self.case = case  # cid -> float
        self.law_records = law_records
        self.case_records = case_records


def _compute_query(query_id: str, corpus: Corpus, base: RuleBase, backends, k, exponent_mode):
    relevance, predicates, embedder = backends
    query = corpus.queries[query_id]
    candidate_ids = corpus.candidates[query_id]
    if not candidate_ids:
        raise DataError(f"query {query_id!r} has no judged candidates")
    neural: dict[str, float] = {}
    law: dict[str, float | None] = {}
    case: dict[str, float] = {}
    law_records = []
    case_records = []
    for cid in candidate_ids:
        cand = corpus.cases[cid]
        try:
            neural[cid] = float(relevance.score(query, cand))
        except LawfuseError as exc:
            raise DataError(f"[neural module] {exc}") from exc
        try:
            law_expl = lawlevel.build_law_explanation(query, cand, base, predicates)
            law_score = lawlevel.induce_law_score(law_expl)
        except LawfuseError as exc:
            raise DataError(f"[law module] {exc}") from exc
        law[cid] = law_score.value
        law_records.append(lawlevel.law_explanation_record(law_expl, law_score))
        try:
            case_expl = caselevel.build_case_explanation(query, cand, embedder, k)
            r_case = caselevel.case_score(case_expl, exponent_mode)
        except LawfuseError as exc:
            raise DataError(f"[case module] {exc}") from exc
        case[cid] = r_case
        case_records.append(caselevel.case_explanation_record(case_expl, r_case))
    return _QueryResult(query_id, neural, law, case, law_records, case_records)


def _compute_all(corpus, base, backends, k, exponent_mode, threads: int) -> list[_QueryResult]:
    qids = list(corpus.queries)
    if threads <= 1:
        return [_compute_query(q, corpus, base, backends, k, exponent_mode) for q in qids]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(
            pool.map(lambda q: _compute_query(q, corpus, base, backends, k, exponent_mode), qids)
        )


def _fuse_variant(result: _QueryResult, modules: Sequence[str], cfg: FusionConfig):
    rankings = []
    if NEURAL in modules:
        rankings.append(rank_candidates(NEURAL, result.neural))
    if LAW in modules:
        rankings.append(rank_candidates(LAW, result.law))
    if CASE in modules:
        rankings.append(rank_candidates(CASE, result.case))
    return fuse(rankings, cfg)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _add_corpus_flags(p):
    p.add_argument("--config")
    p.add_argument("--queries")
    p.add_argument("--cases")
    p.add_argument("--qrels")
    p.add_argument("--rulebase")
    p.add_argument("--max-level", type=int)
    p.add_argument("--delimiters")
    p.add_argument("--binarize-threshold", type=float)


def _add_backend_flags(p):
    p.add_argument("--relevance", help="'bm25' or a score file path")
    p.add_argument("--predicates", help="'lexical' or a score file path")
    p.add_argument("--embeddings", help="'hashed' or an embedding file path")
    p.add_argument("--embed-dim", type=int)


def _add_fusion_flags(p):
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--gamma", type=float)
    p.add_argument("--no-clamp", action="store_true", default=None)
    p.add_argument("--exponent-mode", choices=["survivors", "nq_k"])
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)


def _pipeline_options(args, config):
    backends_spec = (
        str(_opt(args, config, "relevance", "bm25")),
        str(_opt(args, config, "predicates", "lexical")),
        str(_opt(args, config, "embeddings", "hashed")),
    )
    fusion_cfg = FusionConfig(
        epsilon=float(_opt(args, config, "epsilon", 60.0)),
        gamma=float(_opt(args, config, "gamma", 2.0)),
        clamp=not bool(_opt(args, config, "no-clamp", False)),
    )
    k = int(_opt(args, config, "k", caselevel.DEFAULT_K))
    exponent_mode = str(_opt(args, config, "exponent-mode", "survivors"))
    dim = int(_opt(args, config, "embed-dim", 512))
    threads = int(_opt(args, config, "threads", 1))
    return backends_spec, fusion_cfg, k, exponent_mode, dim, threads


def cmd_rank(args) -> int:
    config = _load_config(args.config)
    corpus, base = _load_inputs(args, config)
    specs, fusion_cfg, k, exponent_mode, dim, threads = _pipeline_options(args, config)
    backends = (
        _make_relevance_backend(specs[0], corpus),
        _make_predicate_backend(specs[1]),
        _make_embedder(specs[2], dim),
    )
    outdir = Path(_opt(args, config, "outdir", required=True))
    outdir.mkdir(parents=True, exist_ok=True)
    tag = str(_opt(args, config, "tag", "lawfuse"))

    results = _compute_all(corpus, base, backends, k, exponent_mode, threads)
    fused = {r.query_id: _fuse_variant(r, (NEURAL, LAW, CASE), fusion_cfg) for r in results}
    write_run_file(outdir / "fused.run", fused, tag)
    write_ndjson(outdir / "law_explanations.ndjson", (rec for r in results for rec in r.law_records))
    write_ndjson(outdir / "case_explanations.ndjson", (rec for r in results for rec in r.case_records))
    print(f"ranked {len(results)} queries -> {outdir / 'fused.run'}")
    return 0


def cmd_eval(args) -> int:
    config = _load_config(args.config)
    max_level = int(_opt(args, config, "max-level", 3))
    threshold = float(_opt(args, config, "binarize-threshold", 2.0 / 3.0))
    gain_form = str(_opt(args, config, "gain", "linear"))
    qrels = load_qrels(_opt(args, config, "qrels", required=True), max_level)
    run = read_run_file(_opt(args, config, "run", required=True))
    report = evaluate_run(run, qrels, threshold, gain_form=gain_form)
    out_prefix = _opt(args, config, "out")
    if out_prefix:
        Path(f"{out_prefix}.txt").write_text(report.table(), encoding="utf-8")
        write_ndjson(f"{out_prefix}.ndjson", report.records())
    sys.stdout.write(report.table())
    return 0


ABLATE_VARIANTS = (
    ("base", (NEURAL,)),
    ("+law", (NEURAL, LAW)),
    ("+case", (NEURAL, CASE)),
    ("+both", (NEURAL, LAW, CASE)),
)


def cmd_ablate(args) -> int:
    config = _load_config(args.config)
    corpus, base = _load_inputs(args, config)
    specs, fusion_cfg, k, exponent_mode, dim, threads = _pipeline_options(args, config)
    backends = (
        _make_relevance_backend(specs[0], corpus),
        _make_predicate_backend(specs[1]),
        _make_embedder(specs[2], dim),
    )
    threshold = _corpus_config(args, config).binarize_threshold
    gain_form = str(_opt(args, config, "gain", "linear"))
    outdir = Path(_opt(args, config, "outdir", required=True))
    outdir.mkdir(parents=True, exist_ok=True)

    results = _compute_all(corpus, base, backends, k, exponent_mode, threads)
    rows = []
    records = []
    for name, modules in ABLATE_VARIANTS:
        fused = {r.query_id: _fuse_variant(r, modules, fusion_cfg) for r in results}
        safe = name.replace("+", "with_")
        write_run_file(outdir / f"variant_{safe}.run", fused, f"lawfuse-{safe}")
        run = {qid: list(f.order) for qid, f in fused.items()}
        report = evaluate_run(run, corpus.qrels, threshold, gain_form=gain_form)
        rows.append((name, report.means))
        for metric, value in report.means.items():
            records.append({"variant": name, "metric": metric, "value": value})

    metrics_order = list(rows[0][1])
    width = max(len(name) for name, _ in rows) + 2
    lines = ["variant".ljust(width) + "  ".join(m.rjust(8) for m in metrics_order)]
    for name, means in rows:
        lines.append(name.ljust(width) + "  ".join(f"{means[m]:.4f}".rjust(8) for m in metrics_order))
    table = "\n".join(lines) + "\n"
    (outdir / "ablation.txt").write_text(table, encoding="utf-8")
    write_ndjson(outdir / "ablation.ndjson", records)
    sys.stdout.write(table)
    return 0


def cmd_ingest(args) -> int:
    config = _load_config(args.config)
    corpus, base = _load_inputs(args, config)
    n_cand = [len(v) for v in corpus.candidates.values()]
    summary = {
        "queries": len(corpus.queries),
        "cases": len(corpus.cases),
        "qrels": len(corpus.qrels),
        "candidates_per_query_min": min(n_cand) if n_cand else 0,
        "candidates_per_query_max": max(n_cand) if n_cand else 0,
        "avg_sentences_per_query": (
            sum(len(q.sentences) for q in corpus.queries.values()) / len(corpus.queries)
            if corpus.queries
            else 0.0
        ),
        "avg_sentences_per_case": (
            sum(len(c.sentences) for c in corpus.cases.values()) / len(corpus.cases)
            if corpus.cases
            else 0.0
        ),
        "avg_cited_articles_per_case": (
            sum(len(c.cited_article_ids) for c in corpus.cases.values()) / len(corpus.cases)
            if corpus.cases
            else 0.0
        ),
        "cases_without_citations": len(corpus.cases_without_citations()),
        "rulebase_articles": len(base.rules),
    }
    for spec_key, loader in (
        ("relevance", ScoreTable.load),
        ("predicates", ScoreTable.load),
        ("embeddings", EmbeddingTable.load),
    ):
        spec = _opt(args, config, spec_key)
        if spec and spec not in ("bm25", "lexical", "hashed"):
            loader(spec)
            summary[f"validated_{spec_key}"] = spec
    out = _opt(args, config, "out")
    if out:
        Path(out).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    width = max(len(k) for k in summary) + 2
    for key, value in summary.items():
        shown = f"{value:.2f}" if isinstance(value, float) else value
        print(f"{key.ljust(width)}{shown}")
    return 0


def cmd_prep_train(args) -> int:
    config = _load_config(args.config)
    cc = _corpus_config(args, config)
    base = _read_rulebase(_opt(args, config, "rulebase", required=True))
    cases = load_cases(_opt(args, config, "cases", required=True), cc)
    holdout: frozenset[str] = frozenset()
    holdout_path = _opt(args, config, "holdout")
    if holdout_path:
        holdout = frozenset(
            line.strip()
            for line in _read_text(holdout_path, "holdout file").splitlines()
            if line.strip()
        )
    td_config = TraindataConfig(
        top_m=int(_opt(args, config, "top-m", 5)),
        max_query_chars=(
            int(_opt(args, config, "max-query-chars"))
            if _opt(args, config, "max-query-chars") is not None
            else None
        ),
        holdout_case_ids=holdout,
    )
    corpus = Corpus({}, cases, Qrels(cc.max_level), {}, cc, base)
    records, summary = build_pretraining_set(
        corpus, base, td_config, int(_opt(args, config, "seed", 0))
    )
    out = _opt(args, config, "out", required=True)
    write_pretraining_file(records, out)
    for key, value in summary.as_dict().items():
        print(f"{key}: {value}")
    print(f"wrote {len(records)} records -> {out}")
    return 0


def _rebuild_law_explanation(record: dict, base: RuleBase) -> LawExplanation:
    entries = []
    for art in record.get("articles", []):
        rule = base.rules.get(art["article_id"])
        if rule is None:
            raise DataError(f"law explanation cites unknown article {art['article_id']!r}")
        assignment = {p["id"]: float(p["score"]) for p in art["predicates"]}
        defs = []
        for pid in atom_ids(rule.body):
            pred = base.predicates.get(pid)
            if pred is None or pid not in assignment:
                raise DataError(
                    f"law explanation for article {art['article_id']!r} missing predicate {pid!r}"
                )
            defs.append(pred)
        entries.append(LawEntry(rule, tuple(defs), assignment))
    return LawExplanation(record["query_id"], record["case_id"], tuple(entries))


def _rebuild_case_explanation(record: dict) -> CaseExplanation:
    pairs = []
    q_texts = []
    c_texts = []
    for i, p in enumerate(record.get("pairs", [])):
        q_texts.append(p["q_text"])
        c_texts.append(p["c_text"])
        pairs.append(AlignedPair(i, i, float(p["cos"])))
    return CaseExplanation(
        query_id=record["query_id"],
        case_id=record["case_id"],
        pairs=tuple(pairs),
        k=int(record.get("k", caselevel.DEFAULT_K)),
        n_q=len(q_texts),
        n_c=len(c_texts),
        query_sentences=tuple(q_texts),
        case_sentences=tuple(c_texts),
    )


def _load_gold(path: str) -> dict[str, str]:
    gold = {}
    for lineno, rec in read_ndjson(path, "gold"):
        qid = rec.get("query_id")
        charge = rec.get("charge")
        if not isinstance(qid, str) or not isinstance(charge, str):
            raise DataError(f"gold: line {lineno}: need string 'query_id' and 'charge'")
        gold[qid] = charge
    return gold


def cmd_prompts(args) -> int:
    config = _load_config(args.config)
    corpus, base = _load_inputs(args, config)
    run = read_run_file(_opt(args, config, "run", required=True))
    gold = _load_gold(_opt(args, config, "gold", required=True))
    threshold = _corpus_config(args, config).binarize_threshold
    render_cfg = RenderConfig(threshold=float(_opt(args, config, "render-threshold", 0.5)))
    template_dir = _opt(args, config, "templates")
    templates = PromptTemplates.from_dir(template_dir) if template_dir else PromptTemplates.default()
    kinds = _opt(args, config, "kinds", ",".join(PROMPT_KINDS)).split(",")
    for kind in kinds:
        if kind not in PROMPT_KINDS:
            raise ConfigError(f"unknown prompt kind {kind!r}")

    law_by_pair = {}
    for _, rec in read_ndjson(_opt(args, config, "law-explanations", required=True), "law explanations"):
        law_by_pair[(rec["query_id"], rec["case_id"])] = rec
    case_by_pair = {}
    for _, rec in read_ndjson(_opt(args, config, "case-explanations", required=True), "case explanations"):
        case_by_pair[(rec["query_id"], rec["case_id"])] = rec

    def top_relevant(qid: str) -> str | None:
        relevant = corpus.qrels.relevant_for(qid, threshold)
        for cid in run.get(qid, []):
            if cid in relevant:
                return cid
        return None

    def explanation_for(qid: str, cid: str) -> str:
        law_rec = law_by_pair.get((qid, cid))
        case_rec = case_by_pair.get((qid, cid))
        law = _rebuild_law_explanation(law_rec, base) if law_rec else None
        case = _rebuild_case_explanation(case_rec) if case_rec else None
        if law is None and case is None:
            raise DataError(f"no explanations exported for pair ({qid!r}, {cid!r})")
        return render_explanation(law, case, render_cfg)

    exemplar_qid = _opt(args, config, "exemplar-query")
    if exemplar_qid is None:
        for qid in corpus.queries:
            if qid in gold and top_relevant(qid) is not None:
                exemplar_qid = qid
                break
    if exemplar_qid is None:
        raise DataError("no query with a gold charge and a relevant retrieved case for the exemplar")
    ex_cid = top_relevant(exemplar_qid)
    if ex_cid is None or exemplar_qid not in gold:
        raise DataError(f"exemplar query {exemplar_qid!r} lacks a relevant case or gold charge")
    exemplar = Exemplar(
        query=corpus.queries[exemplar_qid].text,
        case=corpus.cases[ex_cid].text,
        answer=gold[exemplar_qid],
        explanation=explanation_for(exemplar_qid, ex_cid),
    )

    records = []
    skipped = []
    for qid, query in corpus.queries.items():
        if qid == exemplar_qid:
            continue
        cid = top_relevant(qid)
        if cid is None:
            skipped.append(qid)
            continue
        explanation = explanation_for(qid, cid)
        for kind in kinds:
            shots, _, with_word = kind.rpartition("_")
            spec = PromptSpec(
                shots=shots,
                with_explanation=(with_word == "with"),
                query=query.text,
                case=corpus.cases[cid].text,
                explanation=explanation,
                exemplar=exemplar if shots == "few_shot" else None,
            )
            records.append(
                {
                    "id": f"{qid}:{kind}",
                    "query_id": qid,
                    "case_id": cid,
                    "kind": kind,
                    "prompt": build_prompt(spec, templates),
                }
            )
    out = _opt(args, config, "out", required=True)
    write_ndjson(out, records)
    note = f" ({len(skipped)} queries without relevant retrieved case skipped)" if skipped else ""
    print(f"wrote {len(records)} prompts -> {out}{note}")
    return 0


def cmd_llm_eval(args) -> int:
    config = _load_config(args.config)
    endpoint = EndpointConfig(
        url=_opt(args, config, "url", required=True),
        model=str(_opt(args, config, "model", required=True)),
        auth_env=_opt(args, config, "auth-env"),
        timeout=float(_opt(args, config, "timeout", 30.0)),
        max_retries=int(_opt(args, config, "max-retries", 2)),
        backoff_base=float(_opt(args, config, "backoff-base", 0.5)),
        concurrency=int(_opt(args, config, "concurrency", 4)),
    )
    gold = _load_gold(_opt(args, config, "gold", required=True))
    prompts = []
    meta = {}
    for lineno, rec in read_ndjson(_opt(args, config, "prompts", required=True), "prompts"):
        for key in ("id", "query_id", "kind", "prompt"):
            if key not in rec:
                raise DataError(f"prompts: line {lineno}: missing field {key!r}")
        prompts.append((rec["id"], rec["prompt"]))
        meta[rec["id"]] = (rec["query_id"], rec["kind"])

    completions = run_prompts(prompts, endpoint)
    records = []
    per_kind: dict[str, list[bool]] = {}
    failures = 0
    for comp in completions:
        qid, kind = meta[comp.prompt_id]
        if comp.completion is None:
            failures += 1
            records.append(
                {
                    "id": comp.prompt_id,
                    "query_id": qid,
                    "kind": kind,
                    "completion": None,
                    "error": comp.error,
                    "matched": None,
                }
            )
            continue
        if qid not in gold:
            raise DataError(f"no gold charge for query {qid!r}")
        judgment = judge_completion(comp.prompt_id, comp.completion, gold[qid])
        per_kind.setdefault(kind, []).append(judgment.matched)
        records.append(
            {
                "id": comp.prompt_id,
                "query_id": qid,
                "kind": kind,
                "completion": comp.completion,
                "error": None,
                "matched": judgment.matched,
            }
        )
    out = _opt(args, config, "out", required=True)
    write_ndjson(out, records)
    for kind in sorted(per_kind):
        matches = per_kind[kind]
        acc = sum(matches) / len(matches)
        print(f"{kind}: accuracy {acc:.4f} ({sum(matches)}/{len(matches)})")
    if failures:
        print(f"{failures} prompts failed permanently")
        if failures == len(completions):
            raise EndpointError("every request failed")
    return 0


def cmd_rules_stats(args) -> int:
    base = _read_rulebase(args.rulebase)
    counts = base.operator_counts()
    chapters = sorted(set(base.chapters.values()))
    rows = [
        ("articles", len(base.rules)),
        ("predicates", len(base.predicates)),
        ("chapters", len(chapters)),
        ("not", counts["not"]),
        ("and", counts["and"]),
        ("or", counts["or"]),
        ("implies", counts["implies"]),
    ]
    for name, value in rows:
        print(f"{name.ljust(12)}{value}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lawfuse", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate and summarize a corpus")
    _add_corpus_flags(p)
    _add_backend_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("rank", help="rank candidates and export explanations")
    _add_corpus_flags(p)
    _add_backend_flags(p)
    _add_fusion_flags(p)
    p.add_argument("--outdir")
    p.add_argument("--tag")
    p.set_defaults(func=cmd_rank)

    p = sub.add_parser("eval", help="score a run file against qrels")
    p.add_argument("--config")
    p.add_argument("--run")
    p.add_argument("--qrels")
    p.add_argument("--max-level", type=int)
    p.add_argument("--binarize-threshold", type=float)
    p.add_argument("--gain", choices=["linear", "exp"])
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="evaluate base, +law, +case, +both variants")
    _add_corpus_flags(p)
    _add_backend_flags(p)
    _add_fusion_flags(p)
    p.add_argument("--gain", choices=["linear", "exp"])
    p.add_argument("--outdir")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("prep-train", help="emit predicate-scorer pretraining data")
    p.add_argument("--config")
    p.add_argument("--cases")
    p.add_argument("--rulebase")
    p.add_argument("--holdout")
    p.add_argument("--top-m", type=int)
    p.add_argument("--max-query-chars", type=int)
    p.add_argument("--max-level", type=int)
    p.add_argument("--delimiters")
    p.add_argument("--binarize-threshold", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_prep_train)

    p = sub.add_parser("prompts", help="build judgment-prediction prompts")
    _add_corpus_flags(p)
    p.add_argument("--run")
    p.add_argument("--law-explanations")
    p.add_argument("--case-explanations")
    p.add_argument("--gold")
    p.add_argument("--kinds")
    p.add_argument("--render-threshold", type=float)
    p.add_argument("--templates")
    p.add_argument("--exemplar-query")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prompts)

    p = sub.add_parser("llm-eval", help="run prompts against an endpoint and score accuracy")
    p.add_argument("--config")
    p.add_argument("--prompts")
    p.add_argument("--gold")
    p.add_argument("--url")
    p.add_argument("--model")
    p.add_argument("--auth-env")
    p.add_argument("--timeout", type=float)
    p.add_argument("--max-retries", type=int)
    p.add_argument("--backoff-base", type=float)
    p.add_argument("--concurrency", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_llm_eval)

    p = sub.add_parser("rules", help="rulebase utilities")
    rules_sub = p.add_subparsers(dest="rules_command", required=True)
    ps = rules_sub.add_parser("stats", help="operator and article counts")
    ps.add_argument("--rulebase", required=True)
    ps.set_defaults(func=cmd_rules_stats)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except EndpointError as exc:
        print(f"endpoint error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
