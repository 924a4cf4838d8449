import json
import subprocess
import sys
from pathlib import Path

import pytest

ARTICLE_PREDS = {
    "a1": [("A1P1", "alpha beta"), ("A1P2", "gamma delta")],
    "a2": [("A2P1", "epsilon zeta"), ("A2P2", "eta theta")],
    "a3": [("A3P1", "iota kappa"), ("A3P2", "lam mu")],
    "a4": [("A4P1", "nu xi"), ("A4P2", "omicron pi")],
}
CHAPTERS = {"a1": "ch1", "a2": "ch1", "a3": "ch2", "a4": "ch2"}


def _rulebase_text() -> str:
    lines = []
    for article, preds in ARTICLE_PREDS.items():
        for pid, text in preds:
            lines.append(f'pred {pid} @{article} : "{text}"')
        body = " | ".join(pid for pid, _ in preds)
        lines.append(
            f'article {article} chapter {CHAPTERS[article]} : ({body}) -> "charge {article}"'
        )
    return "\n".join(lines) + "\n"


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Small corpus whose cases lexically satisfy their cited articles."""
    outdir = tmp_path_factory.mktemp("exporter-corpus")
    articles = list(ARTICLE_PREDS)
    queries, cases, qrels = [], [], []
    for qi in range(8):
        qid = f"q{qi}"
        topic = articles[qi % 4]
        topic_tokens = " ".join(t for _, text in ARTICLE_PREDS[topic] for t in text.split())
        sentences = [
            f"{topic_tokens} shared{qi}。",
            f"facts one shared{qi} filler{qi}。",
            f"facts two common base。",
            f"unique q{qi} tail。",
        ]
        queries.append({"id": qid, "text": "".join(sentences)})
        for ci in range(6):
            cid = f"c{qi}_{ci}"
            cited = articles[(qi + ci) % 4]
            cited_tokens = " ".join(
                t for _, text in ARTICLE_PREDS[cited] for t in text.split()
            )
            sentences = [
                f"{cited_tokens} holding。",
                f"facts one shared{qi} filler{qi}。" if ci < 2 else f"facts one other{ci}。",
                "facts two common base。",
                f"case c{qi} {ci} details。",
                "procedural history common。",
            ]
            cases.append({"id": cid, "text": "".join(sentences), "articles": [cited]})
            qrels.append(
                {"query_id": qid, "case_id": cid, "label": 2 if cited == topic else 0}
            )

    paths = {
        "queries": outdir / "queries.ndjson",
        "cases": outdir / "cases.ndjson",
        "qrels": outdir / "qrels.ndjson",
        "rulebase": outdir / "rules.lfr",
    }
    for key, records in (("queries", queries), ("cases", cases), ("qrels", qrels)):
        with open(paths[key], "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    paths["rulebase"].write_text(_rulebase_text(), encoding="utf-8")
    return paths


def engine(*args: str) -> subprocess.CompletedProcess:
    """Invoke the installed retrieval engine CLI."""
    return subprocess.run(
        [sys.executable, "-m", "lawfuse.cli", *args],
        capture_output=True,
        text=True,
    )


@pytest.fixture(scope="session")
def pretrain_file(corpus, tmp_path_factory):
    out = tmp_path_factory.mktemp("pretrain") / "train.ndjson"
    proc = engine(
        "prep-train",
        "--cases", str(corpus["cases"]),
        "--rulebase", str(corpus["rulebase"]),
        "--seed", "5",
        "--out", str(out),
    )
    assert proc.returncode == 0, proc.stderr
    return out
