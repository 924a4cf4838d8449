"""Human-readable explanations, judgment-prediction prompts, and the
completion-endpoint client used to score them.

Explanation rendering keeps only predicates at or above a score threshold
and words the remaining rule structure with configurable operator words.
Prompts are built from external template files with named slots, so
translated variants can be swapped in without code changes.
"""

from __future__ import annotations

import time
import unicodedata
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Literal, Mapping, Sequence

import requests

from .caselevel import CaseExplanation
from .errors import ConfigError, EndpointError
from .fol import And, Atom, Formula, Not, Or
from .lawlevel import LawExplanation

NO_SUPPORT_SENTINEL = "no supporting predicates above threshold"


@dataclass(frozen=True)
class RenderConfig:
    threshold: float = 0.5
    and_word: str = "and"
    or_word: str = "or"
    not_word: str = "not"
    language: str = "en"

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ConfigError(f"threshold must lie in [0, 1], got {self.threshold}")


def _prune(formula: Formula, keep: set[str]) -> Formula | None:
    """Drop atoms outside ``keep``; collapse emptied or singleton connectives."""
    if isinstance(formula, Atom):
        return formula if formula.predicate in keep else None
    if isinstance(formula, Not):
        child = _prune(formula.child, keep)
        return Not(child) if child is not None else None
    survivors = [c for c in (_prune(child, keep) for child in formula.children) if c is not None]
    if not survivors:
        return None
    if len(survivors) == 1:
        return survivors[0]
    cls = And if isinstance(formula, And) else Or
    return cls(tuple(survivors))


def _word_formula(formula: Formula, texts: Mapping[str, str], cfg: RenderConfig) -> str:
    if isinstance(formula, Atom):
        return texts[formula.predicate]
    if isinstance(formula, Not):
        inner = _word_formula(formula.child, texts, cfg)
        if not isinstance(formula.child, Atom):
            inner = f"({inner})"
        return f"{cfg.not_word} {inner}"
    word = f" {cfg.and_word} " if isinstance(formula, And) else f" {cfg.or_word} "
    parts = []
    for child in formula.children:
        text = _word_formula(child, texts, cfg)
        if isinstance(child, (And, Or)):
            text = f"({text})"
        parts.append(text)
    return word.join(parts)


def render_explanation(
    law: LawExplanation | None,
    case: CaseExplanation | None,
    cfg: RenderConfig = RenderConfig(),
) -> str:
    """Law part: surviving predicates worded along the rule structure toward
    the conclusion. Case part: one line per aligned sentence pair."""
    if law is None and case is None:
        raise ConfigError("at least one explanation is required")
    lines: list[str] = []
    if law is not None:
        for entry in law.entries:
            keep = {pid for pid, score in entry.assignment.items() if score >= cfg.threshold}
            pruned = _prune(entry.rule.body, keep)
            if pruned is None:
                continue
            texts = {p.id: p.text for p in entry.predicates}
            body = _word_formula(pruned, texts, cfg)
            lines.append(f"Article {entry.rule.article_id}: {body}; therefore: {entry.rule.head}")
    if case is not None:
        for pair in case.pairs:
            lines.append(
                f"query: {case.query_sentences[pair.q_idx]}; "
                f"case: {case.case_sentences[pair.c_idx]}"
            )
    if not lines:
        return NO_SUPPORT_SENTINEL
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Prompts
# ---------------------------------------------------------------------------

Shots = Literal["zero_shot", "few_shot"]


@dataclass(frozen=True)
class Exemplar:
    query: str
    case: str
    answer: str
    explanation: str | None = None


@dataclass(frozen=True)
class PromptSpec:
    shots: Shots
    with_explanation: bool
    query: str
    case: str
    explanation: str | None = None
    exemplar: Exemplar | None = None

    @property
    def kind(self) -> str:
        suffix = "with" if self.with_explanation else "without"
        return f"{self.shots}_{suffix}"

    def __post_init__(self):
        if self.with_explanation and self.explanation is None:
            raise ConfigError("with_explanation prompts need an explanation")
        if self.shots == "few_shot":
            if self.exemplar is None:
                raise ConfigError("few_shot prompts need an exemplar")
            if self.with_explanation and self.exemplar.explanation is None:
                raise ConfigError("few_shot with_explanation needs an exemplar explanation")


class PromptTemplates:
    """Slot-based templates; defaults ship as package resources."""

    def __init__(self, zero_shot: str, few_shot: str):
        self.zero_shot = zero_shot
        self.few_shot = few_shot

    @classmethod
    def default(cls) -> "PromptTemplates":
        pkg = resources.files("lawfuse.templates")
        return cls(
            (pkg / "zero_shot.txt").read_text(encoding="utf-8"),
            (pkg / "few_shot.txt").read_text(encoding="utf-8"),
        )

    @classmethod
    def from_dir(cls, path: str | Path) -> "PromptTemplates":
        path = Path(path)
        return cls(
            (path / "zero_shot.txt").read_text(encoding="utf-8"),
            (path / "few_shot.txt").read_text(encoding="utf-8"),
        )


def _evidence(case: str, explanation: str | None) -> str:
    return case if explanation is None else f"{case} + {explanation}"


def build_prompt(spec: PromptSpec, templates: PromptTemplates | None = None) -> str:
    """Deterministic, byte-stable instantiation of the selected template."""
    templates = templates or PromptTemplates.default()
    evidence = _evidence(spec.case, spec.explanation if spec.with_explanation else None)
    if spec.shots == "zero_shot":
        return templates.zero_shot.format(query=spec.query, evidence=evidence)
    ex = spec.exemplar
    ex_evidence = _evidence(ex.case, ex.explanation if spec.with_explanation else None)
    return templates.few_shot.format(
        exemplar_query=ex.query,
        exemplar_evidence=ex_evidence,
        exemplar_answer=ex.answer,
        query=spec.query,
        evidence=evidence,
    )


# ---------------------------------------------------------------------------
# Completion endpoint client
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EndpointConfig:
    url: str
    model: str
    auth_env: str | None = None
    timeout: float = 30.0
    max_retries: int = 2
    backoff_base: float = 0.5
    concurrency: int = 4


def _request_body(prompt: str, cfg: EndpointConfig) -> dict:
    return {
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": 0,
    }


def query_llm(prompt: str, cfg: EndpointConfig) -> str:
    """POST a temperature-0 chat completion; retry transient failures with
    exponential backoff, then raise EndpointError."""
    import os

    headers = {"Content-Type": "application/json"}
    if cfg.auth_env:
        token = os.environ.get(cfg.auth_env)
        if not token:
            raise ConfigError(f"auth environment variable {cfg.auth_env!r} is not set")
        headers["Authorization"] = f"Bearer {token}"

    last_error = "unknown"
    for attempt in range(cfg.max_retries + 1):
        if attempt:
            time.sleep(cfg.backoff_base * 2 ** (attempt - 1))
        try:
            resp = requests.post(
                cfg.url, json=_request_body(prompt, cfg), headers=headers, timeout=cfg.timeout
            )
        except requests.RequestException as exc:  # transient transport failure
            last_error = f"transport error: {exc}"
            continue
        if resp.status_code >= 500 or resp.status_code == 429:
            last_error = f"status {resp.status_code}"
            continue
        if resp.status_code != 200:
            raise EndpointError(f"endpoint returned status {resp.status_code}: {resp.text[:200]}")
        try:
            return resp.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise EndpointError(f"malformed endpoint response: {exc}") from exc
    raise EndpointError(f"giving up after {cfg.max_retries + 1} attempts ({last_error})")


@dataclass(frozen=True)
class CompletionRecord:
    prompt_id: str
    completion: str | None
    error: str | None = None


def run_prompts(
    prompts: Sequence[tuple[str, str]], cfg: EndpointConfig
) -> list[CompletionRecord]:
    """Fetch completions for (prompt_id, prompt) pairs; per-prompt errors are
    recorded, not raised. Concurrency is capped by the config."""

    def worker(item: tuple[str, str]) -> CompletionRecord:
        pid, prompt = item
        try:
            return CompletionRecord(pid, query_llm(prompt, cfg))
        except (EndpointError, ConfigError) as exc:
            return CompletionRecord(pid, None, error=str(exc))

    with ThreadPoolExecutor(max_workers=max(1, cfg.concurrency)) as pool:
        return list(pool.map(worker, prompts))


# ---------------------------------------------------------------------------
# Charge matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LlmJudgment:
    prompt_id: str
    completion: str
    extracted: str
    matched: bool


def _normalize(text: str) -> str:
    """Drop whitespace, punctuation, and control characters; lowercase."""
    return "".join(
        ch.lower() for ch in text if unicodedata.category(ch)[0] not in ("P", "Z", "C")
    )


def judge_completion(prompt_id: str, completion: str, gold_charge: str) -> LlmJudgment:
    matched = _normalize(gold_charge) in _normalize(completion)
    return LlmJudgment(prompt_id, completion, gold_charge if matched else "", matched)


def judge_accuracy(
    completions: Mapping[str, str], gold: Mapping[str, str]
) -> tuple[float, list[LlmJudgment]]:
    """Fraction of completions containing their gold charge (normalized
    substring match). Raises on a completion without a gold entry."""
    judgments = []
    for prompt_id, completion in completions.items():
        if prompt_id not in gold:
            raise ConfigError(f"no gold charge for prompt {prompt_id!r}")
        judgments.append(judge_completion(prompt_id, completion, gold[prompt_id]))
    if not judgments:
        return 0.0, []
    accuracy = sum(1 for j in judgments if j.matched) / len(judgments)
    return accuracy, judgments
