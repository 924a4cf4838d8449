"""Statute-guided relevance: score a query against the rules a case cites.

Per (query, case) pair: pull the case's cited articles from the rulebase,
score every predicate of those rules against the query, and average the
fuzzy body scores. Cases citing no annotated article stay *unscored*
rather than scoring 0, which would assert an active mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .corpus import CandidateCase, Query
from .errors import RulebaseError
from .fol import FolRule, PredicateDef, RuleBase, atom_ids, eval_rule
from .scorers import predicate_score


@dataclass(frozen=True)
class ExtractedRules:
    rules: tuple[FolRule, ...]
    missing_article_ids: tuple[str, ...]


@dataclass(frozen=True)
class LawEntry:
    """One cited article: its rule, display predicates, and atom scores."""

    rule: FolRule
    predicates: tuple[PredicateDef, ...]  # first appearance order in the body
    assignment: dict[str, float]


@dataclass(frozen=True)
class LawExplanation:
    query_id: str
    case_id: str
    entries: tuple[LawEntry, ...]
    missing_article_ids: tuple[str, ...] = ()

    @property
    def scored(self) -> bool:
        return bool(self.entries)


@dataclass(frozen=True)
class LawScore:
    value: float | None  # None means unscored
    per_article: tuple[tuple[str, float], ...]

    @property
    def scored(self) -> bool:
        return self.value is not None


def extract_rules(case: CandidateCase, base: RuleBase) -> ExtractedRules:
    """Rules for the case's citations, deduplicated, citation order kept."""
    rules: list[FolRule] = []
    missing: list[str] = []
    seen: set[str] = set()
    for article_id in case.cited_article_ids:
        if article_id in seen:
            continue
        seen.add(article_id)
        rule = base.rules.get(article_id)
        if rule is None:
            missing.append(article_id)
        else:
            rules.append(rule)
    return ExtractedRules(tuple(rules), tuple(missing))


def build_law_explanation(
    query: Query, case: CandidateCase, base: RuleBase, predicate_backend
) -> LawExplanation:
    """Score every atom of every cited rule against the query."""
    extracted = extract_rules(case, base)
    entries = []
    for rule in extracted.rules:
        defs = []
        assignment: dict[str, float] = {}
        for pred_id in atom_ids(rule.body):
            pred = base.predicates.get(pred_id)
            if pred is None:
                raise RulebaseError(
                    f"rule {rule.article_id!r} references undeclared predicate {pred_id!r}"
                )
            defs.append(pred)
            assignment[pred_id] = predicate_score(query, pred.text, pred_id, predicate_backend)
        entries.append(LawEntry(rule, tuple(defs), assignment))
    return LawExplanation(query.id, case.id, tuple(entries), extracted.missing_article_ids)


def induce_law_score(explanation: LawExplanation) -> LawScore:
    """Mean of per-article fuzzy body scores; unscored when nothing cited."""
    if not explanation.entries:
        return LawScore(None, ())
    per_article = tuple(
        (entry.rule.article_id, eval_rule(entry.rule, entry.assignment))
        for entry in explanation.entries
    )
    value = sum(score for _, score in per_article) / len(per_article)
    return LawScore(value, per_article)


def law_explanation_record(explanation: LawExplanation, score: LawScore) -> dict:
    """Structured export for one (query, case) pair."""
    body_scores: Mapping[str, float] = dict(score.per_article)
    return {
        "query_id": explanation.query_id,
        "case_id": explanation.case_id,
        "articles": [
            {
                "article_id": entry.rule.article_id,
                "head": entry.rule.head,
                "predicates": [
                    {"id": p.id, "text": p.text, "score": entry.assignment[p.id]}
                    for p in entry.predicates
                ],
                "body_score": body_scores[entry.rule.article_id],
            }
            for entry in explanation.entries
        ],
        "r_law": score.value,
    }
