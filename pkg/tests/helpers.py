"""Shared test machinery: classical-logic oracle, formula enumeration, and
random rulebase generation. Everything here is independent of the
implementation paths it is used to check."""

from __future__ import annotations

import itertools
import random

from lawfuse.fol import And, Atom, FolRule, Not, Or, PredicateDef, RuleBase

MAX_IDS = 4
PRED_IDS = tuple(f"P{i + 1}" for i in range(MAX_IDS))


def classical_eval(formula, assignment: dict[str, bool]) -> bool:
    """Brute-force classical propositional evaluation."""
    if isinstance(formula, Atom):
        return assignment[formula.predicate]
    if isinstance(formula, Not):
        return not classical_eval(formula.child, assignment)
    if isinstance(formula, And):
        return all(classical_eval(c, assignment) for c in formula.children)
    if isinstance(formula, Or):
        return any(classical_eval(c, assignment) for c in formula.children)
    raise TypeError(formula)


def atom_names(formula) -> set[str]:
    if isinstance(formula, Atom):
        return {formula.predicate}
    if isinstance(formula, Not):
        return atom_names(formula.child)
    out: set[str] = set()
    for child in formula.children:
        out |= atom_names(child)
    return out


def enumerate_formulas(max_depth: int = 3, max_leaves: int = MAX_IDS):
    """All formulas up to the given connective depth with at most
    ``max_leaves`` atom occurrences, enumerated up to predicate renaming.

    Leaves are labeled canonically (each leaf reuses an already-introduced
    id or introduces the next fresh one), which covers every formula in the
    class modulo a bijective renaming of predicates; endpoint soundness is
    invariant under such renamings because assignments range over all
    boolean vectors.
    """

    def formulas(depth: int, budget: int, fresh: int):
        if budget >= 1:
            for k in range(fresh):
                yield Atom(PRED_IDS[k]), 1, fresh
            if fresh < MAX_IDS:
                yield Atom(PRED_IDS[fresh]), 1, fresh + 1
        if depth >= 1:
            for child, used, end in formulas(depth - 1, budget, fresh):
                yield Not(child), used, end
            for arity in range(2, budget + 1):
                for children, used, end in child_lists(arity, depth - 1, budget, fresh):
                    yield And(children), used, end
                    yield Or(children), used, end

    def child_lists(arity: int, depth: int, budget: int, fresh: int):
        if arity == 1:
            for f, used, end in formulas(depth, budget, fresh):
                yield (f,), used, end
            return
        # reserve one leaf for each remaining sibling
        for f, used, end in formulas(depth, budget - (arity - 1), fresh):
            for rest, rest_used, rest_end in child_lists(arity - 1, depth, budget - used, end):
                yield (f,) + rest, used + rest_used, rest_end

    for formula, _, _ in formulas(max_depth, max_leaves, 0):
        yield formula


def endpoint_assignments(names: set[str]):
    ordered = sorted(names)
    for values in itertools.product((False, True), repeat=len(ordered)):
        yield dict(zip(ordered, values))


# ---------------------------------------------------------------------------
# Random rulebase generation
# ---------------------------------------------------------------------------

_HEAD_CHARS = 'abc XYZ0 9"\\\n\t盗窃罪#|&!->()'


def random_text(rng: random.Random, lo: int = 1, hi: int = 24) -> str:
    n = rng.randint(lo, hi)
    return "".join(rng.choice(_HEAD_CHARS) for _ in range(n))


def random_formula(rng: random.Random, pred_ids, depth: int):
    if depth == 0 or rng.random() < 0.3:
        return Atom(rng.choice(pred_ids))
    roll = rng.random()
    if roll < 0.2:
        return Not(random_formula(rng, pred_ids, depth - 1))
    cls = And if roll < 0.6 else Or
    arity = rng.randint(2, 4)
    return cls(tuple(random_formula(rng, pred_ids, depth - 1) for _ in range(arity)))


def random_rulebase(rng: random.Random) -> RuleBase:
    predicates: dict[str, PredicateDef] = {}
    rules: dict[str, FolRule] = {}
    chapters: dict[str, str] = {}
    n_articles = rng.randint(1, 5)
    pred_counter = 0
    for a in range(n_articles):
        article_id = f"{100 + a * 7}{rng.choice(['', '-1', '.2'])}"
        ids = []
        for _ in range(rng.randint(1, 6)):
            pred_counter += 1
            pid = f"P{pred_counter}"
            predicates[pid] = PredicateDef(
                pid, article_id, random_text(rng).strip() or "fact"
            )
            ids.append(pid)
        body = random_formula(rng, ids, rng.randint(0, 3))
        head = random_text(rng).strip() or "charge"
        rules[article_id] = FolRule(article_id, body, head)
        chapters[article_id] = rng.choice(["0", "1", "2", "ch5"])
    return RuleBase(predicates, rules, chapters)
