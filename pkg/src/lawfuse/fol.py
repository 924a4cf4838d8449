"""Propositional rule representations of statute articles.

Rulebase text format (UTF-8, ``#`` starts a comment, one declaration per
line):

    pred P1 @264 : "steals a relatively large amount of private property"
    article 264 chapter 5 : (P1 | P2 | P3) -> "crime of theft"

A rule body combines declared predicate ids with ``!`` (not), ``&`` (and)
and ``|`` (or), parenthesised freely; ``->`` separates the body from the
quoted conclusion the article establishes. The ``chapter`` clause is
optional and defaults to chapter "0".

Scores in [0, 1] propagate through a body via the Lukasiewicz connectives,

    and(s1..sn) = max(0, s1 + ... + sn - n + 1)
    or(s1..sn)  = min(1, s1 + ... + sn)
    not(s)      = 1 - s

which reproduce classical truth values whenever every input is 0 or 1.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Union

from .errors import MissingAssignmentError, RulebaseError, RuleSyntaxError

DEFAULT_CHAPTER = "0"

_KEYWORDS = frozenset({"pred", "article", "chapter"})


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    predicate: str


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("And requires at least two children")


@dataclass(frozen=True)
class Or:
    children: tuple["Formula", ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("Or requires at least two children")


Formula = Union[Atom, Not, And, Or]


@dataclass(frozen=True)
class PredicateDef:
    id: str
    article_id: str
    text: str


@dataclass(frozen=True)
class FolRule:
    article_id: str
    body: Formula
    head: str


@dataclass(frozen=True)
class RuleBase:
    """Predicate declarations plus one rule per article, in source order."""

    predicates: dict[str, PredicateDef] = field(default_factory=dict)
    rules: dict[str, FolRule] = field(default_factory=dict)
    chapters: dict[str, str] = field(default_factory=dict)

    def predicates_of(self, article_id: str) -> list[PredicateDef]:
        return [p for p in self.predicates.values() if p.article_id == article_id]

    def chapter_of(self, article_id: str) -> str:
        return self.chapters[article_id]

    def operator_counts(self) -> dict[str, int]:
        """Connective totals over all rule bodies; n-ary nodes count n-1."""
        counts = {"not": 0, "and": 0, "or": 0, "implies": len(self.rules)}
        for rule in self.rules.values():
            stack = [rule.body]
            while stack:
                node = stack.pop()
                if isinstance(node, Not):
                    counts["not"] += 1
                    stack.append(node.child)
                elif isinstance(node, And):
                    counts["and"] += len(node.children) - 1
                    stack.extend(node.children)
                elif isinstance(node, Or):
                    counts["or"] += len(node.children) - 1
                    stack.extend(node.children)
        return counts


def atoms(formula: Formula) -> Iterator[Atom]:
    """Atoms in first-appearance (left-to-right) order, duplicates included."""
    if isinstance(formula, Atom):
        yield formula
    elif isinstance(formula, Not):
        yield from atoms(formula.child)
    else:
        for child in formula.children:
            yield from atoms(child)


def atom_ids(formula: Formula) -> list[str]:
    """Distinct predicate ids in first-appearance order."""
    seen: dict[str, None] = {}
    for atom in atoms(formula):
        seen.setdefault(atom.predicate, None)
    return list(seen)


# ---------------------------------------------------------------------------
# Lukasiewicz evaluation
# ---------------------------------------------------------------------------

def eval_formula(formula: Formula, assignment: Mapping[str, float]) -> float:
    """Fold predicate scores through the body; result stays in [0, 1]."""
    if isinstance(formula, Atom):
        try:
            return float(assignment[formula.predicate])
        except KeyError:
            raise MissingAssignmentError(
                f"no score assigned to predicate {formula.predicate!r}"
            ) from None
    if isinstance(formula, Not):
        return 1.0 - eval_formula(formula.child, assignment)
    if isinstance(formula, And):
        total = sum(eval_formula(c, assignment) for c in formula.children)
        return max(0.0, total - len(formula.children) + 1.0)
    if isinstance(formula, Or):
        total = sum(eval_formula(c, assignment) for c in formula.children)
        return min(1.0, total)
    raise TypeError(f"not a formula: {formula!r}")


def eval_rule(rule: FolRule, assignment: Mapping[str, float]) -> float:
    """Score of the rule body; the head names the conclusion and is not scored."""
    return eval_formula(rule.body, assignment)


# ---------------------------------------------------------------------------
# Rendering (canonical form)
# ---------------------------------------------------------------------------

def _escape(text: str) -> str:
    out = []
    for ch in text:
        if ch in ('"', "\\"):
            out.append("\\" + ch)
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\t":
            out.append("\\t")
        else:
            out.append(ch)
    return "".join(out)


def render_formula(formula: Formula) -> str:
    """Canonical body text; parentheses only where structure demands them."""
    if isinstance(formula, Atom):
        return formula.predicate
    if isinstance(formula, Not):
        inner = render_formula(formula.child)
        if not isinstance(formula.child, Atom):
            inner = f"({inner})"
        return f"!{inner}"
    if isinstance(formula, And):
        parts = []
        for child in formula.children:
            text = render_formula(child)
            if isinstance(child, (And, Or)):
                text = f"({text})"
            parts.append(text)
        return " & ".join(parts)
    parts = []
    for child in formula.children:
        text = render_formula(child)
        if isinstance(child, Or):
            text = f"({text})"
        parts.append(text)
    return " | ".join(parts)


def render_rule(rule: FolRule, chapter: str | None = None) -> str:
    body = render_formula(rule.body)
    if isinstance(rule.body, (And, Or)):
        body = f"({body})"
    clause = f" chapter {chapter}" if chapter is not None else ""
    return f'article {rule.article_id}{clause} : {body} -> "{_escape(rule.head)}"'


def render_rulebase(base: RuleBase) -> str:
    """Canonical text: predicate declarations first, then rules, source order.

    Chapter clauses are emitted only when they differ from the default, so
    rendering is a fixed point of parse-then-render.
    """
    lines = [
        f'pred {p.id} @{p.article_id} : "{_escape(p.text)}"'
        for p in base.predicates.values()
    ]
    for rule in base.rules.values():
        chapter = base.chapters[rule.article_id]
        lines.append(render_rule(rule, chapter if chapter != DEFAULT_CHAPTER else None))
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # "name", "string", or the punctuation literal
    value: str
    line: int
    col: int


_NAME_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.\-]*")
_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


def _scan_line(text: str, lineno: int) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            break
        col = i + 1
        if ch == '"':
            i += 1
            chunks: list[str] = []
            while True:
                if i >= n:
                    raise RuleSyntaxError("unterminated string", lineno, col)
                ch = text[i]
                if ch == '"':
                    i += 1
                    break
                if ch == "\\":
                    if i + 1 >= n:
                        raise RuleSyntaxError("dangling escape", lineno, i + 1)
                    esc = text[i + 1]
                    if esc not in _ESCAPES:
                        raise RuleSyntaxError(f"unknown escape \\{esc}", lineno, i + 1)
                    chunks.append(_ESCAPES[esc])
                    i += 2
                else:
                    chunks.append(ch)
                    i += 1
            tokens.append(_Token("string", "".join(chunks), lineno, col))
            continue
        if text.startswith("->", i):
            tokens.append(_Token("->", "->", lineno, col))
            i += 2
            continue
        if ch in "@:|&!()":
            tokens.append(_Token(ch, ch, lineno, col))
            i += 1
            continue
        m = _NAME_RE.match(text, i)
        if m:
            tokens.append(_Token("name", m.group(), lineno, col))
            i = m.end()
            continue
        raise RuleSyntaxError(f"unexpected character {ch!r}", lineno, col)
    return tokens


class _LineParser:
    def __init__(self, tokens: list[_Token], lineno: int, line_len: int):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.line_len = line_len

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise RuleSyntaxError("unexpected end of line", self.lineno, self.line_len + 1)
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise RuleSyntaxError(f"expected {what}, got {tok.value!r}", tok.line, tok.col)
        return tok

    def expect_name(self, what: str, allow_keyword: bool = False) -> _Token:
        tok = self.expect("name", what)
        if not allow_keyword and tok.value in _KEYWORDS:
            raise RuleSyntaxError(f"keyword {tok.value!r} cannot be used as {what}", tok.line, tok.col)
        return tok

    def done(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise RuleSyntaxError(f"trailing input {tok.value!r}", tok.line, tok.col)

    # formula grammar: disj := conj ("|" conj)* ; conj := lit ("&" lit)* ;
    # lit := "!"? (ID | "(" disj ")")
    def parse_disj(self) -> Formula:
        parts = [self.parse_conj()]
        while self.peek() is not None and self.peek().kind == "|":
            self.next()
            parts.append(self.parse_conj())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_conj(self) -> Formula:
        parts = [self.parse_lit()]
        while self.peek() is not None and self.peek().kind == "&":
            self.next()
            parts.append(self.parse_lit())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_lit(self) -> Formula:
        tok = self.peek()
        if tok is not None and tok.kind == "!":
            self.next()
            return Not(self.parse_lit_base())
        return self.parse_lit_base()

    def parse_lit_base(self) -> Formula:
        tok = self.next()
        if tok.kind == "(":
            inner = self.parse_disj()
            self.expect(")", "')'")
            return inner
        if tok.kind == "name":
            if tok.value in _KEYWORDS:
                raise RuleSyntaxError(
                    f"keyword {tok.value!r} cannot be used as a predicate", tok.line, tok.col
                )
            return Atom(tok.value)
        raise RuleSyntaxError(f"expected predicate or '(', got {tok.value!r}", tok.line, tok.col)


def parse_rulebase(source: str) -> RuleBase:
    """Parse rulebase text; raises RuleSyntaxError / RulebaseError on defects."""
    predicates: dict[str, PredicateDef] = {}
    rules: dict[str, FolRule] = {}
    chapters: dict[str, str] = {}
    pending_atoms: list[tuple[str, Atom, int, int]] = []  # (article, atom, line, col)

    for lineno, raw in enumerate(source.splitlines(), start=1):
        tokens = _scan_line(raw, lineno)
        if not tokens:
            continue
        parser = _LineParser(tokens, lineno, len(raw))
        head_tok = parser.expect("name", "'pred' or 'article'")
        if head_tok.value == "pred":
            ident = parser.expect_name("a predicate id")
            parser.expect("@", "'@'")
            article = parser.expect_name("an article id")
            parser.expect(":", "':'")
            text = parser.expect("string", "a quoted description")
            parser.done()
            if not text.value:
                raise RulebaseError(f"line {lineno}: predicate {ident.value!r} has empty text")
            if ident.value in predicates:
                raise RulebaseError(f"line {lineno}: duplicate predicate id {ident.value!r}")
            predicates[ident.value] = PredicateDef(ident.value, article.value, text.value)
        elif head_tok.value == "article":
            article = parser.expect_name("an article id")
            chapter = DEFAULT_CHAPTER
            tok = parser.peek()
            if tok is not None and tok.kind == "name" and tok.value == "chapter":
                parser.next()
                chapter = parser.expect_name("a chapter id").value
            parser.expect(":", "':'")
            atom_start = parser.pos
            body = parser.parse_disj()
            parser.expect("->", "'->'")
            head = parser.expect("string", "a quoted conclusion")
            parser.done()
            if not head.value:
                raise RulebaseError(f"line {lineno}: article {article.value!r} has empty conclusion")
            if article.value in rules:
                raise RulebaseError(f"line {lineno}: duplicate rule for article {article.value!r}")
            rules[article.value] = FolRule(article.value, body, head.value)
            chapters[article.value] = chapter
            for tok in parser.tokens[atom_start:]:
                if tok.kind == "name":
                    pending_atoms.append((article.value, Atom(tok.value), tok.line, tok.col))
        else:
            raise RuleSyntaxError(
                f"expected 'pred' or 'article', got {head_tok.value!r}", head_tok.line, head_tok.col
            )

    for article_id, atom, line, col in pending_atoms:
        decl = predicates.get(atom.predicate)
        if decl is None:
            raise RulebaseError(
                f"line {line}, col {col}: rule for article {article_id!r} references "
                f"undeclared predicate {atom.predicate!r}"
            )
        if decl.article_id != article_id:
            raise RulebaseError(
                f"line {line}, col {col}: predicate {atom.predicate!r} belongs to article "
                f"{decl.article_id!r}, not {article_id!r}"
            )
    return RuleBase(predicates, rules, chapters)
