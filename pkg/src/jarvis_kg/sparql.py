"""Parser and evaluator for the SPARQL subset used by the query templates.

Supported surface: ``SELECT ?v ... WHERE { ... }`` with triple patterns
terminated by ``.``, same-subject continuation with ``;``, the keyword ``a``
for rdf:type, prefixed names from the fixed prefix table, ``<...>`` IRIs,
quoted text literals and bare numeric literals. No FILTER/OPTIONAL/LIMIT or
aggregates; numeric post-processing happens in the fleet layer.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from jarvis_kg.errors import (
    MissingPlaceholder,
    QuerySyntaxError,
    UnboundSelectVar,
)
from jarvis_kg.kg.graph import Graph, terms_match
from jarvis_kg.kg.terms import (
    PREFIXES,
    RDF_TYPE,
    Iri,
    Literal,
    Term,
    decimal,
    format_decimal,
    integer,
    n3,
    text,
)

VAR_RE = re.compile(r"\?[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Var:
    name: str  # without the leading '?'


PatternSlot = Union[Var, Iri, Literal]


@dataclass(frozen=True)
class TriplePattern:
    subject: Union[Var, Iri]
    predicate: Union[Var, Iri]
    object: PatternSlot


@dataclass
class Query:
    select_vars: list[str]
    patterns: list[TriplePattern] = field(default_factory=list)

    def pattern_vars(self) -> set[str]:
        names = set()
        for p in self.patterns:
            for slot in (p.subject, p.predicate, p.object):
                if isinstance(slot, Var):
                    names.add(slot.name)
        return names


# --- tokenizer ---------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # VAR PNAME IRIREF STRING NUMBER PUNCT WORD EOF
    value: str
    line: int
    column: int


_PUNCT = "{}.;"
_WORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PNAME_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*):([A-Za-z_][A-Za-z0-9_]*)")
_NUMBER_RE = re.compile(r"-?\d+(\.\d+)?")


def _tokenize(src: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        start_line, start_col = line, col
        if c == "?":
            m = VAR_RE.match(src, i)
            if not m:
                raise QuerySyntaxError("malformed variable", start_line, start_col)
            tokens.append(_Token("VAR", m.group()[1:], start_line, start_col))
        elif c == "<":
            j = src.find(">", i)
            if j < 0:
                raise QuerySyntaxError("unterminated IRI", start_line, start_col)
            tokens.append(_Token("IRIREF", src[i + 1:j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        elif c == '"':
            j = i + 1
            buf = []
            while j < n and src[j] != '"':
                if src[j] == "\\" and j + 1 < n:
                    buf.append({"\\": "\\", '"': '"', "n": "\n"}.get(src[j + 1], src[j + 1]))
                    j += 2
                else:
                    buf.append(src[j])
                    j += 1
            if j >= n:
                raise QuerySyntaxError("unterminated string", start_line, start_col)
            tokens.append(_Token("STRING", "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        elif c in _PUNCT:
            tokens.append(_Token("PUNCT", c, start_line, start_col))
        elif _NUMBER_RE.match(src, i) and (c.isdigit() or (c == "-" and i + 1 < n and src[i + 1].isdigit())):
            m = _NUMBER_RE.match(src, i)
            tokens.append(_Token("NUMBER", m.group(), start_line, start_col))
        elif _PNAME_RE.match(src, i):
            m = _PNAME_RE.match(src, i)
            tokens.append(_Token("PNAME", m.group(), start_line, start_col))
        elif _WORD_RE.match(src, i):
            m = _WORD_RE.match(src, i)
            tokens.append(_Token("WORD", m.group(), start_line, start_col))
        else:
            raise QuerySyntaxError(f"unexpected character {c!r}", start_line, start_col)
        consumed = len(tokens[-1].value) + (1 if tokens[-1].kind == "VAR" else 0)
        i += consumed
        col += consumed
    tokens.append(_Token("EOF", "", line, col))
    return tokens


# --- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token):
        shown = tok.value or "end of input"
        raise QuerySyntaxError(f"{message}, got {shown!r}", tok.line, tok.column)

    def expect_word(self, word: str):
        tok = self.next()
        if tok.kind != "WORD" or tok.value.upper() != word:
            self.fail(f"expected {word}", tok)

    def expect_punct(self, ch: str):
        tok = self.next()
        if tok.kind != "PUNCT" or tok.value != ch:
            self.fail(f"expected '{ch}'", tok)

    def parse(self) -> Query:
        self.expect_word("SELECT")
        select_vars: list[str] = []
        while self.peek().kind == "VAR":
            select_vars.append(self.next().value)
        self.expect_word("WHERE")
        self.expect_punct("{")
        patterns: list[TriplePattern] = []
        while not (self.peek().kind == "PUNCT" and self.peek().value == "}"):
            if self.peek().kind == "EOF":
                self.fail("unbalanced brace: expected '}'", self.peek())
            patterns.extend(self.group())
        self.expect_punct("}")
        tok = self.next()
        if tok.kind != "EOF":
            self.fail("trailing input after query", tok)
        query = Query(select_vars, patterns)
        unbound = [v for v in select_vars if v not in query.pattern_vars()]
        if unbound:
            raise UnboundSelectVar(
                f"selected variable ?{unbound[0]} never occurs in a pattern"
            )
        return query

    def group(self) -> list[TriplePattern]:
        subject = self.subject()
        patterns = [self.pred_obj(subject)]
        while True:
            tok = self.next()
            if tok.kind == "PUNCT" and tok.value == ";":
                patterns.append(self.pred_obj(subject))
            elif tok.kind == "PUNCT" and tok.value == ".":
                return patterns
            else:
                self.fail("expected ';' or '.'", tok)

    def pred_obj(self, subject) -> TriplePattern:
        return TriplePattern(subject, self.predicate(), self.object())

    def subject(self) -> Union[Var, Iri]:
        tok = self.next()
        if tok.kind == "VAR":
            return Var(tok.value)
        if tok.kind == "IRIREF":
            return Iri(tok.value)
        if tok.kind == "PNAME":
            return PREFIXES.expand(tok.value, tok.line, tok.column)
        self.fail("expected subject (variable or IRI)", tok)

    def predicate(self) -> Union[Var, Iri]:
        tok = self.next()
        if tok.kind == "WORD" and tok.value == "a":
            return RDF_TYPE
        if tok.kind == "VAR":
            return Var(tok.value)
        if tok.kind == "IRIREF":
            return Iri(tok.value)
        if tok.kind == "PNAME":
            return PREFIXES.expand(tok.value, tok.line, tok.column)
        self.fail("expected predicate", tok)

    def object(self) -> PatternSlot:
        tok = self.next()
        if tok.kind == "VAR":
            return Var(tok.value)
        if tok.kind == "IRIREF":
            return Iri(tok.value)
        if tok.kind == "PNAME":
            return PREFIXES.expand(tok.value, tok.line, tok.column)
        if tok.kind == "STRING":
            return text(tok.value)
        if tok.kind == "NUMBER":
            if "." in tok.value:
                return decimal(float(tok.value))
            return integer(int(tok.value))
        self.fail("expected object", tok)


def parse_query(src: str) -> Query:
    return _Parser(_tokenize(src)).parse()


# --- serialization -----------------------------------------------------------

def serialize_term(term: Term) -> str:
    """Query-text form of a term: prefixed name when possible, else N3."""
    if isinstance(term, Iri):
        if term == RDF_TYPE:
            return "a"
        prefixed = PREFIXES.shrink(term)
        return prefixed if prefixed is not None else f"<{term.value}>"
    if term.kind == "text":
        escaped = term.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
        return f'"{escaped}"'
    if term.kind == "integer":
        return str(term.value)
    return format_decimal(term.value)


def _serialize_slot(slot: PatternSlot) -> str:
    if isinstance(slot, Var):
        return f"?{slot.name}"
    return serialize_term(slot)


def serialize_query(query: Query) -> str:
    head = "SELECT " + " ".join(f"?{v}" for v in query.select_vars)
    body = "\n".join(
        f"  {_serialize_slot(p.subject)} {_serialize_slot(p.predicate)}"
        f" {_serialize_slot(p.object)} ."
        for p in query.patterns
    )
    return f"{head.rstrip()}\nWHERE {{\n{body}\n}}\n"


# --- evaluation --------------------------------------------------------------

BindingRow = dict[str, Term]


def _resolve(slot: PatternSlot, binding: BindingRow):
    if isinstance(slot, Var):
        return binding.get(slot.name)
    return slot


def evaluate(graph: Graph, query: Query) -> list[BindingRow]:
    """All distinct rows satisfying every pattern, deterministically ordered.

    Join order is pattern order with backtracking; rows are projected onto
    select_vars and sorted by their serialized form.
    """
    unbound = [v for v in query.select_vars if v not in query.pattern_vars()]
    if unbound:
        raise UnboundSelectVar(
            f"selected variable ?{unbound[0]} never occurs in a pattern"
        )
    graph.materialize()
    rows: dict[tuple, BindingRow] = {}

    def walk(idx: int, binding: BindingRow):
        if idx == len(query.patterns):
            projected = {v: binding[v] for v in query.select_vars}
            rows.setdefault(tuple(n3(projected[v]) for v in query.select_vars), projected)
            return
        pat = query.patterns[idx]
        s = _resolve(pat.subject, binding)
        p = _resolve(pat.predicate, binding)
        o = _resolve(pat.object, binding)
        # bound-but-not-Iri subject/predicate cannot match anything
        if s is not None and not isinstance(s, Iri):
            return
        if p is not None and not isinstance(p, Iri):
            return
        for t in graph.match(s, p, o):
            extended = dict(binding)
            ok = True
            for slot, value in ((pat.subject, t.subject), (pat.predicate, t.predicate),
                                (pat.object, t.object)):
                if isinstance(slot, Var):
                    bound = extended.get(slot.name)
                    if bound is None:
                        extended[slot.name] = value
                    elif not terms_match(bound, value):
                        ok = False
                        break
            if ok:
                walk(idx + 1, extended)

    walk(0, {})
    return [rows[key] for key in sorted(rows)]


# --- template instantiation --------------------------------------------------

PLACEHOLDER_RE = re.compile(r"\[([A-Z][A-Z0-9_]*)\]")


def placeholders(template: str) -> list[str]:
    return list(dict.fromkeys(PLACEHOLDER_RE.findall(template)))


def instantiate(template: str, slots: dict[str, Term]) -> str:
    """Replace each [NAME] with the serialized term; output re-parses."""

    def repl(m: re.Match) -> str:
        name = m.group(1)
        if name not in slots:
            raise MissingPlaceholder(name)
        return serialize_term(slots[name])

    return PLACEHOLDER_RE.sub(repl, template)
