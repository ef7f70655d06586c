"""RDF-style terms: IRIs, literals, triples and the fixed prefix table."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from jarvis_kg.errors import UnknownPrefix

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
AERO_NS = "http://jarvis.example/aero#"

_INT64_MIN = -(2**63)
_INT64_MAX = 2**63 - 1


@dataclass(frozen=True, order=True)
class Iri:
    """Absolute IRI. Equality is byte-equality of the absolute form."""

    value: str

    def __post_init__(self):
        if not self.value:
            raise ValueError("IRI must be non-empty")

    def __repr__(self):
        return f"Iri({self.value!r})"


@dataclass(frozen=True)
class Literal:
    """Typed literal: text, decimal or integer payload."""

    kind: str  # "text" | "decimal" | "integer"
    value: Union[str, float, int]

    def __post_init__(self):
        if self.kind == "text":
            if not isinstance(self.value, str):
                raise ValueError("text literal needs a str payload")
        elif self.kind == "decimal":
            if isinstance(self.value, bool) or not isinstance(self.value, (int, float)):
                raise ValueError("decimal literal needs a numeric payload")
            if not math.isfinite(self.value):
                raise ValueError("decimal literal must be finite")
            object.__setattr__(self, "value", float(self.value))
        elif self.kind == "integer":
            if isinstance(self.value, bool) or not isinstance(self.value, int):
                raise ValueError("integer literal needs an int payload")
            if not _INT64_MIN <= self.value <= _INT64_MAX:
                raise ValueError("integer literal outside signed 64-bit range")
        else:
            raise ValueError(f"unknown literal kind {self.kind!r}")

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("decimal", "integer")


Term = Union[Iri, Literal]


def text(value: str) -> Literal:
    return Literal("text", value)


def decimal(value: float) -> Literal:
    return Literal("decimal", value)


def integer(value: int) -> Literal:
    return Literal("integer", value)


@dataclass(frozen=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, Iri) or not isinstance(self.predicate, Iri):
            raise ValueError("subject and predicate must be IRIs")
        if not isinstance(self.object, (Iri, Literal)):
            raise ValueError("object must be an Iri or a Literal")


class PrefixTable:
    """Fixed, immutable prefix-to-namespace map (rdf, rdfs, aero)."""

    _TABLE = {"rdf": RDF_NS, "rdfs": RDFS_NS, "aero": AERO_NS}

    def namespaces(self) -> dict[str, str]:
        return dict(self._TABLE)

    def expand(self, name: str, line: int = 0, column: int = 0) -> Iri:
        """Resolve a prefixed name like 'aero:HPC' to an absolute Iri."""
        prefix, _, local = name.partition(":")
        if prefix not in self._TABLE:
            raise UnknownPrefix(f"unknown prefix '{prefix}:'", line, column)
        return Iri(self._TABLE[prefix] + local)

    def shrink(self, iri: Iri) -> str | None:
        """Prefixed form of an Iri, or None when no namespace matches."""
        for prefix, ns in self._TABLE.items():
            if iri.value.startswith(ns):
                local = iri.value[len(ns):]
                if local and all(c.isalnum() or c == "_" for c in local):
                    return f"{prefix}:{local}"
        return None


PREFIXES = PrefixTable()


def _escape(s: str) -> str:
    return (
        s.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unescape(s: str) -> str:
    out = []
    i = 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            nxt = s[i + 1]
            out.append({"\\": "\\", '"': '"', "n": "\n", "r": "\r"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def format_decimal(value: float) -> str:
    """Decimal serialization: always carries a fractional part or exponent."""
    s = repr(float(value))
    if "." not in s and "e" not in s and "E" not in s:
        s += ".0"
    return s


def n3(term: Term) -> str:
    """Line-format serialization: <iri>, "text", bare integer, decimal^^decimal."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if term.kind == "text":
        return f'"{_escape(term.value)}"'
    if term.kind == "integer":
        return str(term.value)
    return format_decimal(term.value) + "^^decimal"


def n3_triple(t: Triple) -> str:
    return f"{n3(t.subject)} {n3(t.predicate)} {n3(t.object)} ."


def parse_n3_term(token: str) -> Term:
    """Inverse of n3() for a single already-split token."""
    if token.startswith("<") and token.endswith(">"):
        return Iri(token[1:-1])
    if token.startswith('"') and token.endswith('"'):
        return text(_unescape(token[1:-1]))
    if token.endswith("^^decimal"):
        return decimal(float(token[: -len("^^decimal")]))
    return integer(int(token))


def sort_key(term: Term) -> tuple:
    """Total deterministic order over terms (IRIs before literals)."""
    if isinstance(term, Iri):
        return (0, term.value)
    if term.kind == "text":
        return (1, term.value)
    # numerics sort together by value, then kind for stability
    return (2, float(term.value), term.kind)


def triple_sort_key(t: Triple) -> tuple:
    return (sort_key(t.subject), sort_key(t.predicate), sort_key(t.object))


class _Vocab:
    """Attribute access to aero: vocabulary IRIs (invented namespace)."""

    def __getattr__(self, name: str) -> Iri:
        return Iri(AERO_NS + name)


AERO = _Vocab()
RDF_TYPE = Iri(RDF_NS + "type")
RDFS_LABEL = Iri(RDFS_NS + "label")
RDFS_DOMAIN = Iri(RDFS_NS + "domain")
RDFS_RANGE = Iri(RDFS_NS + "range")
