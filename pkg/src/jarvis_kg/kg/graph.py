"""Indexed in-memory triple store with subclass/type inference.

Inference is forward-chaining materialization of two rules, recomputed
lazily (dirty flag) before any read that needs the closure:

  R1: A isSubclassOf B, B isSubclassOf C  =>  A isSubclassOf C
  R2: x rdf:type A,     A isSubclassOf B  =>  x rdf:type B
"""

from __future__ import annotations

from typing import Iterable, Optional

from jarvis_kg._speed import levenshtein
from jarvis_kg.errors import NoCandidates
from jarvis_kg.kg.terms import (
    AERO,
    RDF_TYPE,
    RDFS_DOMAIN,
    RDFS_LABEL,
    RDFS_RANGE,
    Iri,
    Literal,
    Term,
    Triple,
    decimal,
    integer,
    n3_triple,
    parse_n3_term,
    text,
    triple_sort_key,
)

Pattern = tuple[Optional[Iri], Optional[Iri], Optional[Term]]

# Predicates that can feed an inference rule.
_RULE_PREDICATES = (AERO.isSubclassOf, RDF_TYPE)


def _object_keys(o: Term) -> list[Term]:
    """Index keys a concrete object may live under (3 matches 3.0)."""
    if isinstance(o, Literal) and o.is_numeric:
        keys: list[Term] = [o]
        v = float(o.value)
        if v.is_integer():
            other = integer(int(v)) if o.kind == "decimal" else decimal(v)
            keys.append(other)
        elif o.kind == "integer":  # pragma: no cover - ints are always integral
            pass
        else:
            return [o]
        return keys
    return [o]


def terms_match(a: Term, b: Term) -> bool:
    """Term equality with integer/decimal numeric coercion."""
    if a == b:
        return True
    if isinstance(a, Literal) and isinstance(b, Literal):
        if a.is_numeric and b.is_numeric:
            return float(a.value) == float(b.value)
    return False


class Graph:
    """Triple store with (S,P), (P,O), (O,S) indexes over asserted + inferred."""

    def __init__(self):
        self.asserted: set[Triple] = set()
        self.inferred: set[Triple] = set()
        self._sp: dict[tuple, set[Triple]] = {}
        self._po: dict[tuple, set[Triple]] = {}
        self._os: dict[tuple, set[Triple]] = {}
        self.dirty = False

    # -- index plumbing -------------------------------------------------------

    def _index_add(self, t: Triple):
        self._sp.setdefault((t.subject, t.predicate), set()).add(t)
        self._po.setdefault((t.predicate, t.object), set()).add(t)
        self._os.setdefault((t.object, t.subject), set()).add(t)

    def _index_remove(self, t: Triple):
        for index, key in (
            (self._sp, (t.subject, t.predicate)),
            (self._po, (t.predicate, t.object)),
            (self._os, (t.object, t.subject)),
        ):
            bucket = index.get(key)
            if bucket is not None:
                bucket.discard(t)
                if not bucket:
                    del index[key]

    # -- mutations ------------------------------------------------------------

    def insert(self, t: Triple):
        if t in self.asserted:
            return
        if t in self.inferred:
            self.inferred.discard(t)  # promote; indexes already hold it
            self.asserted.add(t)
            return
        self.asserted.add(t)
        self._index_add(t)
        if t.predicate in _RULE_PREDICATES:
            self.dirty = True

    def add(self, s: Iri, p: Iri, o: Term):
        self.insert(Triple(s, p, o))

    def remove(self, s: Optional[Iri] = None, p: Optional[Iri] = None,
               o: Optional[Term] = None) -> int:
        """Remove asserted triples matching the pattern; returns the count."""
        victims = [t for t in self._candidates(s, p, o)
                   if t in self.asserted and self._matches(t, s, p, o)]
        for t in victims:
            self.asserted.discard(t)
            self._index_remove(t)
        if victims:
            self.dirty = True
        return len(victims)

    # -- matching -------------------------------------------------------------

    def _candidates(self, s, p, o) -> Iterable[Triple]:
        if s is not None and p is not None:
            return self._sp.get((s, p), ())
        if p is not None and o is not None:
            out: list[Triple] = []
            for key_o in _object_keys(o):
                out.extend(self._po.get((p, key_o), ()))
            return out
        if o is not None and s is not None:
            out = []
            for key_o in _object_keys(o):
                out.extend(self._os.get((key_o, s), ()))
            return out
        # zero or one bound position: full scan
        return list(self.asserted) + list(self.inferred)

    @staticmethod
    def _matches(t: Triple, s, p, o) -> bool:
        if s is not None and t.subject != s:
            return False
        if p is not None and t.predicate != p:
            return False
        if o is not None and not terms_match(t.object, o):
            return False
        return True

    def match(self, s: Optional[Iri] = None, p: Optional[Iri] = None,
              o: Optional[Term] = None, asserted_only: bool = False) -> list[Triple]:
        """All matching triples in deterministic (lexicographic) order."""
        if not asserted_only:
            self.materialize()
        found = [t for t in self._candidates(s, p, o) if self._matches(t, s, p, o)]
        if asserted_only:
            found = [t for t in found if t in self.asserted]
        return sorted(set(found), key=triple_sort_key)

    def __contains__(self, t: Triple) -> bool:
        self.materialize()
        return t in self.asserted or t in self.inferred

    def __len__(self) -> int:
        return len(self.asserted) + len(self.inferred)

    # -- inference ------------------------------------------------------------

    def materialize(self):
        """Recompute the R1/R2 fixpoint over the asserted set."""
        if not self.dirty:
            return
        subclass: dict[Iri, set[Iri]] = {}
        types: dict[Iri, set[Term]] = {}
        for t in self.asserted:
            if t.predicate == AERO.isSubclassOf and isinstance(t.object, Iri):
                subclass.setdefault(t.subject, set()).add(t.object)
            elif t.predicate == RDF_TYPE:
                types.setdefault(t.subject, set()).add(t.object)

        # transitive closure of isSubclassOf (cycles tolerated)
        closure: dict[Iri, set[Iri]] = {}
        for start in subclass:
            reached: set[Iri] = set()
            stack = list(subclass[start])
            while stack:
                node = stack.pop()
                if node in reached:
                    continue
                reached.add(node)
                stack.extend(subclass.get(node, ()))
            closure[start] = reached

        new_inferred: set[Triple] = set()
        for a, supers in closure.items():
            for b in supers:
                new_inferred.add(Triple(a, AERO.isSubclassOf, b))
        for x, classes in types.items():
            for c in classes:
                if isinstance(c, Iri):
                    for sup in closure.get(c, ()):
                        new_inferred.add(Triple(x, RDF_TYPE, sup))
        new_inferred -= self.asserted

        for t in self.inferred - new_inferred:
            self._index_remove(t)
        for t in new_inferred - self.inferred:
            self._index_add(t)
        self.inferred = new_inferred
        self.dirty = False

    # -- label lookup ---------------------------------------------------------

    def labels_of(self, resource: Iri) -> list[str]:
        return sorted(
            t.object.value
            for t in self.match(resource, RDFS_LABEL)
            if isinstance(t.object, Literal) and t.object.kind == "text"
        )

    def label_of(self, resource: Iri) -> Optional[str]:
        labels = self.labels_of(resource)
        return labels[0] if labels else None

    def instances_of(self, class_iri: Iri) -> list[Iri]:
        return sorted(
            {t.subject for t in self.match(None, RDF_TYPE, class_iri)},
            key=lambda i: i.value,
        )

    def closest_label(self, class_iri: Iri, raw: str) -> tuple[Iri, str, int]:
        """Instance of class_iri whose rdfs:label is edit-distance nearest to raw.

        Ties break on lexicographically smallest label, then smallest IRI.
        """
        raw_lower = raw.lower()
        best: Optional[tuple[int, str, str]] = None
        for inst in self.instances_of(class_iri):
            for label in self.labels_of(inst):
                cand = (levenshtein(raw_lower, label.lower()), label, inst.value)
                if best is None or cand < best:
                    best = cand
        if best is None:
            raise NoCandidates(
                f"class <{class_iri.value}> has no labeled instances"
            )
        return Iri(best[2]), best[1], best[0]

    # -- line-format import/export --------------------------------------------

    def export_ntriples(self) -> str:
        lines = [n3_triple(t) for t in sorted(self.asserted, key=triple_sort_key)]
        return "\n".join(lines) + ("\n" if lines else "")

    def import_ntriples(self, data: str):
        for raw_line in data.splitlines():
            line = raw_line.strip()
            if not line or line.startswith("#"):
                continue
            if not line.endswith("."):
                raise ValueError(f"line does not end with '.': {line!r}")
            body = line[:-1].strip()
            s_tok, p_tok, o_tok = _split_triple_line(body)
            s = parse_n3_term(s_tok)
            p = parse_n3_term(p_tok)
            o = parse_n3_term(o_tok)
            if not isinstance(s, Iri) or not isinstance(p, Iri):
                raise ValueError(f"subject/predicate must be IRIs: {line!r}")
            self.add(s, p, o)


def _split_triple_line(body: str) -> tuple[str, str, str]:
    """Split '<s> <p> o' respecting quoted literals."""
    parts: list[str] = []
    i = 0
    n = len(body)
    while i < n and len(parts) < 3:
        while i < n and body[i].isspace():
            i += 1
        if i >= n:
            break
        if body[i] == "<":
            j = body.index(">", i) + 1
        elif body[i] == '"':
            j = i + 1
            while j < n:
                if body[j] == "\\":
                    j += 2
                    continue
                if body[j] == '"':
                    j += 1
                    break
                j += 1
        else:
            j = i
            while j < n and not body[j].isspace():
                j += 1
        parts.append(body[i:j])
        i = j
    if len(parts) != 3 or body[i:].strip():
        raise ValueError(f"malformed triple line: {body!r}")
    return parts[0], parts[1], parts[2]


# -- seeded TBox --------------------------------------------------------------

SUBSYSTEM_CLASSES = {
    "fan": AERO.Fan,
    "LPC": AERO.LPC,
    "IPC": AERO.IPC,
    "HPC": AERO.HPC,
}

CHARACTERISTIC_PREDICATES = {
    "Speed": AERO.Speed,
    "Efficiency": AERO.Efficiency,
    "PressureRatio": AERO.PressureRatio,
    "MassFlow": AERO.MassFlow,
    "FlightHours": AERO.FlightHours,
}


def seed_tbox(graph: Graph) -> Graph:
    """Assert the fixed terminology; idempotent (re-seeding adds nothing)."""
    g = graph
    for cls in (AERO.LPC, AERO.IPC, AERO.HPC):
        g.add(cls, AERO.isSubclassOf, AERO.Compressor)
    g.add(AERO.Compressor, AERO.isSubclassOf, AERO.Subsystem)
    g.add(AERO.Fan, AERO.isSubclassOf, AERO.Subsystem)
    g.add(AERO.Compressor, AERO.isDepictedOn, AERO.Plot)
    g.add(AERO.isPartOf, RDFS_DOMAIN, AERO.Subsystem)
    g.add(AERO.isPartOf, RDFS_RANGE, AERO.Engine)
    for label, cls in SUBSYSTEM_CLASSES.items():
        g.add(cls, RDFS_LABEL, text(label))
    for label, pred in CHARACTERISTIC_PREDICATES.items():
        g.add(pred, RDF_TYPE, AERO.Characteristic)
        g.add(pred, RDFS_LABEL, text(label))
    g.add(AERO.Engine, RDFS_LABEL, text("Engine"))
    return g
