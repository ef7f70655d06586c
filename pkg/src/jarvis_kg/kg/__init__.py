"""Knowledge-graph layer: terms, triple store, inference, seeded terminology."""

from jarvis_kg.kg.graph import (
    CHARACTERISTIC_PREDICATES,
    Graph,
    SUBSYSTEM_CLASSES,
    seed_tbox,
    terms_match,
)
from jarvis_kg.kg.terms import (
    AERO,
    AERO_NS,
    PREFIXES,
    RDF_TYPE,
    RDFS_LABEL,
    Iri,
    Literal,
    PrefixTable,
    Term,
    Triple,
    decimal,
    format_decimal,
    integer,
    n3,
    text,
)

__all__ = [
    "AERO",
    "AERO_NS",
    "CHARACTERISTIC_PREDICATES",
    "Graph",
    "Iri",
    "Literal",
    "PREFIXES",
    "PrefixTable",
    "RDF_TYPE",
    "RDFS_LABEL",
    "SUBSYSTEM_CLASSES",
    "Term",
    "Triple",
    "decimal",
    "format_decimal",
    "integer",
    "n3",
    "seed_tbox",
    "terms_match",
    "text",
]
