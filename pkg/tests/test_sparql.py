import random

import pytest

from jarvis_kg.errors import (
    MissingPlaceholder,
    QuerySyntaxError,
    UnboundSelectVar,
    UnknownPrefix,
)
from jarvis_kg.kg.graph import Graph, seed_tbox
from jarvis_kg.kg.terms import AERO, RDF_TYPE, decimal, integer, text
from jarvis_kg.sparql import (
    evaluate,
    instantiate,
    parse_query,
    placeholders,
    serialize_query,
)
from oracles import brute_force_evaluate, random_graph_and_query


@pytest.fixture()
def small_graph():
    g = Graph()
    g.add(AERO.e0, RDF_TYPE, AERO.Engine)
    g.add(AERO.e1, RDF_TYPE, AERO.Engine)
    g.add(AERO.e0, AERO.Speed, decimal(80.0))
    g.add(AERO.e1, AERO.Speed, decimal(92.5))
    g.add(AERO.e0, AERO.VR_ID, integer(0))
    g.add(AERO.e1, AERO.VR_ID, integer(1))
    return g


class TestParser:
    def test_basic_query(self):
        q = parse_query("SELECT ?x WHERE { ?x a aero:Engine . }")
        assert q.select_vars == ["x"]
        assert len(q.patterns) == 1
        assert q.patterns[0].predicate == RDF_TYPE

    def test_semicolon_shares_subject(self):
        q = parse_query(
            "SELECT ?s ?v WHERE { ?s a aero:Engine ; aero:Speed ?v . }"
        )
        assert len(q.patterns) == 2
        assert q.patterns[0].subject == q.patterns[1].subject

    def test_literals(self):
        q = parse_query(
            'SELECT ?s WHERE { ?s aero:p "hello" . ?s aero:q 3 . ?s aero:r 3.5 . }'
        )
        assert q.patterns[0].object == text("hello")
        assert q.patterns[1].object == integer(3)
        assert q.patterns[2].object == decimal(3.5)

    def test_angle_bracket_iri(self):
        q = parse_query("SELECT ?s WHERE { ?s <http://x/p> ?s . }")
        assert q.patterns[0].predicate.value == "http://x/p"

    def test_syntax_error_carries_position(self):
        with pytest.raises(QuerySyntaxError) as err:
            parse_query("SELECT ?x WHERE {\n  ?x aero:p }")
        assert err.value.line == 2

    def test_unbalanced_brace(self):
        with pytest.raises(QuerySyntaxError):
            parse_query("SELECT ?x WHERE { ?x aero:p ?y .")

    def test_unknown_prefix(self):
        with pytest.raises(UnknownPrefix):
            parse_query("SELECT ?x WHERE { ?x foaf:name ?x . }")

    def test_unbound_select_var(self):
        with pytest.raises(UnboundSelectVar):
            parse_query("SELECT ?nope WHERE { ?x aero:p ?y . }")

    def test_trailing_garbage(self):
        with pytest.raises(QuerySyntaxError):
            parse_query("SELECT ?x WHERE { ?x aero:p ?y . } LIMIT 5")

    def test_serialize_round_trip(self):
        src = (
            'SELECT ?s ?v\nWHERE {\n  ?s a aero:Engine .\n'
            '  ?s aero:Speed ?v .\n  ?s rdfs:label "the \\"one\\"" .\n}\n'
        )
        q = parse_query(src)
        again = parse_query(serialize_query(q))
        assert again == q
        assert serialize_query(again) == serialize_query(q)


class TestEvaluate:
    def test_join_and_order(self, small_graph):
        rows = evaluate(
            small_graph,
            parse_query(
                "SELECT ?id ?v WHERE { ?e a aero:Engine ; aero:Speed ?v ;"
                " aero:VR_ID ?id . }"
            ),
        )
        assert [(r["id"].value, r["v"].value) for r in rows] == [
            (0, 80.0), (1, 92.5),
        ]

    def test_distinct_rows(self, small_graph):
        small_graph.add(AERO.e0, AERO.alias, AERO.e0prime)
        rows = evaluate(
            small_graph,
            parse_query("SELECT ?e WHERE { ?e a aero:Engine . ?e ?p ?o . }"),
        )
        assert [r["e"] for r in rows] == [AERO.e0, AERO.e1]

    def test_integer_literal_matches_decimal_triple(self, small_graph):
        rows = evaluate(
            small_graph, parse_query("SELECT ?e WHERE { ?e aero:Speed 80 . }")
        )
        assert [r["e"] for r in rows] == [AERO.e0]

    def test_inference_visible_to_queries(self):
        g = seed_tbox(Graph())
        g.add(AERO.h, RDF_TYPE, AERO.HPC)
        rows = evaluate(g, parse_query("SELECT ?x WHERE { ?x a aero:Compressor . }"))
        assert [r["x"] for r in rows] == [AERO.h]

    def test_literal_bound_to_subject_position_matches_nothing(self, small_graph):
        rows = evaluate(
            small_graph,
            parse_query("SELECT ?v WHERE { ?e aero:Speed ?v . ?v aero:Speed ?v . }"),
        )
        assert rows == []

    def test_matches_brute_force_on_random_cases(self):
        rng = random.Random(11)
        checked = 0
        while checked < 40:
            g, q = random_graph_and_query(rng)
            expected = brute_force_evaluate(g, q)
            if expected is None:
                continue
            assert evaluate(g, q) == expected
            checked += 1


class TestTemplates:
    def test_placeholders_in_order(self):
        assert placeholders("[B] x [A] y [B]") == ["B", "A"]

    def test_instantiate_missing_placeholder(self):
        with pytest.raises(MissingPlaceholder):
            instantiate("SELECT ?x WHERE { ?x rdfs:label [NAME] . }", {})

    def test_instantiated_query_parses(self):
        out = instantiate(
            "SELECT ?x WHERE { ?x rdfs:label [NAME] ; aero:Speed [V] . }",
            {"NAME": text("HPC"), "V": decimal(80.0)},
        )
        q = parse_query(out)
        assert q.patterns[0].object == text("HPC")
        assert q.patterns[1].object == decimal(80.0)

    def test_injection_is_inert(self):
        """A hostile slot value stays one quoted literal, not extra syntax."""
        hostile = text('x" . ?s ?p ?o . ?s rdfs:label "y')
        out = instantiate(
            "SELECT ?s WHERE { ?s rdfs:label [NAME] . }", {"NAME": hostile}
        )
        q = parse_query(out)
        assert len(q.patterns) == 1
        assert q.patterns[0].object == hostile

    def test_newline_in_value_round_trips(self):
        value = text("line1\nline2\\end")
        out = instantiate("SELECT ?s WHERE { ?s aero:p [V] . }", {"V": value})
        assert parse_query(out).patterns[0].object == value
