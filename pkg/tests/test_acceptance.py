"""Acceptance suite: one test per criterion, one printed PASS/FAIL line each.

Run with ``pytest -v tests/test_acceptance.py`` — each test name is one
criterion; the explicit summary line is printed on stdout as well.
"""

import json
import random
import re
import string
import sys
import time
from pathlib import Path

import pytest

from jarvis_kg.handlers import format_value
from jarvis_kg.kg.graph import Graph
from jarvis_kg.kg.terms import AERO, RDF_TYPE, Iri
from jarvis_kg.nlu import REGISTRY, classify, clear_enum, clear_number, tokenize
from jarvis_kg.service import JarvisService, load_templates, packaged_data_path
from jarvis_kg.sparql import evaluate
from jarvis_kg._speed import levenshtein
from oracles import (
    brute_force_evaluate,
    exhaustive_closure,
    random_graph_and_query,
    sampled_boundary_distance,
)
from test_fleet import minimal_engine
from test_handlers import random_map


def _report(name: str, ok: bool, detail: str = ""):
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] {name}"
    if detail:
        line += f" — {detail}"
    print(line)
    assert ok, line


GOLDEN = [
    (
        "Which engine's HPC is running at the highest efficiency?",
        {"engineID": 0, "subsystem": "HPC",
         "message": "HPC of engine 0 has the highest value of Efficiency."
                    " It is equal to 88.1635"},
    ),
    (
        "At what speed is HPC of Engine 3 running at?",
        {"engineID": 3, "subsystem": "HPC",
         "message": "HPC of engine 3 has Speed equal to 80.0"},
    ),
]


def test_criterion_1_golden_round_trips(demo_service):
    worst = 0.0
    for question, expected in GOLDEN:
        start = time.perf_counter()
        wire = demo_service.ask(question).to_wire()
        elapsed = time.perf_counter() - start
        worst = max(worst, elapsed)
        assert wire == expected, (question, wire)
        assert elapsed < 1.0, f"{question!r} took {elapsed:.3f}s"
    _report("golden round trips (byte-exact, < 1 s each)", True,
            f"worst {worst * 1000:.1f} ms")


def test_criterion_2_training_self_classification(demo_service):
    marker = re.compile(r"\[([^\]\[]+)\]\(([A-Za-z_][A-Za-z0-9_]*)\)")
    src = packaged_data_path("intents.md").read_text(encoding="utf-8")
    total = correct = 0
    intent = None
    for line in src.splitlines():
        line = line.strip()
        if line.startswith("## intent:"):
            intent = line.split(":", 1)[1].strip()
            continue
        if not line.startswith("- "):
            continue
        body = line[2:]
        expected_slots = {
            m.group(2): " ".join(tokenize(m.group(1)))
            for m in marker.finditer(body)
        }
        sentence = marker.sub(lambda m: m.group(1), body)
        total += 1
        command = classify(sentence, demo_service.specs)
        if (command is not None and command.intent == intent
                and command.raw_slots == expected_slots):
            correct += 1
        else:
            print(f"  misclassified: {sentence!r} -> {command}")
    assert total >= 20
    _report("training-sentence self-classification (100%)",
            correct == total, f"{correct}/{total}")


def test_criterion_3_sparql_oracle_equivalence():
    rng = random.Random(2024)
    start = time.perf_counter()
    checked = 0
    while checked < 500:
        graph, query = random_graph_and_query(rng)
        expected = brute_force_evaluate(graph, query)
        if expected is None:  # combination blow-up; draw another case
            continue
        got = evaluate(graph, query)
        assert got == expected, (query, got, expected)
        checked += 1
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0, f"oracle comparison took {elapsed:.1f}s"
    _report("SPARQL-subset oracle equivalence (500 cases, < 30 s)", True,
            f"{elapsed:.1f}s")


def test_criterion_4_inference_fixpoint():
    rng = random.Random(99)
    for _ in range(200):
        g = Graph()
        classes = [getattr(AERO, f"C{i}") for i in range(rng.randint(2, 10))]
        for _ in range(rng.randint(1, 18)):
            g.add(rng.choice(classes), AERO.isSubclassOf, rng.choice(classes))
        for i in range(rng.randint(0, 8)):
            g.add(getattr(AERO, f"x{i}"), RDF_TYPE, rng.choice(classes))
        g.materialize()
        closure = g.asserted | g.inferred
        assert closure == exhaustive_closure(g.asserted)
        g.dirty = True
        g.materialize()
        assert g.asserted | g.inferred == closure  # idempotent
    _report("inference fixpoint equals exhaustive rule application"
            " (200 graphs, idempotent)", True)


def _one_edit_variants(word: str):
    alphabet = string.ascii_lowercase + " "
    for i in range(len(word)):
        yield word[:i] + word[i + 1:]
        for c in alphabet:
            if c != word[i]:
                yield word[:i] + c + word[i + 1:]
    for i in range(len(word) + 1):
        for c in alphabet:
            yield word[:i] + c + word[i:]


def test_criterion_5_value_clearing(demo_service):
    assert clear_number("one hundred") == 100.0
    command = classify("Where is the fourth engine right now?", demo_service.specs)
    from jarvis_kg.nlu import clear_slots
    cleared = clear_slots(command, demo_service.graph)
    assert cleared.slots["engine_name"] == AERO.Engine_4

    checked = skipped = 0
    for slot in REGISTRY.values():
        if slot.kind != "enum":
            continue
        members = [m.lower() for m in slot.members]
        for member in slot.members:
            for variant in set(_one_edit_variants(member.lower())):
                if not variant:
                    continue
                # a variant at distance <= 1 of a different member is ambiguous
                others = [m for m in members if m != member.lower()]
                if any(levenshtein(variant, m) <= 1 for m in others):
                    skipped += 1
                    continue
                resolved = clear_enum(variant, slot.members)
                assert resolved == member, (variant, resolved, member)
                checked += 1
    _report("value clearing (word numbers, ordinals, exhaustive 1-edit"
            " enum typos)", True, f"{checked} typos checked, {skipped} ambiguous")


def test_criterion_6_update_propagation(service):
    service.add_update_method({
        "characteristic": "SS",
        "func_args": ["MassFlow", "PressureRatio"],
        "func_expr": (
            "if sub == 'LPC' { sqrt(MassFlow) * 4 - PressureRatio }"
            " else if sub == 'HPC' { MassFlow * 12 - PressureRatio ^ 0.5 }"
            " else { MassFlow * 10 - PressureRatio }"
        ),
    })
    service.update_values({
        "engine_id": 3, "subsystem": "HPC",
        "values": {"MassFlow": 0.64}, "flight_hours": 250,
    })
    hand = 0.64 * 12 - (4.1 + 0.03 * 3) ** 0.5
    got = service.fleet.subsystem(3, "HPC").characteristics["SS"]
    assert got == pytest.approx(hand, abs=1e-12)

    from jarvis_kg.errors import DependencyCycle
    service.add_update_method({
        "characteristic": "P", "func_args": ["Q"], "func_expr": "Q + 1",
    })
    with pytest.raises(DependencyCycle):
        service.add_update_method({
            "characteristic": "Q", "func_args": ["P"], "func_expr": "P + 1",
        })
    _report("update propagation (hand evaluation to 1e-12, cycle rejected)",
            True)


def _random_closest_fleet(rng: random.Random):
    engines = []
    for vr_id in range(rng.randint(2, 4)):
        cmap = random_map(rng)
        xs = [p[0] for line in cmap.polylines() for p in line]
        ys = [p[1] for line in cmap.polylines() for p in line]
        spec = minimal_engine(vr_id, label=str(vr_id))
        hpc = spec["subsystems"]["HPC"]
        hpc["characteristics"]["MassFlow"] = round(rng.uniform(min(xs), max(xs)), 4)
        hpc["characteristics"]["PressureRatio"] = round(rng.uniform(min(ys), max(ys)), 4)
        hpc["characteristics"]["Speed"] = 80.0
        hpc["history"] = []
        hpc["map"] = cmap.to_dict()
        engines.append(spec)
    return {"engines": engines}


def test_criterion_7_closest_matches_dense_oracle(demo_service):
    from jarvis_kg.fleet import fleet_from_dict
    from jarvis_kg.nlu import parse_training_file

    specs = demo_service.specs
    templates = load_templates(packaged_data_path("templates"))
    rng = random.Random(31337)
    margin_re = re.compile(r"Margin is ([-0-9.]+)")
    for case in range(100):
        fleet = fleet_from_dict(_random_closest_fleet(rng))
        svc = JarvisService(fleet, specs, templates)
        state = rng.choice(["stall", "choke"])
        response = svc.ask(
            f"Identify which engine's HPC is the closest to {state}."
        )
        assert response.engine_id is not None, response.message
        oracle = {}
        for vr_id, engine in fleet.engines.items():
            sub = engine.subsystems["HPC"]
            boundary = sub.map.stall_line if state == "stall" else sub.map.choke_line
            point = (sub.characteristics["MassFlow"],
                     sub.characteristics["PressureRatio"])
            oracle[vr_id] = sampled_boundary_distance(
                point, boundary, sub.map.axis_ranges()
            )
        best = min(oracle.values())
        # the chosen engine must be a true minimizer (to sampling tolerance)
        assert oracle[response.engine_id] <= best + 1e-6, (case, oracle, response)
        reported = float(margin_re.search(response.message).group(1))
        assert reported == pytest.approx(
            float(format_value(oracle[response.engine_id])), abs=1e-4
        )
    _report("closest-to-stall/choke equals dense-sampling oracle"
            " (100 random fleets, 1e-6)", True)


def test_criterion_8_fuzz_totality(demo_service):
    rng = random.Random(0xFEED)
    vocab = ("engine hpc lpc ipc fan show me where is the at what speed"
             " closest stall choke efficiency which running highest").split()
    start = time.perf_counter()
    for i in range(100_000):
        kind = rng.random()
        if kind < 0.4:
            s = "".join(chr(rng.randint(1, 0x10FFFF - 2048)) for _ in range(rng.randint(0, 24)))
        elif kind < 0.8:
            s = " ".join(rng.choice(vocab) for _ in range(rng.randint(0, 12)))
        else:
            s = "".join(rng.choice(string.printable) for _ in range(rng.randint(0, 40)))
        wire = demo_service.ask(s).to_wire()
        assert set(wire) == {"engineID", "subsystem", "message"}
        assert isinstance(wire["message"], str) and wire["message"]
        assert wire["engineID"] is None or isinstance(wire["engineID"], int)
    elapsed = time.perf_counter() - start
    _report("fuzz totality (100000 strings, zero crashes)", True,
            f"{elapsed:.1f}s")


def test_criterion_9_no_secondary_component_needed():
    loaded = [
        getattr(m, "__file__", "") or ""
        for name, m in sys.modules.items()
        if name.startswith("jarvis_kg")
    ]
    frontend = Path(__file__).resolve().parents[1] / "frontend"
    assert not any(str(frontend) in f for f in loaded)
    assert "node_modules" not in json.dumps(loaded)
    # the full pipeline works with only the Python package importable
    svc = JarvisService.from_paths()
    assert svc.ask(GOLDEN[1][0]).to_wire() == GOLDEN[1][1]
    _report("suite independent of the secondary component", True)
