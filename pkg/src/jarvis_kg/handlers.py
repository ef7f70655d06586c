"""Per-intent answer handlers.

Each handler instantiates its intent's SPARQL template with the cleared
slot values, evaluates it against the graph, and does the numeric
post-processing (argmax/argmin, nearest value, boundary distance, means)
on the rows plus the fleet records.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from jarvis_kg._speed import point_segment_distance
from jarvis_kg.errors import (
    JarvisError,
    NoBoundary,
    NoData,
    NoSamples,
    UnknownCharacteristic,
    UnknownEngine,
    UnknownFleet,
    UnknownSubsystem,
)
from jarvis_kg.fleet import CompressorMap, Fleet, Polyline
from jarvis_kg.kg.graph import Graph
from jarvis_kg.kg.terms import Iri, Literal, Term, text
from jarvis_kg.nlu import ClearedCommand
from jarvis_kg.sparql import BindingRow, evaluate, instantiate, parse_query


@dataclass
class SystemResponse:
    engine_id: Optional[int]
    subsystem: Optional[str]
    message: str

    def to_wire(self) -> dict:
        return {
            "engineID": self.engine_id,
            "subsystem": self.subsystem,
            "message": self.message,
        }


def format_value(value: float) -> str:
    """Up to four fractional digits, trailing zeros trimmed, at least one kept."""
    s = f"{float(value):.4f}".rstrip("0")
    if s.endswith("."):
        s += "0"
    return s


def template_slots(cleared: ClearedCommand, graph: Graph) -> dict[str, Term]:
    """Placeholder map: IRIs are swapped for their label literal (templates
    look entities up by rdfs:label, mirroring the query-template idiom)."""
    slots: dict[str, Term] = {}
    for name, term in cleared.slots.items():
        if isinstance(term, Iri):
            label = graph.label_of(term)
            if label is None:
                raise JarvisError(f"resource <{term.value}> has no label")
            slots[name.upper()] = text(label)
        else:
            slots[name.upper()] = term
    return slots


def _run(intent: str, templates: dict[str, str], slots: dict[str, Term],
         graph: Graph) -> list[BindingRow]:
    query_text = instantiate(templates[intent], slots)
    return evaluate(graph, parse_query(query_text))


def _num(term: Term) -> float:
    if isinstance(term, Literal) and term.is_numeric:
        return float(term.value)
    raise JarvisError(f"expected a numeric binding, got {term!r}")


def _int(term: Term) -> int:
    return int(_num(term))


def _slot_label(slots: dict[str, Term], name: str) -> str:
    term = slots[name]
    assert isinstance(term, Literal) and term.kind == "text"
    return term.value


class Handlers:
    """Dispatch table binding graph, fleet and the template directory."""

    def __init__(self, graph: Graph, fleet: Fleet, templates: dict[str, str]):
        self.graph = graph
        self.fleet = fleet
        self.templates = templates
        self._by_intent: dict[str, Callable] = {
            "show_engine": self.show_engine,
            "get_engine": self.get_engine,
            "get_value": self.get_value,
            "closest": self.closest,
            "the_best": self.the_best,
            "aggregate_value": self.aggregate_value,
            "fleet_best": self.fleet_best,
        }

    def handle(self, cleared: ClearedCommand) -> SystemResponse:
        if cleared.intent not in self._by_intent:
            raise JarvisError(f"no handler for intent '{cleared.intent}'")
        slots = template_slots(cleared, self.graph)
        return self._by_intent[cleared.intent](slots)

    # -- intents --------------------------------------------------------------

    def show_engine(self, slots) -> SystemResponse:
        rows = _run("show_engine", self.templates, slots, self.graph)
        if not rows:
            raise UnknownEngine(f"no engine labeled {_slot_label(slots, 'ENGINE_NAME')!r}")
        row = rows[0]
        vr_id = _int(row["ID"])
        return SystemResponse(
            vr_id, None,
            f"Engine {vr_id} is currently at latitude {format_value(_num(row['lat']))},"
            f" longitude {format_value(_num(row['lon']))}.",
        )

    def get_value(self, slots) -> SystemResponse:
        sub_name = _slot_label(slots, "SUBSYSTEM")
        char_name = _slot_label(slots, "CHARACTERISTIC")
        rows = _run("get_value", self.templates, slots, self.graph)
        if not rows:
            # distinguish the failure for the apology message
            engine = self.fleet.engine_by_label(_slot_label(slots, "ENGINE_NAME"))
            if sub_name not in engine.subsystems:
                raise UnknownSubsystem(
                    f"engine {engine.vr_id} has no subsystem {sub_name!r}"
                )
            raise UnknownCharacteristic(
                f"{sub_name} of engine {engine.vr_id} has no {char_name!r}"
            )
        row = rows[0]
        vr_id = _int(row["ID"])
        return SystemResponse(
            vr_id, sub_name,
            f"{sub_name} of engine {vr_id} has {char_name}"
            f" equal to {format_value(_num(row['val']))}",
        )

    def the_best(self, slots) -> SystemResponse:
        sub_name = _slot_label(slots, "SUBSYSTEM")
        char_name = _slot_label(slots, "CHARACTERISTIC")
        direction = _slot_label(slots, "BEST_DIRECTION")
        rows = _run("the_best", self.templates, slots, self.graph)
        if not rows:
            raise NoData(f"no engine carries {char_name} on {sub_name}")
        sign = -1.0 if direction == "highest" else 1.0
        best = min(rows, key=lambda r: (sign * _num(r["val"]), _int(r["ID"])))
        vr_id = _int(best["ID"])
        return SystemResponse(
            vr_id, sub_name,
            f"{sub_name} of engine {vr_id} has the {direction} value of {char_name}."
            f" It is equal to {format_value(_num(best['val']))}",
        )

    def get_engine(self, slots) -> SystemResponse:
        if "CHARACTERISTIC" not in slots:
            slots = dict(slots)
            slots["CHARACTERISTIC"] = text("Speed")  # characteristic-less phrasing
        sub_name = _slot_label(slots, "SUBSYSTEM")
        char_name = _slot_label(slots, "CHARACTERISTIC")
        target = _num(slots["NUM_VALUE"])
        rows = _run("get_engine", self.templates, slots, self.graph)
        if not rows:
            raise NoData(f"no engine carries {char_name} on {sub_name}")
        best = min(rows, key=lambda r: (abs(_num(r["val"]) - target), _int(r["ID"])))
        vr_id = _int(best["ID"])
        return SystemResponse(
            vr_id, sub_name,
            f"{sub_name} of engine {vr_id} is operating at {char_name}"
            f" {format_value(_num(best['val']))}",
        )

    def closest(self, slots) -> SystemResponse:
        sub_name = _slot_label(slots, "SUBSYSTEM")
        state = _slot_label(slots, "SUBSYSTEM_STATE")
        rows = _run("closest", self.templates, slots, self.graph)
        if not rows:
            raise NoData(f"no {sub_name} operating points available")
        candidates = []
        for row in rows:
            vr_id = _int(row["ID"])
            sub = self.fleet.subsystem(vr_id, sub_name)
            if sub.map is None:
                raise NoBoundary(f"{sub_name} of engine {vr_id} has no map")
            boundary = sub.map.stall_line if state == "stall" else sub.map.choke_line
            if boundary is None:
                raise NoBoundary(
                    f"{sub_name} of engine {vr_id} has no {state} boundary"
                )
            dist = boundary_distance(
                (_num(row["mf"]), _num(row["pr"])), boundary, sub.map
            )
            candidates.append((dist, vr_id))
        dist, vr_id = min(candidates)
        return SystemResponse(
            vr_id, sub_name,
            f"{sub_name} of engine {vr_id} is closest to {state}."
            f" Margin is {format_value(dist)}",
        )

    def aggregate_value(self, slots) -> SystemResponse:
        sub_name = _slot_label(slots, "SUBSYSTEM")
        char_name = _slot_label(slots, "CHARACTERISTIC")
        hours = _num(slots["HOURS"])
        rows = _run("aggregate_value", self.templates, slots, self.graph)
        if not rows:
            raise UnknownEngine(
                f"no engine labeled {_slot_label(slots, 'ENGINE_NAME')!r}"
                f" with subsystem {sub_name!r}"
            )
        vr_id = _int(rows[0]["ID"])
        sub = self.fleet.subsystem(vr_id, sub_name)
        samples = [
            values[char_name]
            for h, values in sub.history
            if h >= hours and char_name in values
        ]
        if not samples:
            raise NoSamples(
                f"no {char_name} samples at or after {format_value(hours)} hours"
            )
        mean = sum(samples) / len(samples)
        return SystemResponse(
            vr_id, sub_name,
            f"Average {char_name} of {sub_name} of engine {vr_id} after"
            f" {format_value(hours)} hours is {format_value(mean)}",
        )

    def fleet_best(self, slots) -> SystemResponse:
        fleet_name = _slot_label(slots, "FLEET_NAME")
        rows = _run("fleet_best", self.templates, slots, self.graph)
        if not rows:
            raise UnknownFleet(f"no engines in fleet {fleet_name!r}")
        scored = []
        for row in rows:
            vr_id = _int(row["ID"])
            engine = self.fleet.engine(vr_id)
            values = [
                sub.characteristics["Efficiency"]
                for sub in engine.subsystems.values()
                if "Efficiency" in sub.characteristics
            ]
            if not values:
                continue
            mean = sum(values) / len(values)
            scored.append((-mean, vr_id, row, mean))
        if not scored:
            raise NoData(f"fleet {fleet_name!r} has no efficiency data")
        _, vr_id, row, mean = min(scored)
        return SystemResponse(
            vr_id, None,
            f"Engine {vr_id} has the highest average Efficiency in fleet"
            f" {fleet_name}. It is currently at latitude"
            f" {format_value(_num(row['lat']))}, longitude"
            f" {format_value(_num(row['lon']))}.",
        )


def boundary_distance(point: tuple[float, float], boundary: Polyline,
                      cmap: CompressorMap) -> float:
    """Scale-free distance from an operating point to a boundary polyline.

    Each axis is divided by the map's full extent on that axis before the
    Euclidean point-to-segment distance is taken.
    """
    x_range, y_range = cmap.axis_ranges()
    px, py = point[0] / x_range, point[1] / y_range
    best = None
    for (ax, ay), (bx, by) in zip(boundary, boundary[1:]):
        d = point_segment_distance(
            px, py, ax / x_range, ay / y_range, bx / x_range, by / y_range
        )
        if best is None or d < best:
            best = d
    return best
