"""Fleet state: engines, subsystems, compressor maps, history, update methods.

The fleet is the numeric system of record; every mutation mirrors the data
properties into the knowledge graph so the SPARQL path and the record path
always agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from jarvis_kg.errors import (
    DependencyCycle,
    DuplicateEngineId,
    EvalError,
    SchemaError,
    UnknownEngine,
    UnknownSubsystem,
)
from jarvis_kg.expr import Node, eval_expression, parse_expression
from jarvis_kg.kg.graph import Graph
from jarvis_kg.kg.terms import AERO, RDF_TYPE, RDFS_LABEL, Iri, decimal, integer, text

SUBSYSTEM_KINDS = ("fan", "LPC", "IPC", "HPC")
CHARACTERISTICS = ("PressureRatio", "Speed", "Efficiency", "MassFlow")

Point = tuple[float, float]
Polyline = list[Point]


def _check_polyline(points, where: str) -> Polyline:
    if not isinstance(points, (list, tuple)) or len(points) < 2:
        raise SchemaError(f"{where}: polyline needs at least 2 points")
    out = []
    for p in points:
        if not isinstance(p, (list, tuple)) or len(p) != 2:
            raise SchemaError(f"{where}: point must be [mass_flow, pressure_ratio]")
        out.append((float(p[0]), float(p[1])))
    return out


@dataclass
class CompressorMap:
    speed_lines: list[tuple[float, Polyline]]
    stall_line: Optional[Polyline]
    choke_line: Optional[Polyline]
    efficiency_contours: list[tuple[float, Polyline]]

    @classmethod
    def from_dict(cls, data: dict, where: str) -> "CompressorMap":
        speed_lines = []
        for entry in data.get("speed_lines", []):
            speed, pts = entry[0], entry[1]
            line = _check_polyline(pts, f"{where}.speed_lines")
            flows = [p[0] for p in line]
            if any(b <= a for a, b in zip(flows, flows[1:])):
                raise SchemaError(
                    f"{where}.speed_lines: mass flow must be strictly increasing"
                )
            speed_lines.append((float(speed), line))
        stall = data.get("stall_line")
        choke = data.get("choke_line")
        return cls(
            speed_lines=speed_lines,
            stall_line=_check_polyline(stall, f"{where}.stall_line") if stall else None,
            choke_line=_check_polyline(choke, f"{where}.choke_line") if choke else None,
            efficiency_contours=[
                (float(e[0]), _check_polyline(e[1], f"{where}.efficiency_contours"))
                for e in data.get("efficiency_contours", [])
            ],
        )

    def to_dict(self) -> dict:
        return {
            "speed_lines": [[s, [list(p) for p in line]] for s, line in self.speed_lines],
            "stall_line": [list(p) for p in self.stall_line] if self.stall_line else None,
            "choke_line": [list(p) for p in self.choke_line] if self.choke_line else None,
            "efficiency_contours": [
                [e, [list(p) for p in line]] for e, line in self.efficiency_contours
            ],
        }

    def polylines(self) -> list[Polyline]:
        lines = [line for _, line in self.speed_lines]
        if self.stall_line:
            lines.append(self.stall_line)
        if self.choke_line:
            lines.append(self.choke_line)
        lines.extend(line for _, line in self.efficiency_contours)
        return lines

    def axis_ranges(self) -> tuple[float, float]:
        """Full (mass flow, pressure ratio) extents across all polylines."""
        xs = [p[0] for line in self.polylines() for p in line]
        ys = [p[1] for line in self.polylines() for p in line]
        if not xs:
            return (1.0, 1.0)
        return (max(xs) - min(xs) or 1.0, max(ys) - min(ys) or 1.0)


@dataclass
class SubsystemRecord:
    kind: str
    characteristics: dict[str, float]
    history: list[tuple[float, dict[str, float]]] = field(default_factory=list)
    map: Optional[CompressorMap] = None

    def current_hours(self) -> float:
        if self.history:
            return self.history[-1][0]
        return float(self.characteristics.get("FlightHours", 0.0))


@dataclass
class EngineRecord:
    vr_id: int
    label: str
    fleet: str
    latitude: float
    longitude: float
    subsystems: dict[str, SubsystemRecord] = field(default_factory=dict)


@dataclass
class UpdateMethod:
    target: str
    func_args: tuple[str, ...]
    body: Node
    source: str = ""

    @classmethod
    def from_expression(cls, target: str, func_args, source: str) -> "UpdateMethod":
        args = tuple(func_args)
        if target in args:
            raise DependencyCycle([target, target])
        return cls(target, args, parse_expression(source, args), source)


# --- schema loading ----------------------------------------------------------

def engine_from_dict(data: dict) -> EngineRecord:
    """Validate one engine object from the fleet file schema."""
    if not isinstance(data, dict):
        raise SchemaError("engine must be an object")
    try:
        vr_id = int(data["vr_id"])
        label = str(data.get("label", vr_id))
        fleet_name = str(data["fleet"])
        lat = float(data["latitude"])
        lon = float(data["longitude"])
    except KeyError as exc:
        raise SchemaError(f"engine missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"engine field has wrong type: {exc}") from exc
    if not -90.0 <= lat <= 90.0:
        raise SchemaError(f"engine {vr_id}: latitude {lat} outside [-90, 90]")
    if not -180.0 <= lon <= 180.0:
        raise SchemaError(f"engine {vr_id}: longitude {lon} outside [-180, 180]")
    subsystems: dict[str, SubsystemRecord] = {}
    for kind, sub_data in data.get("subsystems", {}).items():
        if kind not in SUBSYSTEM_KINDS:
            raise SchemaError(f"engine {vr_id}: unknown subsystem kind {kind!r}")
        where = f"engine {vr_id}.{kind}"
        chars = {
            str(k): float(v)
            for k, v in sub_data.get("characteristics", {}).items()
        }
        history = []
        last_hours = None
        for entry in sub_data.get("history", []):
            hours = float(entry[0])
            if last_hours is not None and hours <= last_hours:
                raise SchemaError(f"{where}: history hours must strictly increase")
            last_hours = hours
            history.append((hours, {str(k): float(v) for k, v in entry[1].items()}))
        if history:
            _, last_values = history[-1]
            for name, value in last_values.items():
                if name in chars and chars[name] != value:
                    raise SchemaError(
                        f"{where}: current {name} differs from last history entry"
                    )
        map_data = sub_data.get("map")
        cmap = CompressorMap.from_dict(map_data, where) if map_data else None
        subsystems[kind] = SubsystemRecord(kind, chars, history, cmap)
    return EngineRecord(vr_id, label, fleet_name, lat, lon, subsystems)


def fleet_from_dict(data: dict) -> "Fleet":
    if not isinstance(data, dict) or "engines" not in data:
        raise SchemaError("fleet file must be an object with an 'engines' list")
    fleet = Fleet()
    for engine_data in data["engines"]:
        record = engine_from_dict(engine_data)
        if record.vr_id in fleet.engines:
            raise SchemaError(f"duplicate vr_id {record.vr_id}")
        fleet.engines[record.vr_id] = record
    return fleet


def fleet_to_dict(fleet: "Fleet") -> dict:
    engines = []
    for vr_id in sorted(fleet.engines):
        e = fleet.engines[vr_id]
        engines.append({
            "vr_id": e.vr_id,
            "label": e.label,
            "fleet": e.fleet,
            "latitude": e.latitude,
            "longitude": e.longitude,
            "subsystems": {
                kind: {
                    "characteristics": dict(sub.characteristics),
                    "history": [[h, dict(v)] for h, v in sub.history],
                    "map": sub.map.to_dict() if sub.map else None,
                }
                for kind, sub in e.subsystems.items()
            },
        })
    return {"engines": engines}


# --- graph synchronization ---------------------------------------------------

_CARDINALS = (
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
    "nine", "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen",
    "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
)
_ORDINALS = (
    "zeroth", "first", "second", "third", "fourth", "fifth", "sixth",
    "seventh", "eighth", "ninth", "tenth", "eleventh", "twelfth",
    "thirteenth", "fourteenth", "fifteenth", "sixteenth", "seventeenth",
    "eighteenth", "nineteenth", "twentieth",
)


def engine_iri(vr_id: int) -> Iri:
    return Iri(AERO.Engine.value + f"_{vr_id}")


def subsystem_iri(vr_id: int, kind: str) -> Iri:
    return getattr(AERO, f"{kind}_of_Engine_{vr_id}")


def fleet_iri(name: str) -> Iri:
    return getattr(AERO, f"Fleet_{name}")


def _subsystem_class(kind: str) -> Iri:
    return {"fan": AERO.Fan, "LPC": AERO.LPC, "IPC": AERO.IPC, "HPC": AERO.HPC}[kind]


def assert_engine(graph: Graph, record: EngineRecord):
    """Assert the ABox triples for one engine (types, labels, data properties)."""
    e_iri = engine_iri(record.vr_id)
    graph.add(e_iri, RDF_TYPE, AERO.Engine)
    graph.add(e_iri, RDFS_LABEL, text(record.label))
    # alternate spoken-style labels so fuzzy lookup can resolve word forms
    try:
        n = int(record.label)
        if 0 <= n < len(_CARDINALS):
            graph.add(e_iri, RDFS_LABEL, text(_CARDINALS[n]))
            graph.add(e_iri, RDFS_LABEL, text(_ORDINALS[n]))
    except ValueError:
        pass
    graph.add(e_iri, AERO.VR_ID, integer(record.vr_id))
    graph.add(e_iri, AERO.Fleet, text(record.fleet))
    graph.add(e_iri, AERO.Latitude, decimal(record.latitude))
    graph.add(e_iri, AERO.Longitude, decimal(record.longitude))
    f_iri = fleet_iri(record.fleet)
    graph.add(f_iri, RDF_TYPE, AERO.Fleet)
    graph.add(f_iri, RDFS_LABEL, text(record.fleet))
    for kind, sub in record.subsystems.items():
        s_iri = subsystem_iri(record.vr_id, kind)
        graph.add(s_iri, RDF_TYPE, _subsystem_class(kind))
        graph.add(s_iri, RDFS_LABEL, text(f"{kind}_of_Engine_{record.vr_id}"))
        graph.add(s_iri, AERO.isPartOf, e_iri)
        _assert_subsystem_values(graph, record.vr_id, sub)


def _assert_subsystem_values(graph: Graph, vr_id: int, sub: SubsystemRecord):
    s_iri = subsystem_iri(vr_id, sub.kind)
    for name, value in sub.characteristics.items():
        pred = getattr(AERO, name)
        graph.remove(s_iri, pred, None)
        graph.add(s_iri, pred, decimal(value))


# --- fleet container and update propagation ----------------------------------

class Fleet:
    def __init__(self):
        self.engines: dict[int, EngineRecord] = {}
        self.update_methods: dict[str, UpdateMethod] = {}

    def engine(self, vr_id: int) -> EngineRecord:
        try:
            return self.engines[vr_id]
        except KeyError:
            raise UnknownEngine(f"no engine with vr_id {vr_id}") from None

    def engine_by_label(self, label: str) -> EngineRecord:
        for e in self.engines.values():
            if e.label == label:
                return e
        raise UnknownEngine(f"no engine labeled {label!r}")

    def subsystem(self, vr_id: int, kind: str) -> SubsystemRecord:
        engine = self.engine(vr_id)
        if kind not in engine.subsystems:
            raise UnknownSubsystem(f"engine {vr_id} has no subsystem {kind!r}")
        return engine.subsystems[kind]

    def add_engine(self, record: EngineRecord, graph: Optional[Graph] = None):
        if record.vr_id in self.engines:
            raise DuplicateEngineId(f"vr_id {record.vr_id} already present")
        self.engines[record.vr_id] = record
        if graph is not None:
            assert_engine(graph, record)

    # -- update methods -------------------------------------------------------

    def register_update_method(self, method: UpdateMethod):
        """Store the method unless it would create a dependency cycle."""
        candidate = dict(self.update_methods)
        candidate[method.target] = method
        cycle = _find_cycle(candidate)
        if cycle:
            raise DependencyCycle(cycle)
        self.update_methods[method.target] = method

    def _topo_order(self) -> list[UpdateMethod]:
        """Methods ordered so dependencies are computed before dependents."""
        order: list[UpdateMethod] = []
        done: set[str] = set()
        pending = dict(self.update_methods)
        while pending:
            progressed = False
            for target in sorted(pending):
                method = pending[target]
                if all(a not in pending or a in done for a in method.func_args):
                    order.append(method)
                    done.add(target)
                    del pending[target]
                    progressed = True
            if not progressed:  # pragma: no cover - cycles rejected on register
                raise DependencyCycle(sorted(pending))
        return order

    def apply_updates(
        self,
        vr_id: int,
        kind: str,
        new_values: dict[str, float],
        flight_hours: Optional[float] = None,
        graph: Optional[Graph] = None,
    ) -> dict[str, float]:
        """Write new values, recompute derived characteristics, append history.

        All-or-nothing: any evaluation error leaves the fleet and graph
        untouched. Returns the characteristics whose values changed.
        """
        sub = self.subsystem(vr_id, kind)
        before = dict(sub.characteristics)
        values = dict(before)
        for name, value in new_values.items():
            values[str(name)] = float(value)
        for method in self._topo_order():
            args = {}
            missing = [a for a in method.func_args if a not in values]
            if missing:
                raise EvalError(
                    f"method for {method.target!r} needs missing "
                    f"characteristic {missing[0]!r}"
                )
            for a in method.func_args:
                args[a] = values[a]
            try:
                values[method.target] = eval_expression(method.body, kind, args)
            except EvalError as exc:
                raise EvalError(f"recomputing {method.target!r}: {exc}") from exc

        hours = float(flight_hours) if flight_hours is not None else sub.current_hours()
        last_hours = sub.history[-1][0] if sub.history else None
        if last_hours is not None and hours < last_hours:
            raise SchemaError(
                f"flight_hours {hours} would break history monotonicity "
                f"(last entry at {last_hours})"
            )

        if "FlightHours" in values:
            values["FlightHours"] = hours

        # commit
        sub.characteristics = values
        tracked = {n: v for n, v in values.items() if n != "FlightHours"}
        if last_hours is not None and hours == last_hours:
            sub.history[-1] = (hours, tracked)
        else:
            sub.history.append((hours, tracked))
        if graph is not None:
            _assert_subsystem_values(graph, vr_id, sub)
        return {n: v for n, v in values.items() if before.get(n) != v}


def _find_cycle(methods: dict[str, UpdateMethod]) -> Optional[list[str]]:
    """DFS over target -> func_arg edges restricted to method targets."""
    visiting: list[str] = []
    done: set[str] = set()

    def visit(target: str) -> Optional[list[str]]:
        if target in visiting:
            return visiting[visiting.index(target):] + [target]
        if target in done or target not in methods:
            return None
        visiting.append(target)
        for arg in methods[target].func_args:
            found = visit(arg)
            if found:
                return found
        visiting.pop()
        done.add(target)
        return None

    for target in sorted(methods):
        found = visit(target)
        if found:
            return found
    return None
