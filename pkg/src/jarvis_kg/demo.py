"""Canonical demo fleet: eight engines (vr_id 0..7) in two fleets.

Two values are pinned and relied on by the golden tests: engine 3 HPC
Speed is 80.0 and engine 0 HPC Efficiency is 88.1635 (the fleet maximum).
Everything else is synthetic and exists only to make every query type
answerable.
"""

from __future__ import annotations

HISTORY_HOURS = (0.0, 60.0, 120.0, 200.0)

_POSITIONS = {
    0: (40.64, -73.78),
    1: (51.47, -0.45),
    2: (35.55, 139.78),
    3: (25.25, 55.36),
    4: (52.2, 0.12),
    5: (-33.95, 151.18),
    6: (37.62, -122.38),
    7: (48.35, 11.78),
}

# per-kind (base, per-engine increment) for each characteristic
_SPEED = {"fan": (70.0, 1.0), "LPC": (99.0, 0.8), "IPC": (88.0, 1.1), "HPC": (77.0, 1.0)}
_EFFICIENCY = {"fan": (78.0, 0.5), "LPC": (84.0, 0.6), "IPC": (90.0, 0.7), "HPC": None}
_PRESSURE_RATIO = {"fan": (1.5, 0.02), "LPC": (3.4, 0.03), "IPC": (7.5, 0.04), "HPC": (4.1, 0.03)}
_MASS_FLOW = {"fan": (0.9, 0.012), "LPC": (0.75, 0.012), "IPC": (0.6, 0.01), "HPC": (0.45, 0.008)}


def _hpc_efficiency(vr_id: int) -> float:
    if vr_id == 0:
        return 88.1635
    return round(87.4 - 0.35 * vr_id, 4)


def _characteristics(vr_id: int, kind: str) -> dict[str, float]:
    def lin(table):
        base, step = table[kind]
        return round(base + step * vr_id, 4)

    efficiency = _hpc_efficiency(vr_id) if kind == "HPC" else lin(_EFFICIENCY)
    return {
        "PressureRatio": lin(_PRESSURE_RATIO),
        "Speed": lin(_SPEED),
        "Efficiency": efficiency,
        "MassFlow": lin(_MASS_FLOW),
        "FlightHours": HISTORY_HOURS[-1],
    }


def _history(current: dict[str, float]) -> list:
    entries = []
    last = HISTORY_HOURS[-1]
    for h in HISTORY_HOURS:
        drift = 0.0015 * (last - h)
        entries.append([
            h,
            {
                name: round(current[name] - drift, 4) if h != last else current[name]
                for name in ("PressureRatio", "Speed", "Efficiency", "MassFlow")
            },
        ])
    return entries


def _map(kind: str, efficiency: float) -> dict:
    # geometry is anchored at the vr_id-0 operating point so each engine's
    # own operating point sits at a different margin from the boundaries
    mf = _MASS_FLOW[kind][0]
    pr = _PRESSURE_RATIO[kind][0]

    def pt(dx, dy):
        return [round(mf + dx, 4), round(pr + dy, 4)]

    speed_lines = []
    for s in (80.0, 90.0, 100.0):
        off = (s - 90.0) * 0.005
        speed_lines.append([
            s,
            [pt(-0.2 + 0.12 * i, off + 0.3 - 0.13 * i) for i in range(4)],
        ])
    return {
        "speed_lines": speed_lines,
        "stall_line": [pt(-0.25, -0.05), pt(-0.12, 0.35), pt(0.02, 0.7)],
        "choke_line": [pt(0.1, -0.55), pt(0.18, -0.1), pt(0.22, 0.35)],
        "efficiency_contours": [
            [round(efficiency - 1.5, 4),
             [pt(-0.08, -0.08), pt(0.0, 0.06), pt(0.08, -0.08)]],
            [round(efficiency - 3.0, 4),
             [pt(-0.14, -0.16), pt(0.0, 0.14), pt(0.14, -0.16)]],
        ],
    }


def build_demo_fleet() -> dict:
    """The demo fleet as a JSON-ready dict (the fleet file schema)."""
    engines = []
    for vr_id in range(8):
        lat, lon = _POSITIONS[vr_id]
        subsystems = {}
        for kind in ("fan", "LPC", "IPC", "HPC"):
            chars = _characteristics(vr_id, kind)
            subsystems[kind] = {
                "characteristics": chars,
                "history": _history(chars),
                "map": _map(kind, chars["Efficiency"]),
            }
        engines.append({
            "vr_id": vr_id,
            "label": str(vr_id),
            "fleet": "A" if vr_id < 4 else "B",
            "latitude": lat,
            "longitude": lon,
            "subsystems": subsystems,
        })
    return {"engines": engines}
