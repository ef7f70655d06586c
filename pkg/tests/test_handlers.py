import random

import pytest

from jarvis_kg.fleet import CompressorMap
from jarvis_kg.handlers import boundary_distance, format_value
from oracles import sampled_boundary_distance


class TestFormatValue:
    @pytest.mark.parametrize("value,expected", [
        (80.0, "80.0"),
        (88.1635, "88.1635"),
        (88.16350001, "88.1635"),
        (1.5, "1.5"),
        (0.0, "0.0"),
        (-3.25, "-3.25"),
        (100.00004, "100.0"),
    ])
    def test_pins_four_fraction_digits(self, value, expected):
        assert format_value(value) == expected


def random_map(rng: random.Random) -> CompressorMap:
    def polyline(n, x0, y0):
        pts = []
        x, y = x0, y0
        for _ in range(n):
            pts.append([round(x, 4), round(y, 4)])
            x += rng.uniform(0.05, 0.3)
            y += rng.uniform(-0.4, 0.6)
        return pts

    return CompressorMap.from_dict({
        "speed_lines": [[90.0, polyline(4, 0.2, 3.0)]],
        "stall_line": polyline(rng.randint(2, 5), 0.1, 2.5),
        "choke_line": polyline(rng.randint(2, 5), 0.6, 1.5),
    }, "test")


class TestBoundaryDistance:
    def test_matches_dense_sampling(self):
        rng = random.Random(5)
        for _ in range(30):
            cmap = random_map(rng)
            point = (rng.uniform(0.0, 1.5), rng.uniform(1.0, 4.0))
            for boundary in (cmap.stall_line, cmap.choke_line):
                fast = boundary_distance(point, boundary, cmap)
                slow = sampled_boundary_distance(point, boundary, cmap.axis_ranges())
                assert fast == pytest.approx(slow, abs=1e-6)

    def test_point_on_boundary_is_zero(self):
        cmap = random_map(random.Random(1))
        on_line = tuple(cmap.stall_line[1])
        assert boundary_distance(on_line, cmap.stall_line, cmap) == pytest.approx(0.0)

    def test_normalization_is_scale_free(self):
        cmap = random_map(random.Random(2))
        scaled = CompressorMap.from_dict({
            "speed_lines": [
                [s, [[x * 100, y] for x, y in line]] for s, line in cmap.speed_lines
            ],
            "stall_line": [[x * 100, y] for x, y in cmap.stall_line],
            "choke_line": [[x * 100, y] for x, y in cmap.choke_line],
        }, "scaled")
        p = (cmap.stall_line[0][0] + 0.05, cmap.stall_line[0][1] + 0.1)
        p_scaled = (p[0] * 100, p[1])
        a = boundary_distance(p, cmap.stall_line, cmap)
        b = boundary_distance(p_scaled, scaled.stall_line, scaled)
        assert a == pytest.approx(b, rel=1e-9)


class TestMessages:
    """End-to-end message shapes for every intent on the demo data."""

    @pytest.mark.parametrize("utterance,fragments", [
        ("Show me engine 2.", ["Engine 2 is currently at latitude"]),
        ("At what speed is HPC of Engine 3 running at?",
         ["HPC of engine 3 has Speed equal to 80.0"]),
        ("Which engine's LPC is running at the lowest efficiency?",
         ["LPC of engine 0 has the lowest value of Efficiency"]),
        ("Identify which engine's HPC is operating at 99 efficiency.",
         ["is operating at Efficiency"]),
        ("Identify which engine's HPC is the closest to stall.",
         ["is closest to stall. Margin is"]),
        ("Compute the average speed after 100 hours of flying time for HPC"
         " in Engine 3",
         ["Average Speed of HPC of engine 3 after 100.0 hours is"]),
        ("Where is the engine with the highest average efficiency of fleet A"
         " currently?",
         ["has the highest average Efficiency in fleet A"]),
    ])
    def test_fragments(self, demo_service, utterance, fragments):
        message = demo_service.ask(utterance).message
        for fragment in fragments:
            assert fragment in message

    def test_aggregate_mean_is_correct(self, demo_service):
        # engine 3 HPC speed: history 80.0 - 0.0015*(200-h); h >= 100 keeps 120, 200
        expected = (80.0 - 0.0015 * 80 + 80.0) / 2
        message = demo_service.ask(
            "Compute the average speed after 100 hours of flying time for HPC"
            " in Engine 3"
        ).message
        assert message.endswith(format_value(expected))

    def test_get_engine_defaults_to_speed(self, demo_service):
        response = demo_service.ask(
            "Identify which engine's fan is operating at 74"
        )
        assert "operating at Speed" in response.message
