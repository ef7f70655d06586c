"""Hot kernels: Levenshtein distance and point-to-polyline distance.

A compiled Cython implementation is preferred when it was built; otherwise
the pure-Python twin in ``_pure`` is used. Both expose the same functions
and are interchangeable (the benchmark in benchmarks/ compares them).
"""

try:
    from jarvis_kg._speed._kernels import levenshtein, point_segment_distance

    BACKEND = "cython"
except ImportError:
    from jarvis_kg._speed._pure import levenshtein, point_segment_distance

    BACKEND = "pure"

__all__ = ["levenshtein", "point_segment_distance", "BACKEND"]
