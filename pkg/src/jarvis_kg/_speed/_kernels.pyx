# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: edit distance and point-to-segment distance.

Semantics must stay identical to jarvis_kg._speed._pure.
"""

from libc.stdlib cimport free, malloc


def levenshtein(str a, str b):
    """Edit distance (insert/delete/substitute, unit costs)."""
    if a == b:
        return 0
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    if la < lb:
        a, b = b, a
        la, lb = lb, la
    cdef int *prev = <int *> malloc((lb + 1) * sizeof(int))
    cdef int *curr = <int *> malloc((lb + 1) * sizeof(int))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()
    cdef Py_ssize_t i, j
    cdef int cost, best, cand
    cdef Py_UCS4 ca
    try:
        for j in range(lb + 1):
            prev[j] = <int> j
        for i in range(1, la + 1):
            curr[0] = <int> i
            ca = a[i - 1]
            for j in range(1, lb + 1):
                cost = 0 if ca == <Py_UCS4> b[j - 1] else 1
                best = curr[j - 1] + 1
                cand = prev[j] + 1
                if cand < best:
                    best = cand
                cand = prev[j - 1] + cost
                if cand < best:
                    best = cand
                curr[j] = best
            prev, curr = curr, prev
        return prev[lb]
    finally:
        free(prev)
        free(curr)


def point_segment_distance(
    double px, double py, double ax, double ay, double bx, double by
):
    """Euclidean distance from point (px, py) to segment (a, b)."""
    cdef double dx = bx - ax
    cdef double dy = by - ay
    cdef double denom = dx * dx + dy * dy
    cdef double t, ex, ey
    if denom == 0.0:
        ex = px - ax
        ey = py - ay
        return (ex * ex + ey * ey) ** 0.5
    t = ((px - ax) * dx + (py - ay) * dy) / denom
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    ex = px - (ax + t * dx)
    ey = py - (ay + t * dy)
    return (ex * ex + ey * ey) ** 0.5
