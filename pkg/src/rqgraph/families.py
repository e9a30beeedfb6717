"""Complete graphs, complete graphs minus an edge, and their two-lead open versions."""
from __future__ import annotations

import re

from .graph import GraphError, MetricGraph, OpenQuantumGraph


def complete_graph(n: int, length: float = 1.0) -> MetricGraph:
    """K_n with every edge of the given length, edges in lexicographic pair order."""
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    edges = tuple((u, v, length) for u in range(n) for v in range(u + 1, n))
    return MetricGraph(n, edges)


def complete_minus_edge(n: int, i: int = 0, f: int | None = None,
                        length: float = 1.0) -> MetricGraph:
    """K_n with the edge {i, f} removed."""
    if f is None:
        f = n - 1
    if n < 2:
        raise GraphError(f"complete graph needs n >= 2, got {n}")
    if i == f:
        raise GraphError("removed edge needs two distinct endpoints")
    if not (0 <= i < n and 0 <= f < n):
        raise GraphError(f"endpoints ({i}, {f}) outside 0..{n - 1}")
    gone = {i, f}
    edges = tuple((u, v, length) for u in range(n) for v in range(u + 1, n) if {u, v} != gone)
    return MetricGraph(n, edges)


def open_kne(n: int, length: float = 1.0, i: int = 0, f: int | None = None) -> OpenQuantumGraph:
    """K_n minus {i, f} with one lead at i (entrance) and one at f (exit).

    Every vertex ends up with total degree n - 1.
    """
    if n < 3:
        raise GraphError(f"open K_n^e needs n >= 3, got {n}")
    if f is None:
        f = n - 1
    return OpenQuantumGraph(complete_minus_edge(n, i, f, length), (i, f))


_KNE = re.compile(r"^kne:(\d+)$")


def from_shorthand(spec: str) -> OpenQuantumGraph:
    """Expand a family shorthand such as ``kne:6``."""
    m = _KNE.match(spec.strip())
    if not m:
        raise GraphError(f"unknown family shorthand {spec!r} (expected kne:<n>)")
    return open_kne(int(m.group(1)), 1.0)


def is_shorthand(spec: str) -> bool:
    return bool(_KNE.match(spec.strip()))
