"""Metric graphs, open quantum graphs with leads, and spanning-subgraph masks."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Sequence

import numpy as np

NEUMANN_KIRCHHOFF = "neumann-kirchhoff"


class GraphError(ValueError):
    """Raised for structurally invalid graphs, leads or masks."""


@dataclass(frozen=True)
class MetricGraph:
    """Simple undirected graph whose edges carry positive lengths.

    The position of an edge in ``edges`` is its stable index; subgraph masks
    refer to edges by this index.
    """

    vertex_count: int
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self) -> None:
        n = int(self.vertex_count)
        if n < 1:
            raise GraphError(f"vertex_count must be positive, got {self.vertex_count}")
        clean = []
        seen = set()
        for edge in self.edges:
            u, v, length = edge
            u, v, length = int(u), int(v), float(length)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"edge ({u}, {v}) references a vertex outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"self-loop at vertex {u}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise GraphError(f"duplicate edge {key}")
            if not length > 0.0 or not np.isfinite(length):
                raise GraphError(f"edge ({u}, {v}) has non-positive length {length}")
            seen.add(key)
            clean.append((u, v, length))
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", tuple(clean))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def edge_set(self) -> frozenset[frozenset[int]]:
        return frozenset(frozenset((u, v)) for u, v, _ in self.edges)

    def edge_index(self, u: int, v: int) -> int:
        """Index of the edge joining ``u`` and ``v``."""
        for j, (a, b, _) in enumerate(self.edges):
            if {a, b} == {u, v}:
                return j
        raise KeyError((u, v))


@dataclass(frozen=True)
class OpenQuantumGraph:
    """A metric graph with leads (semi-infinite edges) attached at vertices.

    Each entry of ``leads`` is one scattering channel.  Vertex degrees count
    the attached leads, so every vertex of the two-lead complete-minus-an-edge
    graph on n vertices has degree n - 1.
    """

    base: MetricGraph
    leads: tuple[int, ...]
    boundary_condition: str = NEUMANN_KIRCHHOFF
    degrees: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        leads = tuple(int(v) for v in self.leads)
        n = self.base.vertex_count
        if not leads:
            raise GraphError("an open graph needs at least one lead")
        for v in leads:
            if not 0 <= v < n:
                raise GraphError(f"lead vertex {v} outside 0..{n - 1}")
        if len(set(leads)) != len(leads):
            raise GraphError(f"at most one lead per vertex, got {leads}")
        if self.boundary_condition != NEUMANN_KIRCHHOFF:
            raise GraphError(f"unsupported boundary condition {self.boundary_condition!r}")
        deg = [0] * n
        for u, v, _ in self.base.edges:
            deg[u] += 1
            deg[v] += 1
        for v in leads:
            deg[v] += 1
        object.__setattr__(self, "leads", leads)
        object.__setattr__(self, "degrees", tuple(deg))

    @property
    def vertex_count(self) -> int:
        return self.base.vertex_count

    @property
    def edges(self) -> tuple[tuple[int, int, float], ...]:
        return self.base.edges

    @property
    def edge_count(self) -> int:
        return self.base.edge_count

    @property
    def channels(self) -> int:
        return len(self.leads)

    def lead_counts(self) -> np.ndarray:
        counts = np.zeros(self.vertex_count, dtype=np.int64)
        counts[list(self.leads)] = 1
        return counts

    def edge_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Endpoints and lengths as flat arrays, in edge-index order."""
        if not self.edges:
            return (np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.float64))
        u, v, length = zip(*self.edges)
        return (np.array(u, np.int64), np.array(v, np.int64), np.array(length, np.float64))


@dataclass(frozen=True, order=True)
class SubgraphMask:
    """Bit-vector over host edge indices; bit j set means host edge j is kept."""

    bits: int
    length: int

    def __post_init__(self) -> None:
        if self.length < 0:
            raise GraphError("mask length must be non-negative")
        if self.bits < 0 or self.bits >> self.length:
            raise GraphError(f"mask {self.bits:#x} does not fit in {self.length} bits")

    @classmethod
    def full(cls, length: int) -> SubgraphMask:
        return cls((1 << length) - 1, length)

    @classmethod
    def from_edges(cls, indices: Sequence[int], length: int) -> SubgraphMask:
        bits = 0
        for j in indices:
            if not 0 <= j < length:
                raise GraphError(f"edge index {j} outside 0..{length - 1}")
            bits |= 1 << j
        return cls(bits, length)

    @classmethod
    def from_hex(cls, text: str, length: int) -> SubgraphMask:
        return cls(int(text, 16), length)

    @property
    def edge_count(self) -> int:
        return self.bits.bit_count()

    def edges(self) -> list[int]:
        return [j for j in range(self.length) if self.bits >> j & 1]

    def hex(self) -> str:
        return f"{self.bits:#x}"


@dataclass(frozen=True)
class VertexAmplitudes:
    r: float
    t: float
    degree: int


def build_open_graph(base: MetricGraph, leads: Sequence[int]) -> OpenQuantumGraph:
    return OpenQuantumGraph(base, tuple(leads))


def total_degree(g: OpenQuantumGraph, v: int) -> int:
    """Number of base edges at ``v`` plus the number of leads at ``v``."""
    if not 0 <= v < g.vertex_count:
        raise GraphError(f"vertex {v} outside 0..{g.vertex_count - 1}")
    return g.degrees[v]


def nk_amplitudes(d: int) -> VertexAmplitudes:
    """Neumann-Kirchhoff vertex amplitudes r = 2/d - 1, t = 2/d."""
    if d < 1:
        raise GraphError(f"vertex degree must be >= 1, got {d}")
    return VertexAmplitudes(r=2.0 / d - 1.0, t=2.0 / d, degree=d)


def apply_mask(host: OpenQuantumGraph, mask: SubgraphMask) -> OpenQuantumGraph:
    """Spanning subgraph of ``host`` keeping the edges selected by ``mask``.

    Vertices, leads and retained lengths are unchanged; degrees are recomputed.
    Retained edges keep their relative order.
    """
    if mask.length != host.edge_count:
        raise GraphError(f"mask has {mask.length} bits, host has {host.edge_count} edges")
    kept = tuple(e for j, e in enumerate(host.edges) if mask.bits >> j & 1)
    return OpenQuantumGraph(MetricGraph(host.vertex_count, kept), host.leads,
                            host.boundary_condition)


def masks_with_edge_count(L: int, l: int) -> Iterator[SubgraphMask]:
    """All masks over ``L`` edges with exactly ``l`` bits set, ascending by value."""
    if L < 0 or not 0 <= l <= L:
        raise GraphError(f"need 0 <= l <= L, got l={l}, L={L}")
    if l == 0:
        yield SubgraphMask(0, L)
        return
    bits = (1 << l) - 1
    stop = 1 << L
    while bits < stop:
        yield SubgraphMask(bits, L)
        # Gosper's hack: next larger integer with the same popcount
        low = bits & -bits
        ripple = bits + low
        bits = (((ripple ^ bits) >> 2) // low) | ripple


def mask_array_with_edge_count(L: int, l: int) -> np.ndarray:
    """Same sequence as :func:`masks_with_edge_count`, as a uint64 array."""
    out = np.fromiter((m.bits for m in masks_with_edge_count(L, l)), dtype=np.uint64,
                      count=comb(L, l))
    return out


def popcount(masks: np.ndarray) -> np.ndarray:
    """Vectorized population count of a uint64 array."""
    x = masks.astype(np.uint64, copy=True)
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return ((x * np.uint64(0x0101010101010101)) >> np.uint64(56)).astype(np.int64)


# -- graph definition files -------------------------------------------------

def graph_to_dict(g: OpenQuantumGraph) -> dict:
    return {
        "vertices": g.vertex_count,
        "edges": [[u, v, length] for u, v, length in g.edges],
        "leads": list(g.leads),
    }


def graph_from_dict(doc: dict) -> OpenQuantumGraph:
    try:
        base = MetricGraph(int(doc["vertices"]), tuple(tuple(e) for e in doc["edges"]))
        return OpenQuantumGraph(base, tuple(doc["leads"]))
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph document: {exc}") from exc


def dumps_graph(g: OpenQuantumGraph) -> str:
    # json writes floats with repr(), so lengths round-trip exactly
    return json.dumps(graph_to_dict(g), indent=2) + "\n"


def loads_graph(text: str) -> OpenQuantumGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"graph file is not valid JSON: {exc}") from exc
    return graph_from_dict(doc)


def save_graph(g: OpenQuantumGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_graph(g))


def load_graph(path) -> OpenQuantumGraph:
    with open(path) as fh:
        return loads_graph(fh.read())
