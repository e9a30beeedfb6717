"""Lead-preserving automorphisms and orbit classification of spanning subgraphs."""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from . import kernels
from .graph import OpenQuantumGraph, SubgraphMask, mask_array_with_edge_count

MAX_VERTICES = 10


class ClassificationTooLarge(ValueError):
    pass


@dataclass(frozen=True, order=True)
class IsoClass:
    representative: SubgraphMask
    orbit_size: int
    edge_count: int


def lead_preserving_automorphisms(host: OpenQuantumGraph) -> list[tuple[int, ...]]:
    """All vertex permutations preserving the host edges and the lead set.

    Lead vertices may be exchanged among themselves (setwise, not pointwise).
    Edge lengths must be preserved as well, which is automatic on equilateral
    hosts.  Permutations are returned as image tuples, sorted.
    """
    n = host.vertex_count
    length = {}
    for u, v, ell in host.edges:
        length[(u, v)] = length[(v, u)] = ell
    leads = set(host.leads)
    deg = host.degrees
    image = [-1] * n
    used = [False] * n
    found: list[tuple[int, ...]] = []

    def extend(v: int) -> None:
        if v == n:
            found.append(tuple(image))
            return
        for w in range(n):
            if used[w] or deg[w] != deg[v] or (w in leads) != (v in leads):
                continue
            if any(length.get((u, v)) != length.get((image[u], w)) for u in range(v)):
                continue
            image[v] = w
            used[w] = True
            extend(v + 1)
            used[w] = False
        image[v] = -1

    extend(0)
    return sorted(found)


def edge_permutation(host: OpenQuantumGraph, perm: tuple[int, ...]) -> np.ndarray:
    """Where each host edge index lands under the vertex permutation ``perm``."""
    index = {frozenset((u, v)): j for j, (u, v, _) in enumerate(host.edges)}
    return np.array([index[frozenset((perm[u], perm[v]))] for u, v, _ in host.edges],
                    dtype=np.int64)


def _edge_perms(host: OpenQuantumGraph) -> np.ndarray:
    group = lead_preserving_automorphisms(host)
    if host.edge_count == 0:
        return np.zeros((len(group), 0), dtype=np.int64)
    return np.stack([edge_permutation(host, p) for p in group])


def _check_size(host: OpenQuantumGraph, mask_count: int, max_masks: int) -> None:
    if host.vertex_count > MAX_VERTICES:
        raise ClassificationTooLarge(
            f"host has {host.vertex_count} vertices; classification supports <= {MAX_VERTICES}")
    if mask_count > max_masks:
        raise ClassificationTooLarge(f"{mask_count} masks exceed the limit of {max_masks}")


def classify_subgraphs(host: OpenQuantumGraph, l: int, max_masks: int = 1 << 24,
                       _perms: np.ndarray | None = None) -> list[IsoClass]:
    """Orbits of the l-edge spanning subgraphs under lead-preserving automorphisms.

    Each class is represented by the numerically smallest mask of its orbit;
    classes come sorted by representative.
    """
    L = host.edge_count
    _check_size(host, comb(L, l) if 0 <= l <= L else 0, max_masks)
    masks = mask_array_with_edge_count(L, l)
    perms = _edge_perms(host) if _perms is None else _perms
    reps = kernels.orbit_min(masks, perms)
    values, counts = np.unique(reps, return_counts=True)
    return [IsoClass(SubgraphMask(int(v), L), int(c), l) for v, c in zip(values, counts)]


def classify_all(host: OpenQuantumGraph, max_masks: int = 1 << 24) -> list[IsoClass]:
    """Classes for every edge count, ordered by edge count then representative."""
    L = host.edge_count
    _check_size(host, 1 << L, max_masks)
    perms = _edge_perms(host)
    out: list[IsoClass] = []
    for l in range(L + 1):
        out += classify_subgraphs(host, l, max_masks, _perms=perms)
    return out
