"""Vectorized pure-numpy kernels (batch axis first)."""
from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _transitions(eu_bytes: bytes, ev_bytes: bytes, n: int):
    eu = np.frombuffer(eu_bytes, dtype=np.int64)
    ev = np.frombuffer(ev_bytes, dtype=np.int64)
    L = len(eu)
    rows, cols, erow, ecol, heads, refl = [], [], [], [], [], []
    src_rows, src_edge, src_head = [], [], []
    for e in range(L):
        for row, head in ((2 * e, ev[e]), (2 * e + 1, eu[e])):
            src_rows.append(row)
            src_edge.append(e)
            src_head.append(head)
            for e2 in range(L):
                if eu[e2] == head:
                    col = 2 * e2
                elif ev[e2] == head:
                    col = 2 * e2 + 1
                else:
                    continue
                rows.append(row)
                cols.append(col)
                erow.append(e)
                ecol.append(e2)
                heads.append(head)
                refl.append(e2 == e)
    inc = np.zeros((L, n), dtype=np.int64)
    inc[np.arange(L), eu] = 1
    inc[np.arange(L), ev] = 1
    as_int = lambda xs: np.array(xs, dtype=np.int64)
    return (as_int(rows), as_int(cols), as_int(erow), as_int(ecol), as_int(heads),
            np.array(refl, dtype=bool), as_int(src_rows), as_int(src_edge), as_int(src_head), inc)


def assemble(masks, eu, ev, z, lead_count, sources):
    """Padded path-family systems for a batch of subgraph masks.

    Unknown ``2e`` is the directed edge eu[e] -> ev[e] and ``2e + 1`` the
    reverse.  Rows of edges absent from a mask reduce to the identity with a
    zero right-hand side, so every system has size ``2L``.

    Returns ``(A, rhs, deg)`` with shapes ``(B, 2L, 2L)``, ``(B, 2L, R)`` and
    ``(B, n)``; column ``s`` of ``rhs`` carries the source at vertex
    ``sources[s]``.
    """
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    eu = np.ascontiguousarray(eu, dtype=np.int64)
    ev = np.ascontiguousarray(ev, dtype=np.int64)
    lead_count = np.asarray(lead_count, dtype=np.int64)
    n = len(lead_count)
    B, L = len(masks), len(eu)
    N = 2 * L
    R = len(sources)
    rows, cols, erow, ecol, heads, refl, src_rows, src_edge, src_head, inc = _transitions(
        eu.tobytes(), ev.tobytes(), n)

    present = ((masks[:, None] >> np.arange(L, dtype=np.uint64)) & np.uint64(1)).astype(bool)
    deg = lead_count[None, :] + present.astype(np.int64) @ inc
    safe = np.where(deg > 0, deg, 1).astype(np.float64)
    t = 2.0 / safe
    r = t - 1.0

    A = np.zeros((B, N, N), dtype=np.complex128)
    A[:, np.arange(N), np.arange(N)] = 1.0
    if len(rows):
        amp = np.where(refl[None, :], r[:, heads], t[:, heads])
        live = present[:, erow] & present[:, ecol]
        A[:, rows, cols] = np.where(live, -(z[erow][None, :] * amp), 0.0)

    rhs = np.zeros((B, N, R), dtype=np.complex128)
    for s, vertex in enumerate(sources):
        hit = src_head == vertex
        if not hit.any():
            continue
        e = src_edge[hit]
        val = z[e][None, :] * t[:, vertex][:, None]
        rhs[:, src_rows[hit], s] = np.where(present[:, e], val, 0.0)
    return A, rhs, deg


def _abs2(a):
    return a.real * a.real + a.imag * a.imag


def lu_solve(A, rhs):
    """Solve a stack of square systems by LU with partial pivoting.

    ``A`` and ``rhs`` are overwritten.  Returns ``(x, pivot_ratio)`` where
    ``pivot_ratio[b]`` is the smallest pivot magnitude over the largest entry
    magnitude of the original matrix.
    """
    B, N, _ = A.shape
    R = rhs.shape[2]
    x = np.empty((B, N, R), dtype=np.complex128)
    if N == 0:
        return x, np.ones(B)
    idx = np.arange(B)
    scale = _abs2(A).reshape(B, -1).max(axis=1)
    minp = np.full(B, np.inf)
    for k in range(N):
        p = k + np.argmax(_abs2(A[:, k:, k]), axis=1)
        swap = p != k
        if swap.any():
            b = idx[swap]
            pk = p[swap]
            A[b, k], A[b, pk] = A[b, pk].copy(), A[b, k].copy()
            rhs[b, k], rhs[b, pk] = rhs[b, pk].copy(), rhs[b, k].copy()
        best = _abs2(A[:, k, k])
        minp = np.minimum(minp, best)
        piv = np.where(best > 0.0, A[:, k, k], 1.0)
        if k + 1 < N:
            f = A[:, k + 1:, k] / piv[:, None]
            A[:, k + 1:, k + 1:] -= f[:, :, None] * A[:, None, k, k + 1:]
            rhs[:, k + 1:, :] -= f[:, :, None] * rhs[:, None, k, :]
    for i in range(N - 1, -1, -1):
        d = A[:, i, i]
        d = np.where(_abs2(d) > 0.0, d, 1.0)
        xi = rhs[:, i, :] / d[:, None]
        x[:, i, :] = xi
        if i:
            rhs[:, :i, :] -= A[:, :i, i][:, :, None] * xi[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sqrt(np.where(scale > 0, minp / scale, 0.0))
    return x, ratio


def orbit_min(masks, edge_perms):
    """Smallest image of each mask under a group of edge permutations."""
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    edge_perms = np.asarray(edge_perms, dtype=np.int64)
    best = masks.copy()
    one = np.uint64(1)
    bits = [(masks >> np.uint64(j)) & one for j in range(edge_perms.shape[1])]
    for perm in edge_perms:
        image = np.zeros_like(masks)
        for j, target in enumerate(perm):
            image |= bits[j] << np.uint64(target)
        np.minimum(best, image, out=best)
    return best
