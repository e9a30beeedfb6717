"""Numba-compiled kernels; same contracts as the numpy versions in ``_numpy``."""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _assemble(masks, eu, ev, z, lead_count, sources):
    B = masks.shape[0]
    L = eu.shape[0]
    n = lead_count.shape[0]
    N = 2 * L
    R = sources.shape[0]
    A = np.zeros((B, N, N), dtype=np.complex128)
    rhs = np.zeros((B, N, R), dtype=np.complex128)
    degs = np.empty((B, n), dtype=np.int64)
    present = np.empty(L, dtype=np.bool_)
    for b in range(B):
        m = masks[b]
        deg = degs[b]
        for v in range(n):
            deg[v] = lead_count[v]
        for e in range(L):
            present[e] = (m >> np.uint64(e)) & np.uint64(1) == np.uint64(1)
            if present[e]:
                deg[eu[e]] += 1
                deg[ev[e]] += 1
        a = A[b]
        for i in range(N):
            a[i, i] = 1.0
        for e in range(L):
            if not present[e]:
                continue
            for side in range(2):
                if side == 0:
                    row = 2 * e
                    head = ev[e]
                else:
                    row = 2 * e + 1
                    head = eu[e]
                t = 2.0 / deg[head]
                r = t - 1.0
                for e2 in range(L):
                    if not present[e2]:
                        continue
                    if eu[e2] == head:
                        col = 2 * e2
                    elif ev[e2] == head:
                        col = 2 * e2 + 1
                    else:
                        continue
                    if e2 == e:
                        a[row, col] = -(z[e] * r)
                    else:
                        a[row, col] = -(z[e] * t)
                for s in range(R):
                    if sources[s] == head:
                        rhs[b, row, s] = z[e] * t
    return A, rhs, degs


def assemble(masks, eu, ev, z, lead_count, sources):
    return _assemble(np.ascontiguousarray(masks, dtype=np.uint64),
                     np.ascontiguousarray(eu, dtype=np.int64),
                     np.ascontiguousarray(ev, dtype=np.int64),
                     np.ascontiguousarray(z, dtype=np.complex128),
                     np.ascontiguousarray(lead_count, dtype=np.int64),
                     np.ascontiguousarray(sources, dtype=np.int64))


assemble.__doc__ = "Numba twin of :func:`rqgraph.kernels._numpy.assemble`."


@njit(cache=True, nogil=True, inline="always")
def _abs2(c):
    return c.real * c.real + c.imag * c.imag


@njit(cache=True, nogil=True)
def _lu_solve(A, rhs):
    B, N, _ = A.shape
    R = rhs.shape[2]
    x = np.empty((B, N, R), dtype=np.complex128)
    ratio = np.ones(B)
    for b in range(B):
        a = A[b]
        y = rhs[b]
        scale = 0.0
        for i in range(N):
            for j in range(N):
                v = _abs2(a[i, j])
                if v > scale:
                    scale = v
        minp = np.inf
        for k in range(N):
            p = k
            best = _abs2(a[k, k])
            for i in range(k + 1, N):
                v = _abs2(a[i, k])
                if v > best:
                    best = v
                    p = i
            if p != k:
                for j in range(N):
                    tmp = a[k, j]
                    a[k, j] = a[p, j]
                    a[p, j] = tmp
                for s in range(R):
                    tmp = y[k, s]
                    y[k, s] = y[p, s]
                    y[p, s] = tmp
            if best < minp:
                minp = best
            piv = a[k, k] if best > 0.0 else 1.0 + 0.0j
            for i in range(k + 1, N):
                if a[i, k] == 0.0:
                    continue
                f = a[i, k] / piv
                for j in range(k + 1, N):
                    a[i, j] -= f * a[k, j]
                for s in range(R):
                    y[i, s] -= f * y[k, s]
        for i in range(N - 1, -1, -1):
            d = a[i, i]
            if _abs2(d) == 0.0:
                d = 1.0 + 0.0j
            for s in range(R):
                xi = y[i, s] / d
                x[b, i, s] = xi
                for h in range(i):
                    y[h, s] -= a[h, i] * xi
        if N > 0:
            ratio[b] = np.sqrt(minp / scale) if scale > 0.0 else 0.0
    return x, ratio


def lu_solve(A, rhs):
    """Numba twin of :func:`rqgraph.kernels._numpy.lu_solve` (overwrites inputs)."""
    return _lu_solve(A, rhs)


@njit(cache=True, nogil=True)
def _orbit_min(masks, edge_perms):
    G, L = edge_perms.shape
    out = masks.copy()
    for b in range(masks.shape[0]):
        m = masks[b]
        best = m
        for g in range(G):
            image = np.uint64(0)
            for j in range(L):
                if (m >> np.uint64(j)) & np.uint64(1):
                    image |= np.uint64(1) << np.uint64(edge_perms[g, j])
            if image < best:
                best = image
        out[b] = best
    return out


def orbit_min(masks, edge_perms):
    return _orbit_min(np.ascontiguousarray(masks, dtype=np.uint64),
                      np.ascontiguousarray(edge_perms, dtype=np.int64))
