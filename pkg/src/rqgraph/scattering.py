"""Path-family linear systems and global scattering amplitudes of open quantum graphs.

For every retained edge {u, v} there are two unknowns, one per direction.
The unknown p_uv sums all paths that leave u along {u, v} and end in the exit
lead.  It satisfies

    p_uv - z_uv * (r_v p_vu + t_v * sum_{w in N(v), w != u} p_vw) = z_uv t_v [v == exit]

with z_uv = exp(i k l_uv) and Neumann-Kirchhoff amplitudes r_v = 2/d_v - 1,
t_v = 2/d_v.  The transmission amplitude from entrance i is
sigma = t_i * sum_j p_ij; the reflection amplitude uses the same system with
the source moved to i and reads rho = r_i + t_i * sum_j q_ij.

Singular systems
----------------
On equilateral graphs the system matrix is exactly singular at isolated
wavenumbers (kl = 0, pi, 2 pi, ...) because of bound states that never touch
the leads.  When LU reports a pivot below ``PIVOT_RTOL`` the point is retried
with a truncated-SVD minimum-norm solve.  The result is accepted (status
``BOUND_STATE``) only if the system is consistent and the requested amplitude
does not see the dropped null space; then the amplitude equals its limit from
neighbouring k.  Anything else is reported as ``SINGULAR`` and never patched.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .graph import GraphError, OpenQuantumGraph, SubgraphMask

TWO_PI = 2.0 * math.pi

PIVOT_RTOL = 1e-12
RANK_RTOL = 1e-9
RESIDUAL_RTOL = 1e-10
NULL_COUPLING_TOL = 1e-8

OK, BOUND_STATE, SINGULAR = 0, 1, 2

# systems per kernel call; bounds the (B, 2L, 2L) scratch array
_CHUNK_ENTRIES = 1 << 22


class SingularAtK(ArithmeticError):
    """The path-family system cannot be solved reliably at this wavenumber."""


@dataclass(frozen=True)
class PathFamilySystem:
    unknowns: tuple[tuple[int, int], ...]
    matrix: np.ndarray
    rhs: np.ndarray
    k: float
    exit_vertex: int


@dataclass(frozen=True)
class ScatteringResult:
    """Amplitudes from channel i to channel f at one wavenumber.

    When ``flagged`` is set the system was singular and the amplitude and
    probability fields are NaN.  ``bound_state`` marks a removable
    singularity that was resolved (see the module docstring).
    """

    k: float
    sigma: complex
    rho: complex
    T: float
    R: float
    flux_defect: float
    flagged: bool = False
    bound_state: bool = False


def edge_phases(lengths: np.ndarray, k: float) -> np.ndarray:
    """z_e = exp(i k l_e), with the phase reduced modulo 2 pi first.

    The reduction makes k and k + 2 pi / l give bit-identical z whenever the
    shifted phase is itself exactly representable.
    """
    phase = np.fmod(k * np.asarray(lengths, dtype=np.float64), TWO_PI)
    return np.exp(1j * phase)


def probability(amplitude):
    """|a|^2 as re^2 + im^2, so scalars and arrays round identically."""
    return amplitude.real * amplitude.real + amplitude.imag * amplitude.imag


def _require_lead(g: OpenQuantumGraph, v: int, role: str) -> None:
    if not 0 <= v < g.vertex_count:
        raise GraphError(f"{role} vertex {v} outside 0..{g.vertex_count - 1}")
    if v not in g.leads:
        raise GraphError(f"{role} vertex {v} carries no lead")


def _outgoing(eu: np.ndarray, ev: np.ndarray, v: int) -> tuple[np.ndarray, np.ndarray]:
    """Directed unknowns leaving ``v`` and the edge each belongs to."""
    idx, edge = [], []
    for e in range(len(eu)):
        if eu[e] == v:
            idx.append(2 * e)
            edge.append(e)
        elif ev[e] == v:
            idx.append(2 * e + 1)
            edge.append(e)
    return np.array(idx, dtype=np.int64), np.array(edge, dtype=np.int64)


def _min_norm(A: np.ndarray, b: np.ndarray, functional: np.ndarray) -> tuple[np.ndarray, bool]:
    """Truncated-SVD solve of a (near) singular system; returns (x, accepted)."""
    U, s, Vh = np.linalg.svd(A)
    if s[0] == 0.0:
        return np.zeros((A.shape[1], b.shape[1]), complex), False
    keep = s > RANK_RTOL * s[0]
    coeff = (U[:, keep].conj().T @ b) / s[keep][:, None]
    x = Vh[keep].conj().T @ coeff
    res = np.linalg.norm(A @ x - b, axis=0)
    ok = bool(np.all(res <= RESIDUAL_RTOL * (1.0 + np.linalg.norm(b, axis=0))))
    if ok and not keep.all():
        coupling = np.abs(Vh[~keep].conj() @ functional)
        ok = bool(coupling.max() <= NULL_COUPLING_TOL * max(1.0, np.linalg.norm(functional)))
    return x, ok


@dataclass(frozen=True)
class _Plan:
    eu: np.ndarray
    ev: np.ndarray
    lengths: np.ndarray
    lead_count: np.ndarray
    n: int
    L: int


def _plan(g: OpenQuantumGraph) -> _Plan:
    eu, ev, lengths = g.edge_arrays()
    return _Plan(eu, ev, lengths, g.lead_counts(), g.vertex_count, g.edge_count)


def _solve_chunk(plan: _Plan, masks: np.ndarray, z: np.ndarray, i: int, f: int,
                 reflection: bool):
    sources = np.array([f, i] if reflection else [f], dtype=np.int64)
    A, rhs, deg = kernels.assemble(masks, plan.eu, plan.ev, z, plan.lead_count, sources)
    x, ratio = kernels.lu_solve(A, rhs)

    out_idx, out_edge = _outgoing(plan.eu, plan.ev, i)
    t_i = 2.0 / deg[:, i]
    r_i = t_i - 1.0
    present = ((masks[:, None] >> out_edge.astype(np.uint64)) & np.uint64(1)).astype(bool)
    B = len(masks)
    status = np.zeros(B, dtype=np.int8)

    bad = np.flatnonzero(ratio < PIVOT_RTOL)
    if len(bad):
        A2, rhs2, _ = kernels.assemble(masks[bad], plan.eu, plan.ev, z, plan.lead_count, sources)
        N = A2.shape[1]
        for slot, b in enumerate(bad):
            functional = np.zeros(N, complex)
            functional[out_idx[present[b]]] = t_i[b]
            xb, accepted = _min_norm(A2[slot], rhs2[slot], functional)
            x[b] = xb
            status[b] = BOUND_STATE if accepted else SINGULAR

    paths = np.where(present[:, :, None], x[:, out_idx, :], 0.0)
    totals = paths.sum(axis=1)
    sigma = t_i * totals[:, 0]
    rho = r_i + t_i * totals[:, 1] if reflection else np.full(B, np.nan + 0j)
    sigma[status == SINGULAR] = np.nan
    rho[status == SINGULAR] = np.nan
    return sigma, rho, status


def solve_masks(host: OpenQuantumGraph, masks, k: float, i: int | None = None,
                f: int | None = None, reflection: bool = False):
    """Amplitudes for many spanning subgraphs of ``host`` at one wavenumber.

    ``masks`` is a uint64 array of edge bit-vectors.  Returns
    ``(sigma, rho, status)``; ``rho`` is NaN unless ``reflection`` is set and
    ``status`` holds OK / BOUND_STATE / SINGULAR per mask.
    """
    i, f = _channels(host, i, f)
    plan = _plan(host)
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    z = edge_phases(plan.lengths, k)
    N = 2 * plan.L
    chunk = max(1, _CHUNK_ENTRIES // max(1, N * N))
    parts = [_solve_chunk(plan, masks[s:s + chunk], z, i, f, reflection)
             for s in range(0, len(masks), chunk)]
    if not parts:
        empty = np.zeros(0, complex)
        return empty, empty.copy(), np.zeros(0, np.int8)
    sigma, rho, status = (np.concatenate(col) for col in zip(*parts))
    return sigma, rho, status


def mask_transmissions(host: OpenQuantumGraph, masks, k_values: Sequence[float],
                       i: int | None = None, f: int | None = None, threads: int = 1):
    """|sigma|^2 for every (k, mask) pair; rows follow ``k_values``.

    Wavenumbers are dispatched to a thread pool; each row depends only on its
    own k, so results do not depend on ``threads``.
    """
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    k_values = [float(k) for k in k_values]

    def one(k):
        sigma, _, status = solve_masks(host, masks, k, i, f)
        return probability(sigma), status

    if threads > 1 and len(k_values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, k_values))
    else:
        rows = [one(k) for k in k_values]
    T = np.array([r[0] for r in rows]).reshape(len(k_values), len(masks))
    status = np.array([r[1] for r in rows], dtype=np.int8).reshape(len(k_values), len(masks))
    return T, status


def _channels(g: OpenQuantumGraph, i: int | None, f: int | None) -> tuple[int, int]:
    if i is None:
        i = g.leads[0]
    if f is None:
        if len(g.leads) < 2:
            raise GraphError("graph has a single lead; give the exit vertex explicitly")
        f = g.leads[1]
    _require_lead(g, i, "entrance")
    _require_lead(g, f, "exit")
    return int(i), int(f)


# -- single-graph API ---------------------------------------------------------

def _full_mask(g: OpenQuantumGraph) -> np.ndarray:
    return np.array([(1 << g.edge_count) - 1], dtype=np.uint64)


def assemble(g: OpenQuantumGraph, k: float, exit_vertex: int) -> PathFamilySystem:
    """Path-family system of ``g`` at wavenumber ``k`` with the source at ``exit_vertex``.

    Unknown 2e is edge e traversed from its first to its second endpoint,
    2e + 1 the reverse.
    """
    _require_lead(g, exit_vertex, "exit")
    plan = _plan(g)
    z = edge_phases(plan.lengths, k)
    A, rhs, _ = kernels.assemble(_full_mask(g), plan.eu, plan.ev, z, plan.lead_count,
                                 np.array([exit_vertex], dtype=np.int64))
    unknowns = []
    for u, v, _ in g.edges:
        unknowns += [(u, v), (v, u)]
    return PathFamilySystem(tuple(unknowns), A[0], rhs[0, :, 0], float(k), int(exit_vertex))


def solve_path_families(system: PathFamilySystem) -> np.ndarray:
    """Solve ``system`` by LU with partial pivoting.

    A tiny pivot triggers the minimum-norm retry; if that system is
    inconsistent, :class:`SingularAtK` is raised.  The returned vector always
    satisfies the residual bound ``RESIDUAL_RTOL * (1 + |rhs|)``.
    """
    M = np.array(system.matrix, dtype=np.complex128)
    b = np.array(system.rhs, dtype=np.complex128)
    N = len(b)
    if N == 0:
        return np.zeros(0, complex)
    x, ratio = kernels.lu_solve(M[None].copy(), b[None, :, None].copy())
    x = x[0, :, 0]
    bound = RESIDUAL_RTOL * (1.0 + np.linalg.norm(b))
    if ratio[0] < PIVOT_RTOL:
        # no functional to protect here: consistency is all that is asked
        x2, ok = _min_norm(M, b[:, None], np.zeros(N, complex))
        if not ok:
            raise SingularAtK(f"path-family system singular at k={system.k!r}")
        x = x2[:, 0]
    if np.linalg.norm(M @ x - b) > bound:
        raise SingularAtK(f"residual above tolerance at k={system.k!r}")
    return x


def transmission_amplitude(g: OpenQuantumGraph, k: float, i: int, f: int) -> complex:
    """Global transmission amplitude sigma from lead i to lead f."""
    if i == f:
        raise GraphError("entrance and exit must differ")
    sigma, _, status = solve_masks(g, _full_mask(g), k, i, f)
    if status[0] == SINGULAR:
        raise SingularAtK(f"transmission singular at k={k!r}")
    return complex(sigma[0])


def reflection_amplitude(g: OpenQuantumGraph, k: float, i: int) -> complex:
    """Global reflection amplitude rho back into lead i."""
    _require_lead(g, i, "entrance")
    sigma, rho, status = solve_masks(g, _full_mask(g), k, i, i, reflection=True)
    if status[0] == SINGULAR:
        raise SingularAtK(f"reflection singular at k={k!r}")
    return complex(rho[0])


def scatter(g: OpenQuantumGraph, k: float, i: int | None = None,
            f: int | None = None) -> ScatteringResult:
    i, f = _channels(g, i, f)
    if i == f:
        raise GraphError("entrance and exit must differ")
    sigma, rho, status = solve_masks(g, _full_mask(g), k, i, f, reflection=True)
    return _result(float(k), complex(sigma[0]), complex(rho[0]), int(status[0]))


def _result(k: float, sigma: complex, rho: complex, status: int) -> ScatteringResult:
    if status == SINGULAR:
        nan = float("nan")
        return ScatteringResult(k, complex(nan, nan), complex(nan, nan), nan, nan, nan,
                                flagged=True)
    T = probability(sigma)
    R = probability(rho)
    return ScatteringResult(k, sigma, rho, T, R, abs(T + R - 1.0),
                            bound_state=status == BOUND_STATE)


def scatter_curve(g: OpenQuantumGraph, k_grid: Sequence[float], i: int | None = None,
                  f: int | None = None, mask: SubgraphMask | None = None,
                  threads: int = 1) -> list[ScatteringResult]:
    """:func:`scatter` over a grid, optionally on the subgraph selected by ``mask``."""
    i, f = _channels(g, i, f)
    if mask is None:
        bits = _full_mask(g)
    else:
        if mask.length != g.edge_count:
            raise GraphError(f"mask has {mask.length} bits, graph has {g.edge_count} edges")
        bits = np.array([mask.bits], dtype=np.uint64)

    def one(k):
        sigma, rho, status = solve_masks(g, bits, k, i, f, reflection=True)
        return _result(float(k), complex(sigma[0]), complex(rho[0]), int(status[0]))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, k_grid))
    return [one(k) for k in k_grid]


def transmission_curve(g: OpenQuantumGraph, k_grid: Sequence[float], i: int | None = None,
                       f: int | None = None) -> list[tuple[float, float]]:
    """(k, T) per grid point; singular points carry T = NaN rather than a value."""
    k_grid = list(k_grid)
    if not k_grid:
        raise ValueError("empty k grid")
    if any(b < a for a, b in zip(k_grid, k_grid[1:])):
        raise ValueError("k grid must be ascending")
    return [(r.k, r.T) for r in scatter_curve(g, k_grid, i, f)]

