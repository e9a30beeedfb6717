"""Transmission of randomized quantum graphs.

Every host edge survives independently with probability p.  The ensemble
transmission is

    T(k, p) = sum_l C(L, l) p^l (1 - p)^(L - l) <|sigma|^2>_l(k)

where <.>_l averages over spanning subgraphs with l edges.  Averaging over
all C(L, l) subgraphs gives the exact coefficient; averaging over a random
ensemble of at most ``cap`` distinct subgraphs per l gives the Monte Carlo
approximation, which coincides with the exact value once every ensemble is
saturated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb
from typing import Sequence

import numpy as np

from .graph import GraphError, OpenQuantumGraph, SubgraphMask, mask_array_with_edge_count, popcount
from .scattering import SINGULAR, mask_transmissions

EXACT, MONTE_CARLO = "exact", "monte_carlo"
DEFAULT_ENUM_CAP = 24
DEFAULT_CAP = 250
DEFAULT_SEED = 42
MAX_FLAGGED_FRACTION = 0.01


class EnumerationTooLarge(ValueError):
    pass


class TooManySingular(ArithmeticError):
    pass


@dataclass(frozen=True)
class EdgeCountProfile:
    """Per-edge-count averages of |sigma|^2 at one wavenumber.

    Index l of each array refers to subgraphs with l edges.  ``sample_count``
    excludes flagged (singular) masks, which are counted in ``flagged_count``.
    """

    L: int
    k: float
    mode: str
    sample_count: np.ndarray
    mean_T: np.ndarray
    flagged_count: np.ndarray


@dataclass(frozen=True)
class RqgEstimate:
    profile: EdgeCountProfile
    p_grid: np.ndarray
    values: np.ndarray
    seed: int | None = None
    cap: int | None = None

    @property
    def k(self) -> float:
        return self.profile.k


def subgraph_weight(L: int, l: int, p: float) -> float:
    """Probability p^l (1 - p)^(L - l) of one particular l-edge subgraph."""
    if not 0 <= l <= L:
        raise ValueError(f"need 0 <= l <= L, got l={l}, L={L}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return p ** l * (1.0 - p) ** (L - l)


def binomial_weights(L: int, p_grid) -> np.ndarray:
    """Matrix of C(L, l) p^l (1 - p)^(L - l), shape (len(p_grid), L + 1)."""
    p = np.asarray(p_grid, dtype=np.float64)
    if np.any((p < 0.0) | (p > 1.0)):
        raise ValueError("p values must lie in [0, 1]")
    l = np.arange(L + 1)
    coeff = np.array([float(comb(L, j)) for j in l])
    return coeff[None, :] * p[:, None] ** l[None, :] * (1.0 - p[:, None]) ** (L - l)[None, :]


# -- ensembles ----------------------------------------------------------------

def _subseed(seed: int, l: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(l)])


def ensemble_bits(L: int, l: int, cap: int, seed: int) -> np.ndarray:
    """Sorted uint64 masks of one ensemble; see :func:`sample_ensemble`."""
    if cap < 1:
        raise ValueError("cap must be >= 1")
    if not 0 <= l <= L:
        raise ValueError(f"need 0 <= l <= L, got l={l}, L={L}")
    total = comb(L, l)
    if total <= cap:
        return mask_array_with_edge_count(L, l)
    rng = np.random.default_rng(_subseed(seed, l))
    if total > 4 * cap:
        drawn: set[int] = set()
        while len(drawn) < cap:
            picks = rng.choice(L, size=l, replace=False)
            drawn.add(sum(1 << int(j) for j in picks))
        return np.array(sorted(drawn), dtype=np.uint64)
    everything = mask_array_with_edge_count(L, l)
    return np.sort(everything[rng.permutation(total)[:cap]])


def sample_ensemble(L: int, l: int, cap: int, seed: int) -> list[SubgraphMask]:
    """Distinct l-edge masks: all of them if there are at most ``cap``,
    otherwise ``cap`` drawn uniformly without replacement.

    The draw depends only on (seed, l), so each edge count has its own
    independent, schedule-free stream.
    """
    return [SubgraphMask(int(b), L) for b in ensemble_bits(L, l, cap, seed)]


# -- profiles -----------------------------------------------------------------

def _reduce(L: int, k: float, mode: str, groups: list[np.ndarray], T_row: np.ndarray,
            status_row: np.ndarray) -> EdgeCountProfile:
    sample = np.zeros(L + 1, dtype=np.int64)
    flagged = np.zeros(L + 1, dtype=np.int64)
    mean = np.full(L + 1, np.nan)
    for l, idx in enumerate(groups):
        bad = status_row[idx] == SINGULAR
        good = T_row[idx][~bad]
        flagged[l] = int(bad.sum())
        sample[l] = len(good)
        if len(idx) and flagged[l] > MAX_FLAGGED_FRACTION * len(idx):
            raise TooManySingular(
                f"{flagged[l]} of {len(idx)} subgraphs with {l} edges are singular at k={k!r}")
        if len(good):
            # fsum is exact-then-rounded, hence independent of summation order
            mean[l] = math.fsum(good.tolist()) / len(good)
    return EdgeCountProfile(L, float(k), mode, sample, mean, flagged)


def _profiles(host, masks, groups, k_values, mode, threads):
    T, status = mask_transmissions(host, masks, k_values, threads=threads)
    return [_reduce(host.edge_count, k, mode, groups, T[j], status[j])
            for j, k in enumerate(k_values)]


def _all_masks(host: OpenQuantumGraph, enum_cap: int):
    L = host.edge_count
    if L > enum_cap:
        raise EnumerationTooLarge(
            f"host has {L} edges; exact enumeration of 2^{L} subgraphs exceeds the cap 2^{enum_cap}")
    masks = np.arange(1 << L, dtype=np.uint64)
    pc = popcount(masks)
    groups = [np.flatnonzero(pc == l) for l in range(L + 1)]
    return masks, groups


def exact_profiles(host: OpenQuantumGraph, k_values: Sequence[float], *, threads: int = 1,
                   enum_cap: int = DEFAULT_ENUM_CAP) -> list[EdgeCountProfile]:
    masks, groups = _all_masks(host, enum_cap)
    return _profiles(host, masks, groups, list(k_values), EXACT, threads)


def exact_profile(host: OpenQuantumGraph, k: float, *,
                  enum_cap: int = DEFAULT_ENUM_CAP) -> EdgeCountProfile:
    """Average |sigma|^2 over every spanning subgraph, grouped by edge count."""
    return exact_profiles(host, [k], enum_cap=enum_cap)[0]


def _mc_masks(L: int, cap: int, seed: int):
    parts = [ensemble_bits(L, l, cap, seed) for l in range(L + 1)]
    masks = np.concatenate(parts)
    bounds = np.cumsum([0] + [len(p) for p in parts])
    groups = [np.arange(bounds[l], bounds[l + 1]) for l in range(L + 1)]
    return masks, groups


def mc_profiles(host: OpenQuantumGraph, k_values: Sequence[float], cap: int = DEFAULT_CAP,
                seed: int = DEFAULT_SEED, *, threads: int = 1) -> list[EdgeCountProfile]:
    """Monte Carlo profiles; the same ensembles are reused at every k."""
    if host.edge_count > 63:
        raise GraphError("masks are stored in 64 bits; hosts are limited to 63 edges")
    masks, groups = _mc_masks(host.edge_count, cap, seed)
    return _profiles(host, masks, groups, list(k_values), MONTE_CARLO, threads)


def mc_profile(host: OpenQuantumGraph, k: float, cap: int = DEFAULT_CAP,
               seed: int = DEFAULT_SEED) -> EdgeCountProfile:
    return mc_profiles(host, [k], cap, seed)[0]


# -- ensemble transmission ------------------------------------------------------

def approx_transmission(profile: EdgeCountProfile, p_grid, *, seed: int | None = None,
                        cap: int | None = None) -> RqgEstimate:
    """Binomially weighted sum of the per-edge-count means."""
    p = np.array(p_grid, dtype=np.float64)
    weights = binomial_weights(profile.L, p)
    values = np.array([math.fsum(w * profile.mean_T) for w in weights])
    return RqgEstimate(profile, p, values, seed, cap)


def exact_transmission(host: OpenQuantumGraph, k: float, p_grid, *,
                       enum_cap: int = DEFAULT_ENUM_CAP) -> RqgEstimate:
    """Exact ensemble transmission from full enumeration.

    Grouping by edge count is algebraically the same as weighting every
    subgraph by p^l (1 - p)^(L - l) individually.
    """
    return approx_transmission(exact_profile(host, k, enum_cap=enum_cap), p_grid)


def exact_surface(host: OpenQuantumGraph, k_values, p_grid, *, threads: int = 1,
                  enum_cap: int = DEFAULT_ENUM_CAP) -> list[RqgEstimate]:
    return [approx_transmission(pr, p_grid)
            for pr in exact_profiles(host, k_values, threads=threads, enum_cap=enum_cap)]


def approx_surface(host: OpenQuantumGraph, k_values, p_grid, cap: int = DEFAULT_CAP,
                   seed: int = DEFAULT_SEED, *, threads: int = 1) -> list[RqgEstimate]:
    return [approx_transmission(pr, p_grid, seed=seed, cap=cap)
            for pr in mc_profiles(host, k_values, cap, seed, threads=threads)]


def surface_values(estimates: Sequence[RqgEstimate]) -> np.ndarray:
    """Stack estimates into a (len(k), len(p)) array."""
    return np.stack([e.values for e in estimates])


def max_abs_error(exact, approx) -> float:
    """Largest |T_exact - T_approx| over matching (k, p) grids."""
    if isinstance(exact, RqgEstimate):
        exact = [exact]
    if isinstance(approx, RqgEstimate):
        approx = [approx]
    if len(exact) != len(approx):
        raise ValueError("surfaces have different k grids")
    worst = 0.0
    for a, b in zip(exact, approx):
        if a.k != b.k or a.p_grid.shape != b.p_grid.shape or np.any(a.p_grid != b.p_grid):
            raise ValueError("surfaces are sampled on different (k, p) grids")
        worst = max(worst, float(np.max(np.abs(a.values - b.values))) if len(a.values) else 0.0)
    return worst


def p_grid_for_step(p_step: float) -> np.ndarray:
    points = int(round(1.0 / p_step)) + 1
    return np.linspace(0.0, 1.0, points)


def argmax_over_p(host: OpenQuantumGraph, k: float, cap: int = DEFAULT_CAP,
                  seed: int = DEFAULT_SEED, p_step: float = 0.001) -> tuple[float, float]:
    """Randomization parameter maximizing the approximated transmission.

    Grid scan over [0, 1]; the first (smallest) p wins ties.
    """
    if not 0.0 < p_step <= 0.001:
        raise ValueError("p_step must lie in (0, 0.001]")
    est = approx_transmission(mc_profile(host, k, cap, seed), p_grid_for_step(p_step))
    j = int(np.argmax(est.values))
    return float(est.p_grid[j]), float(est.values[j])
