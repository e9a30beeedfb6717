import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import all_masks_with_count
from rqgraph import rqg, scattering
from rqgraph.families import open_kne
from rqgraph.graph import SubgraphMask, apply_mask
from rqgraph.rqg import (
    EXACT,
    MONTE_CARLO,
    EnumerationTooLarge,
    TooManySingular,
    approx_surface,
    approx_transmission,
    argmax_over_p,
    binomial_weights,
    ensemble_bits,
    exact_profile,
    exact_surface,
    exact_transmission,
    max_abs_error,
    mc_profile,
    p_grid_for_step,
    sample_ensemble,
    subgraph_weight,
)
from rqgraph.scattering import probability, transmission_amplitude

K4 = open_kne(4)


class TestWeights:
    @pytest.mark.parametrize("L,l,p,want", [
        (14, 7, 0.5, 6.103515625e-05),
        (5, 0, 0.0, 1.0),
        (5, 5, 1.0, 1.0),
        (5, 2, 0.0, 0.0),
        (3, 1, 0.25, 0.25 * 0.75**2),
    ])
    def test_examples(self, L, l, p, want):
        assert subgraph_weight(L, l, p) == want

    @pytest.mark.parametrize("args", [(5, 6, 0.5), (5, -1, 0.5), (5, 2, 1.5), (5, 2, -0.1)])
    def test_rejects(self, args):
        with pytest.raises(ValueError):
            subgraph_weight(*args)

    @settings(max_examples=50)
    @given(L=st.integers(0, 40), p=st.floats(0, 1))
    def test_binomial_rows_sum_to_one(self, L, p):
        assert math.fsum(binomial_weights(L, [p])[0]) == pytest.approx(1.0, abs=1e-12)

    def test_binomial_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            binomial_weights(3, [0.2, 1.2])


class TestEnsembles:
    def test_single_edges_are_all_taken(self):
        assert [m.bits for m in sample_ensemble(14, 1, 250, 0)] == [1 << j for j in range(14)]

    def test_small_population_enumerated(self):
        assert ensemble_bits(5, 3, 250, 1).tolist() == all_masks_with_count(5, 3)

    @pytest.mark.parametrize("l", [3, 7, 11])
    def test_capped_draw(self, l):
        a = ensemble_bits(14, l, 250, 42)
        assert len(a) == 250 == len(set(a.tolist()))
        assert np.all(np.diff(a.astype(np.int64)) > 0)
        assert all(int(b).bit_count() == l for b in a)
        np.testing.assert_array_equal(a, ensemble_bits(14, l, 250, 42))

    def test_dense_regime_draw(self):
        # C(10, 3) = 120 lies between cap and 4 cap: permutation prefix
        a = ensemble_bits(10, 3, 40, 5)
        assert len(set(a.tolist())) == 40
        assert all(int(b).bit_count() == 3 for b in a)

    def test_seeds_differ(self):
        assert not np.array_equal(ensemble_bits(14, 7, 250, 0), ensemble_bits(14, 7, 250, 1))

    def test_edge_counts_independent(self):
        # an ensemble does not depend on which other edge counts were drawn
        first = ensemble_bits(14, 6, 250, 3)
        for l in range(14):
            ensemble_bits(14, l, 250, 3)
        np.testing.assert_array_equal(first, ensemble_bits(14, 6, 250, 3))

    def test_large_host(self):
        a = ensemble_bits(63, 30, 10, 7)
        assert len(a) == 10 and all(int(b).bit_count() == 30 for b in a)

    def test_bad_cap(self):
        with pytest.raises(ValueError):
            ensemble_bits(5, 2, 0, 1)


def _brute_force_T(host, k, p):
    total = []
    for bits in range(1 << host.edge_count):
        m = SubgraphMask(bits, host.edge_count)
        sigma = transmission_amplitude(apply_mask(host, m), k, 0, host.vertex_count - 1)
        total.append(subgraph_weight(host.edge_count, m.edge_count, p) * abs(sigma) ** 2)
    return math.fsum(total)


class TestExact:
    @pytest.mark.parametrize("n", [4, 5])
    def test_against_per_mask_sum(self, n):
        host = open_kne(n)
        p = [0.1, 0.37, 0.8]
        est = exact_transmission(host, 1.234, p)
        for j, pj in enumerate(p):
            assert est.values[j] == pytest.approx(_brute_force_T(host, 1.234, pj), abs=1e-12)

    def test_profile_shape(self):
        pr = exact_profile(K4, 0.5)
        assert pr.mode == EXACT
        assert pr.sample_count.tolist() == [1, 5, 10, 10, 5, 1]
        assert pr.flagged_count.sum() == 0
        assert pr.mean_T[0] == 0 and pr.mean_T[1] == 0

    @pytest.mark.parametrize("k", [0.0, 0.4, math.pi / 8, math.pi, 5.0])
    def test_endpoints(self, k):
        host = open_kne(5)
        est = exact_transmission(host, k, [0.0, 1.0])
        assert est.values[0] == 0.0
        assert est.values[1] == exact_profile(host, k).mean_T[-1]
        assert est.values[1] == probability(transmission_amplitude(host, k, 0, 4))

    def test_enumeration_cap(self):
        with pytest.raises(EnumerationTooLarge):
            exact_profile(open_kne(8), 1.0)
        with pytest.raises(EnumerationTooLarge):
            exact_profile(K4, 1.0, enum_cap=4)

    def test_surface_threads_agree(self):
        ks = np.linspace(0, 2 * np.pi, 7)
        a = exact_surface(open_kne(5), ks, [0.2, 0.9], threads=1)
        b = exact_surface(open_kne(5), ks, [0.2, 0.9], threads=3)
        assert rqg.surface_values(a).tobytes() == rqg.surface_values(b).tobytes()


class TestMonteCarlo:
    @pytest.mark.parametrize("cap", [10, 11, 250])
    def test_saturated_equals_exact(self, cap):
        p = p_grid_for_step(0.01)
        for k in (0.3, math.pi / 8, 2.9):
            mc = approx_transmission(mc_profile(K4, k, cap, 7), p)
            ex = exact_transmission(K4, k, p)
            assert mc.values.tobytes() == ex.values.tobytes()

    def test_unsaturated_close(self):
        host = open_kne(6)
        p = p_grid_for_step(0.05)
        ex = exact_surface(host, [1.0, 2.0], p)
        mc = approx_surface(host, [1.0, 2.0], p, cap=250, seed=1)
        assert 0 < max_abs_error(ex, mc) < 0.05

    def test_profile_fields(self):
        pr = mc_profile(open_kne(6), 1.0, cap=100, seed=3)
        assert pr.mode == MONTE_CARLO
        assert pr.sample_count.tolist() == [min(100, math.comb(14, l)) for l in range(15)]
        assert pr.mean_T[0] == pr.mean_T[1] == 0

    def test_reproducible(self):
        a = mc_profile(open_kne(6), 2.0, 50, 11)
        b = mc_profile(open_kne(6), 2.0, 50, 11)
        assert a.mean_T.tobytes() == b.mean_T.tobytes()

    def test_periodic_in_k(self):
        ks = np.arange(0, 64) / 16.0
        a = approx_surface(open_kne(6), ks, [0.3, 0.7], cap=40, seed=2)
        b = approx_surface(open_kne(6), ks + 2 * np.pi, [0.3, 0.7], cap=40, seed=2)
        assert rqg.surface_values(a).tobytes() == rqg.surface_values(b).tobytes()


class TestArgmax:
    def test_constant_surface_picks_first(self, monkeypatch):
        flat = rqg.EdgeCountProfile(3, 1.0, EXACT, np.ones(4, int), np.zeros(4), np.zeros(4, int))
        monkeypatch.setattr(rqg, "mc_profile", lambda *a, **kw: flat)
        assert argmax_over_p(K4, 1.0) == (0.0, 0.0)

    def test_path_like_profile(self, monkeypatch):
        # only the full subgraph transmits: T = p^L, maximized at p = 1
        prof = rqg.EdgeCountProfile(3, 1.0, EXACT, np.ones(4, int), np.array([0, 0, 0, 1.0]),
                                    np.zeros(4, int))
        monkeypatch.setattr(rqg, "mc_profile", lambda *a, **kw: prof)
        assert argmax_over_p(K4, 1.0) == (1.0, 1.0)

    def test_step_limit(self):
        with pytest.raises(ValueError):
            argmax_over_p(K4, 1.0, p_step=0.01)

    def test_grid(self):
        g = p_grid_for_step(0.001)
        assert len(g) == 1001 and g[0] == 0.0 and g[-1] == 1.0


class TestErrors:
    def test_grid_mismatch(self):
        a = exact_transmission(K4, 1.0, [0.1, 0.2])
        with pytest.raises(ValueError):
            max_abs_error(a, exact_transmission(K4, 1.0, [0.1, 0.3]))
        with pytest.raises(ValueError):
            max_abs_error(a, exact_transmission(K4, 2.0, [0.1, 0.2]))
        with pytest.raises(ValueError):
            max_abs_error([a], [a, a])
        assert max_abs_error(a, a) == 0.0

    def test_too_many_singular(self, monkeypatch):
        real = scattering.mask_transmissions

        def flag_all(*args, **kwargs):
            T, status = real(*args, **kwargs)
            status[:] = scattering.SINGULAR
            return np.full_like(T, np.nan), status

        monkeypatch.setattr(rqg, "mask_transmissions", flag_all)
        with pytest.raises(TooManySingular):
            exact_profile(K4, 1.0)

    def test_few_singular_tolerated(self, monkeypatch):
        real = scattering.mask_transmissions

        def flag_one(*args, **kwargs):
            T, status = real(*args, **kwargs)
            status[:, 45] = scattering.SINGULAR  # first of the 200 two-edge masks
            T[:, 45] = np.nan
            return T, status

        monkeypatch.setattr(rqg, "mask_transmissions", flag_one)
        pr = mc_profile(open_kne(10), 1.0, cap=200, seed=0)
        assert pr.flagged_count.tolist() == [0, 0, 1] + [0] * 42
        assert pr.sample_count[2] == 199
        assert np.isfinite(pr.mean_T).all()
