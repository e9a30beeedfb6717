import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import CLOSED_FORMS, vertex_matching_smatrix
from rqgraph import scattering
from rqgraph.families import open_kne
from rqgraph.graph import GraphError, MetricGraph, OpenQuantumGraph, SubgraphMask, apply_mask
from rqgraph.scattering import (
    PathFamilySystem,
    SingularAtK,
    assemble,
    reflection_amplitude,
    scatter,
    scatter_curve,
    solve_masks,
    solve_path_families,
    transmission_amplitude,
    transmission_curve,
)

K4 = open_kne(4)  # edges: 0:{0,1} 1:{0,2} 2:{1,2} 3:{1,3} 4:{2,3}


def sub(host, edges):
    return apply_mask(host, SubgraphMask.from_edges(edges, host.edge_count))


PATH2 = sub(K4, [0, 3])            # i - 1 - f
TRIANGLE3 = sub(K4, [0, 2, 3])     # i - 1 - f plus edge {1, 2}
PATH3 = sub(K4, [1, 2, 3])         # i - 2 - 1 - f
L4_NIS1 = sub(K4, [0, 1, 3, 4])    # the 4-cycle through i and f
L4_NIS4 = sub(K4, [0, 1, 2, 3])


class TestAssemble:
    def test_path_unknowns(self):
        s = assemble(PATH2, 0.3, 3)
        assert s.unknowns == ((0, 1), (1, 0), (1, 3), (3, 1))
        assert s.matrix.shape == (4, 4)

    def test_k6e_size(self):
        assert assemble(open_kne(6), 1.0, 5).matrix.shape == (28, 28)

    def test_empty(self):
        g = OpenQuantumGraph(MetricGraph(4, ()), (0, 3))
        s = assemble(g, 1.0, 3)
        assert s.matrix.shape == (0, 0)
        assert solve_path_families(s).shape == (0,)

    def test_exit_needs_lead(self):
        with pytest.raises(GraphError):
            assemble(K4, 1.0, 1)

    def test_row_structure(self):
        k = 0.9
        s = assemble(K4, k, 3)
        z = np.exp(1j * k)
        r, t = 2 / 3 - 1, 2 / 3
        # unknown 6 is 1 -> 3 whose head is the exit vertex 3
        row = s.matrix[6]
        assert row[6] == 1
        assert row[7] == pytest.approx(-z * r)       # reflection back 3 -> 1
        assert row[9] == pytest.approx(-z * t)       # onward 3 -> 2
        assert s.rhs[6] == pytest.approx(z * t)
        # unknown 7 is 3 -> 1; vertex 1 has degree 3 and no lead
        assert s.matrix[7, 6] == pytest.approx(-z * (2 / 3 - 1))
        assert s.rhs[7] == 0
        assert s.rhs[0] == 0


class TestSolve:
    @pytest.mark.parametrize("kl", [0.1, 1.0, 2.5, 5.9])
    def test_hand_solution_of_path(self, kl):
        x = solve_path_families(assemble(PATH2, kl, 3))
        z = np.exp(1j * kl)
        # p_{1f} = z t_f with t_f = 1, p_{i1} = z t_1 p_{1f}
        assert x[2] == pytest.approx(z, abs=1e-14)
        assert x[0] == pytest.approx(z**2, abs=1e-14)

    def test_residual_k6e(self):
        s = assemble(open_kne(6), 1.3, 5)
        x = solve_path_families(s)
        assert np.linalg.norm(s.matrix @ x - s.rhs) <= 1e-10 * (1 + np.linalg.norm(s.rhs))

    def test_singular_consistent_system_solved(self):
        s = assemble(open_kne(6), math.pi, 5)
        x = solve_path_families(s)
        assert np.linalg.norm(s.matrix @ x - s.rhs) <= 1e-10 * (1 + np.linalg.norm(s.rhs))

    def test_inconsistent_singular_system_raises(self):
        s = PathFamilySystem(((0, 1), (1, 0)), np.array([[1, 1], [1, 1]], complex),
                             np.array([1, 0], complex), 1.0, 1)
        with pytest.raises(SingularAtK):
            solve_path_families(s)


class TestClosedForms:
    @pytest.mark.parametrize("graph,key", [
        (K4, "full"), (L4_NIS4, "l4_nis4"), (L4_NIS1, "l4_nis1"), (PATH3, "path3"),
        (TRIANGLE3, "triangle"), (PATH2, "path2"),
    ])
    def test_closed_forms(self, graph, key):
        rng = np.random.default_rng(hash(key) % 2**32)
        for kl in rng.uniform(0, 2 * np.pi, 16):
            z = np.exp(1j * kl)
            assert abs(transmission_amplitude(graph, kl, 0, 3) - CLOSED_FORMS[key](z)) <= 1e-10

    def test_triangle_zero_at_quarter_wave(self):
        assert abs(transmission_amplitude(TRIANGLE3, math.pi / 2, 0, 3)) <= 1e-12

    def test_no_path_gives_zero(self):
        assert transmission_amplitude(sub(K4, [2]), 1.1, 0, 3) == 0
        assert transmission_amplitude(sub(K4, [0, 1]), 1.1, 0, 3) == 0


class TestReflection:
    def test_isolated_entrance(self):
        g = sub(K4, [2, 4])
        assert reflection_amplitude(g, 0.8, 0) == 1

    @pytest.mark.parametrize("kl", [0.2, 1.7, 4.0])
    def test_transparent_path(self, kl):
        assert abs(reflection_amplitude(PATH2, kl, 0)) <= 1e-14

    def test_flux_k6e(self):
        g = open_kne(6)
        rho = reflection_amplitude(g, 1.0, 0)
        sigma = transmission_amplitude(g, 1.0, 0, 5)
        assert abs(abs(rho) ** 2 - (1 - abs(sigma) ** 2)) <= 1e-8


class TestScatter:
    def test_path_transmits_fully(self):
        r = scatter(PATH2, 2.2)
        assert r.T == pytest.approx(1, abs=1e-14)
        assert r.R == pytest.approx(0, abs=1e-14)

    def test_empty_reflects(self):
        r = scatter(OpenQuantumGraph(MetricGraph(4, ()), (0, 3)), 2.2)
        assert (r.T, r.R) == (0.0, 1.0)

    def test_k4e_blocked_at_pi(self):
        r = scatter(K4, math.pi)
        assert not r.flagged
        assert r.T <= 1e-20
        assert r.bound_state

    def test_same_channel_rejected(self):
        with pytest.raises(GraphError):
            scatter(K4, 1.0, 0, 0)


class TestVertexMatchingOracle:
    @pytest.mark.parametrize("n", [4, 5, 6, 7, 8])
    def test_random_subgraphs(self, n):
        host = open_kne(n)
        rng = np.random.default_rng(100 + n)
        for _ in range(12):
            m = SubgraphMask(int(rng.integers(0, 2**host.edge_count)), host.edge_count)
            g = apply_mask(host, m)
            kl = rng.uniform(0.05, 2 * np.pi - 0.05)
            S = vertex_matching_smatrix(n, list(g.edges), list(g.leads), kl)
            r = scatter(g, kl)
            assert abs(r.sigma - S[1, 0]) <= 1e-10
            assert abs(r.rho - S[0, 0]) <= 1e-10

    def test_heterogeneous_lengths(self):
        rng = np.random.default_rng(5)
        edges = tuple((u, v, float(rng.uniform(0.3, 2.0))) for u, v, _ in open_kne(5).edges)
        g = OpenQuantumGraph(MetricGraph(5, edges), (0, 4))
        for k in (0.4, 1.9, 3.3):
            S = vertex_matching_smatrix(5, list(edges), [0, 4], k)
            assert abs(transmission_amplitude(g, k, 0, 4) - S[1, 0]) <= 1e-10

    def test_three_leads(self):
        g = OpenQuantumGraph(open_kne(5).base, (0, 2, 4))
        S = vertex_matching_smatrix(5, list(g.edges), [0, 2, 4], 1.234)
        assert abs(transmission_amplitude(g, 1.234, 0, 2) - S[1, 0]) <= 1e-10
        assert abs(transmission_amplitude(g, 1.234, 4, 0) - S[0, 2]) <= 1e-10


@settings(max_examples=40, deadline=None)
@given(n=st.integers(4, 8), bits=st.integers(0, 2**27 - 1), kl=st.floats(0.01, 2 * math.pi - 0.01))
def test_flux_and_reciprocity(n, bits, kl):
    host = open_kne(n)
    g = apply_mask(host, SubgraphMask(bits % (1 << host.edge_count), host.edge_count))
    r = scatter(g, kl)
    if r.flagged:
        return
    assert r.flux_defect <= 1e-8
    back = transmission_amplitude(g, kl, n - 1, 0)
    assert abs(back - r.sigma) <= 1e-10


class TestCurves:
    def test_path_curve(self):
        pts = transmission_curve(PATH2, [math.pi / 8, math.pi])
        assert [p[0] for p in pts] == [math.pi / 8, math.pi]
        assert all(abs(T - 1) <= 1e-14 for _, T in pts)

    def test_empty_curve(self):
        g = OpenQuantumGraph(MetricGraph(4, ()), (0, 3))
        assert all(T == 0 for _, T in transmission_curve(g, np.linspace(0, 2 * np.pi, 201)))

    def test_grid_checks(self):
        with pytest.raises(ValueError):
            transmission_curve(K4, [])
        with pytest.raises(ValueError):
            transmission_curve(K4, [1.0, 0.5])

    def test_periodicity_bitwise(self):
        base = np.arange(0, 256) / 64.0
        shifted = base + scattering.TWO_PI
        assert np.all(shifted - scattering.TWO_PI == base)  # shift is exact on this grid
        g = open_kne(6)
        a = transmission_curve(g, base)
        b = transmission_curve(g, shifted)
        assert [t for _, t in a] == [t for _, t in b]

    def test_periodicity_general_grid(self):
        base = np.linspace(0.05, 6.2, 37)
        a = transmission_curve(K4, base)
        b = transmission_curve(K4, base + 2 * np.pi)
        assert max(abs(x[1] - y[1]) for x, y in zip(a, b)) <= 1e-12

    def test_masked_curve(self):
        res = scatter_curve(K4, [0.5, 1.5], mask=SubgraphMask.from_edges([0, 3], 5))
        assert all(abs(r.T - 1) < 1e-14 for r in res)
        with pytest.raises(GraphError):
            scatter_curve(K4, [0.5], mask=SubgraphMask(1, 4))


def test_pi_dichotomy_k5e():
    host = open_kne(5)
    sigma, _, status = solve_masks(host, np.arange(2**host.edge_count, dtype=np.uint64), math.pi)
    T = np.abs(sigma) ** 2
    assert not np.any(status == scattering.SINGULAR)
    assert np.all(np.minimum(np.abs(T), np.abs(T - 1)) <= 1e-8)


def test_rejected_resolution_is_flagged(monkeypatch):
    monkeypatch.setattr(scattering, "_min_norm", lambda A, b, c: (np.zeros((A.shape[1], b.shape[1])), False))
    r = scatter(K4, math.pi)
    assert r.flagged
    assert math.isnan(r.T) and math.isnan(r.R)
    with pytest.raises(SingularAtK):
        transmission_amplitude(K4, math.pi, 0, 3)
    assert math.isnan(transmission_curve(K4, [math.pi])[0][1])
    ok = scatter(K4, 1.0)
    assert not ok.flagged
