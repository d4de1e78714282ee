"""Tests for the three-block splitting baseline."""

import numpy as np
import pytest

from factorsdp import sdr
from factorsdp.fileio import parse_graph
from factorsdp.linmaps import diag_map, none_map, trace_map
from factorsdp.problems import build_maxcut
from factorsdp.rounding import cut_value, factor_from_eig, hyperplane_round

from conftest import exhaustive_max_cut

K3_TEXT = "3 3\n1 2 1\n1 3 1\n2 3 1\n"


def random_sym(n, rng):
    G = rng.normal(size=(n, n))
    return (G + G.T) / 2


class TestProxLinear:
    def test_identity_cost_half_step(self):
        out = sdr.prox_linear(np.eye(3), np.eye(3), 0.5)
        np.testing.assert_allclose(out, 0.5 * np.eye(3))

    def test_zero_cost_is_identity_map(self, rng):
        Z = random_sym(4, rng)
        np.testing.assert_array_equal(sdr.prox_linear(Z, np.zeros((4, 4)), 1.7), Z)

    def test_prox_optimality_gradient(self, rng):
        # stationarity of the prox objective: C + (out - Z) / t = 0
        for _ in range(5):
            Z = random_sym(6, rng)
            C = random_sym(6, rng)
            t = float(rng.uniform(0.1, 3.0))
            out = sdr.prox_linear(Z, C, t)
            np.testing.assert_allclose(C + (out - Z) / t, np.zeros((6, 6)),
                                       atol=1e-12)


class TestProxAffine:
    def test_diag_overwrites_diagonal(self):
        Z = np.array([[5.0, 2.0], [2.0, 7.0]])
        out = sdr.prox_affine(Z, diag_map(np.ones(2)))
        np.testing.assert_array_equal(out, np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_trace_shifts_diagonal(self):
        out = sdr.prox_affine(np.diag([3.0, 1.0]), trace_map(1.0))
        np.testing.assert_allclose(out, np.diag([1.5, -0.5]))

    def test_idempotent_on_feasible(self, rng):
        Z = random_sym(5, rng)
        np.fill_diagonal(Z, 2.0)
        lmap = diag_map(np.full(5, 2.0))
        np.testing.assert_array_equal(sdr.prox_affine(Z, lmap), Z)

    def test_trace_output_feasible_and_parallel_shift(self, rng):
        # Euclidean projection onto {tr = b}: correction is a multiple of I
        Z = random_sym(7, rng)
        out = sdr.prox_affine(Z, trace_map(3.0))
        assert abs(np.trace(out) - 3.0) <= 1e-12
        shift = out - Z
        np.testing.assert_allclose(shift, shift[0, 0] * np.eye(7), atol=1e-14)

    def test_none_map_rejected(self):
        with pytest.raises(ValueError):
            sdr.prox_affine(np.eye(2), none_map())


class TestProxPsd:
    def test_clamps_negative_eigenvalue(self):
        np.testing.assert_allclose(sdr.prox_psd(np.diag([1.0, -1.0])),
                                   np.diag([1.0, 0.0]), atol=1e-14)
        np.testing.assert_allclose(sdr.prox_psd(np.diag([2.0, -3.0])),
                                   np.diag([2.0, 0.0]), atol=1e-14)

    def test_analytic_rank_one_projection(self):
        Z = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(sdr.prox_psd(Z), np.full((2, 2), 0.5),
                                   atol=1e-14)

    def test_psd_input_unchanged(self, rng):
        G = rng.normal(size=(6, 4))
        Z = G @ G.T
        np.testing.assert_allclose(sdr.prox_psd(Z), Z, atol=1e-12)

    def test_output_psd_and_idempotent(self, rng):
        for _ in range(5):
            Z = random_sym(8, rng)
            out = sdr.prox_psd(Z)
            assert np.linalg.eigvalsh(out).min() >= -1e-10
            np.testing.assert_allclose(sdr.prox_psd(out), out, atol=1e-10)


class TestDrsStep:
    def test_fixed_point_unchanged(self):
        # C = 0 with Z_i = I is feasible, PSD, and cost-stationary
        lmap = diag_map(np.ones(3))
        for variant in ("literal", "reflected"):
            state = sdr.DrsState([np.eye(3) for _ in range(3)])
            Y, _ = sdr.drs_step(state, np.zeros((3, 3)), lmap, variant=variant)
            np.testing.assert_allclose(Y, np.eye(3), atol=1e-14)
            for Zi in state.Z:
                np.testing.assert_allclose(Zi, np.eye(3), atol=1e-14)
            assert state.k == 1

    def test_one_sweep_from_zero(self):
        state = sdr.DrsState([np.zeros((2, 2)) for _ in range(3)])
        Y, X = sdr.drs_step(state, np.zeros((2, 2)), diag_map(np.ones(2)))
        np.testing.assert_array_equal(X[0], np.zeros((2, 2)))
        np.testing.assert_array_equal(X[1], np.eye(2))
        np.testing.assert_array_equal(X[2], np.zeros((2, 2)))
        np.testing.assert_allclose(Y, np.eye(2) / 3.0)
        np.testing.assert_allclose(state.Z[0], np.eye(2) / 3.0)
        np.testing.assert_allclose(state.Z[1], -2.0 * np.eye(2) / 3.0)
        np.testing.assert_allclose(state.Z[2], np.eye(2) / 3.0)

    def test_reflected_averages_reflections(self, rng):
        Z = [random_sym(4, rng) for _ in range(3)]
        C = random_sym(4, rng)
        lmap = trace_map(1.0)
        state = sdr.DrsState([Zi.copy() for Zi in Z])
        Y, X = sdr.drs_step(state, C, lmap, variant="reflected")
        expected = sum(2.0 * Xi - Zi for Xi, Zi in zip(X, Z)) / 3.0
        np.testing.assert_allclose(Y, expected, atol=1e-14)


class TestSolve:
    def test_spectrahedron_picks_min_eigenvalue(self):
        res = sdr.solve(np.diag([2.0, 5.0]), trace_map(1.0))
        assert res.converged
        assert abs(res.objective - 2.0) <= 1e-3
        Zopt = np.zeros((2, 2))
        Zopt[0, 0] = 1.0
        np.testing.assert_allclose(res.Z, Zopt, atol=1e-3)

    def test_random_spectrahedron_matches_eigsolver(self):
        for seed, n in [(0, 8), (1, 20)]:
            rng = np.random.default_rng(300 + seed)
            C = random_sym(n, rng)
            res = sdr.solve(C, trace_map(1.0), sdr.DrsConfig(eps=1e-4))
            assert res.converged
            assert abs(res.objective - np.linalg.eigvalsh(C).min()) <= 1e-3

    def test_zero_cost_returns_feasible_point(self):
        res = sdr.solve(np.zeros((3, 3)), diag_map(np.ones(3)))
        assert res.converged
        assert res.objective == 0.0
        np.testing.assert_allclose(np.diag(res.Z), np.ones(3), atol=1e-4)

    def test_k3_rounded_cut_is_optimal(self):
        inst = build_maxcut(parse_graph(K3_TEXT))
        res = sdr.solve(inst.objective.C.to_dense(), inst.lmap)
        assert res.converged
        F = factor_from_eig(res.Z)
        best = hyperplane_round(F, inst.objective.C, trials=10, seed=0)
        cut = cut_value(inst.adjacency, best.x)
        assert cut == exhaustive_max_cut(inst.adjacency) == 2.0

    def test_literal_sweep_settles_off_optimum(self):
        # the literal average is proximally damped: on the K3 relaxation it
        # stops around -1.62 where the true optimum is -2.25
        inst = build_maxcut(parse_graph(K3_TEXT))
        C = inst.objective.C.to_dense()
        refl = sdr.solve(C, inst.lmap)
        lit = sdr.solve(C, inst.lmap, sdr.DrsConfig(variant="literal"))
        assert refl.converged and lit.converged
        assert abs(refl.objective - (-2.25)) <= 1e-3
        assert lit.objective - refl.objective > 0.5
        assert inst.lmap.violation(lit.Z) <= 1e-4

    def test_reported_solutions_meet_feasibility_bounds(self):
        # module contract: both violation measures at most 1e-4 at default eps
        for seed, n, lmap in [(0, 8, trace_map(1.0)), (1, 30, trace_map(1.0)),
                              (2, 12, diag_map(np.ones(12))),
                              (3, 40, diag_map(np.ones(40)))]:
            rng = np.random.default_rng(400 + seed)
            res = sdr.solve(random_sym(n, rng), lmap)
            assert res.converged
            assert lmap.violation(res.Z) <= 1e-4
            assert np.linalg.eigvalsh(res.Z).min() >= -1e-4

    def test_symmetric_output_and_trace_schema(self):
        res = sdr.solve(np.diag([2.0, 5.0]), trace_map(1.0))
        np.testing.assert_allclose(res.Z, res.Z.T, atol=1e-12)
        ks = [row[0] for row in res.trace.rows()]
        assert ks == list(range(1, res.iterations + 1))
        last = list(res.trace.rows())[-1]
        assert last[3] == 1.0
        assert last[4] == last[5] == res.objective

    def test_non_convergence_flagged(self):
        res = sdr.solve(np.diag([2.0, 5.0]), trace_map(1.0),
                        sdr.DrsConfig(max_iter=3))
        assert not res.converged
        assert res.iterations == 3

    def test_input_validation(self):
        with pytest.raises(ValueError):
            sdr.solve(np.eye(2), none_map())
        with pytest.raises(ValueError):
            sdr.solve(np.ones((2, 3)), trace_map(1.0))
        asym = np.array([[0.0, 1.0], [0.0, 0.0]])
        with pytest.raises(ValueError):
            sdr.solve(asym, trace_map(1.0))
        with pytest.raises(ValueError):
            sdr.solve(np.eye(4), trace_map(1.0), sdr.DrsConfig(n_cap=3))

    def test_config_validation(self):
        for bad in (sdr.DrsConfig(t=0.0), sdr.DrsConfig(relax=-1.0),
                    sdr.DrsConfig(eps=0.0), sdr.DrsConfig(variant="midpoint")):
            with pytest.raises(ValueError):
                bad.validate()

    def test_sparse_cost_accepted(self):
        inst = build_maxcut(parse_graph(K3_TEXT))
        dense = sdr.solve(inst.objective.C.to_dense(), inst.lmap)
        sparse = sdr.solve(inst.objective.C, inst.lmap)
        np.testing.assert_array_equal(sparse.Z, dense.Z)
