"""Vector-form ADMM: sub-operation examples, stationarity, descent."""

import numpy as np
import pytest

from factorsdp import (
    Binary,
    Nonnegative,
    SolverConfig,
    cut_value,
    descent_check,
    sign_round,
)
from factorsdp import admm_vector as av
from factorsdp.admm_vector import LinearForm, QuadraticForm, VectorAdmmState
from factorsdp.problems import build_maxcut, random_graph

from conftest import exhaustive_max_cut, random_pattern, random_symsparse


def dense_xstep_oracle(C_dense, rho, y, u):
    """Solve the x stationarity system with a dense factorization."""
    n = y.size
    return np.linalg.solve(2.0 * C_dense + rho * np.eye(n), rho * y - u)


def auglag_oracle(C_dense, x, y, u, rho):
    gap = x - y
    return float(x @ C_dense @ x + u @ gap + 0.5 * rho * gap @ gap)


def make_state(x, y, u, rho):
    return VectorAdmmState(np.asarray(x, dtype=float),
                           np.asarray(y, dtype=float),
                           np.asarray(u, dtype=float), rho)


class TestUpdateY:
    def test_binary_pull(self):
        state = make_state([0.2], [1.0], [-1.0], 2.0)
        av.update_y(state, Binary())
        np.testing.assert_array_equal(state.y, [-1.0])

    def test_fixed_point_when_feasible(self):
        state = make_state([1.0, -1.0], [0.0, 0.0], [0.0, 0.0], 3.0)
        av.update_y(state, Binary())
        np.testing.assert_array_equal(state.y, state.x)

    def test_nonnegative_clip(self):
        state = make_state([-1.0, 2.0], [0.0, 0.0], [0.0, 0.0], 1.0)
        av.update_y(state, Nonnegative())
        np.testing.assert_array_equal(state.y, [0.0, 2.0])


class TestUpdateX:
    def test_zero_cost_reduces_to_target(self):
        state = make_state([0.0], [1.0], [0.0], 2.0)
        av.update_x(state, QuadraticForm(np.zeros((1, 1))), SolverConfig())
        np.testing.assert_allclose(state.x, [1.0], atol=1e-12)

    def test_identity_cost_diagonal_solve(self):
        state = make_state([0.0], [1.0], [0.0], 2.0)
        av.update_x(state, QuadraticForm(np.eye(1)), SolverConfig())
        np.testing.assert_allclose(state.x, [0.5], atol=1e-12)

    def test_linear_cost_closed_form(self, rng):
        c = rng.standard_normal(6)
        y = rng.standard_normal(6)
        u = rng.standard_normal(6)
        state = make_state(np.zeros(6), y, u, 1.7)
        iters, resid, ok = av.update_x(state, LinearForm(c), SolverConfig())
        assert (iters, resid, ok) == (0, 0.0, True)
        np.testing.assert_allclose(state.x, y - (c + u) / 1.7, atol=1e-14)

    def test_cg_residual_sparse_system(self, rng):
        pattern = random_pattern(50, 0.2, rng)
        C = random_symsparse(pattern, rng)
        objective = QuadraticForm(C)
        rho = 2.5 * objective.lipschitz()
        y = rng.standard_normal(50)
        u = rng.standard_normal(50)
        state = make_state(np.zeros(50), y, u, rho)
        config = SolverConfig()
        _, _, ok = av.update_x(state, objective, config)
        assert ok
        rhs = rho * y - u
        resid = 2.0 * C.matmat(state.x) + rho * state.x - rhs
        assert np.linalg.norm(resid) <= config.cg_tol * np.linalg.norm(rhs)

    def test_matches_dense_solve(self, rng):
        pattern = random_pattern(12, 0.4, rng)
        C = random_symsparse(pattern, rng)
        objective = QuadraticForm(C)
        rho = 3.0 * objective.lipschitz()
        y = rng.standard_normal(12)
        u = rng.standard_normal(12)
        state = make_state(rng.standard_normal(12), y, u, rho)
        av.update_x(state, objective, SolverConfig())
        expect = dense_xstep_oracle(C.to_dense(), rho, y, u)
        np.testing.assert_allclose(state.x, expect, atol=1e-8)

    def test_indefinite_phase_still_solved(self, rng):
        # rho far below the Lipschitz constant makes 2C + rho I indefinite;
        # the MINRES fallback must still meet the tolerance
        pattern = random_pattern(30, 0.3, rng)
        C = random_symsparse(pattern, rng)
        objective = QuadraticForm(C)
        rho = 0.1 * objective.lipschitz()
        y = rng.standard_normal(30)
        u = rng.standard_normal(30)
        state = make_state(rng.standard_normal(30), y, u, rho)
        config = SolverConfig(cg_tol=1e-8, cg_max_iter=500)
        _, _, ok = av.update_x(state, objective, config)
        assert ok
        expect = dense_xstep_oracle(C.to_dense(), rho, y, u)
        np.testing.assert_allclose(state.x, expect, atol=1e-6)


class TestDualUpdate:
    def test_feasible_leaves_u(self):
        state = make_state([0.5, -0.5], [0.5, -0.5], [1.0, 2.0], 2.0)
        av.dual_update(state, SolverConfig(rho0=2.0, gamma=1.05))
        np.testing.assert_array_equal(state.u, [1.0, 2.0])
        assert state.rho == pytest.approx(2.1)

    def test_ascent_step(self):
        state = make_state([0.5], [1.0], [0.0], 2.0)
        av.dual_update(state, SolverConfig(rho0=2.0, gamma=1.0))
        np.testing.assert_allclose(state.u, [-1.0])

    def test_stationary_point_preserved(self, rng):
        pattern = random_pattern(8, 0.5, rng)
        C = random_symsparse(pattern, rng)
        x = Binary().project(rng.standard_normal(8))
        u = -2.0 * C.matmat(x)
        state = make_state(x, x.copy(), u, 5.0)
        av.dual_update(state, SolverConfig(rho0=5.0, gamma=1.2))
        np.testing.assert_allclose(2.0 * C.matmat(state.x) + state.u,
                                   np.zeros(8), atol=1e-14)


class TestInitState:
    def test_projection_and_zero_dual(self):
        config = SolverConfig(seed=11)
        C = np.eye(4)
        state = av.init_state(QuadraticForm(C), Binary(), 4, config)
        assert np.all(np.abs(state.x) <= 1.0)
        np.testing.assert_array_equal(state.y, np.sign(state.x))
        np.testing.assert_array_equal(state.u, np.zeros(4))
        again = av.init_state(QuadraticForm(C), Binary(), 4, config)
        np.testing.assert_array_equal(state.x, again.x)

    def test_auto_rho0_tracks_lipschitz(self):
        objective = QuadraticForm(3.0 * np.eye(5))
        state = av.init_state(objective, Binary(), 5, SolverConfig())
        assert state.rho == pytest.approx(0.25 * objective.lipschitz(),
                                          rel=1e-5)
        pinned = av.init_state(objective, Binary(), 5, SolverConfig(rho0=7.0))
        assert pinned.rho == 7.0


class TestIterationInvariants:
    def test_stationarity_after_each_iteration(self, rng):
        pattern = random_pattern(30, 0.25, rng)
        C = random_symsparse(pattern, rng)
        objective = QuadraticForm(C)
        rho = 3.0 * objective.lipschitz()
        config = SolverConfig(rho0=rho, gamma=1.0, rho_max=rho)
        state = av.init_state(objective, Binary(), 30, config)
        for _ in range(25):
            av.update_y(state, Binary())
            rhs_norm = np.linalg.norm(state.rho * state.y - state.u)
            av.update_x(state, objective, config)
            av.dual_update(state, config)
            grad_plus_u = 2.0 * C.matmat(state.x) + state.u
            assert np.linalg.norm(grad_plus_u) <= (config.cg_tol * rhs_norm
                                                   + 1e-8)

    def test_dual_step_bounded_by_primal_step(self, rng):
        pattern = random_pattern(20, 0.3, rng)
        C = random_symsparse(pattern, rng)
        objective = QuadraticForm(C)
        # the exact constant: the cached estimate can sit a couple percent
        # low on clustered spectra, which is fine for diagnostics but not
        # for asserting a sharp inequality
        L = 2.0 * float(np.max(np.abs(np.linalg.eigvalsh(C.to_dense()))))
        config = SolverConfig(rho0=2.2 * L, gamma=1.0, rho_max=2.2 * L)
        state = av.init_state(objective, Binary(), 20, config)
        resid_prev = 0.0
        # the bound relates consecutive x-step outputs, so the first
        # iteration (against the arbitrary initial dual) is exempt
        for it in range(20):
            x_prev, u_prev = state.x, state.u
            av.update_y(state, Binary())
            _, resid, _ = av.update_x(state, objective, config)
            av.dual_update(state, config)
            du = np.linalg.norm(state.u - u_prev)
            dx = np.linalg.norm(state.x - x_prev)
            if it > 0:
                assert du <= L * dx + resid + resid_prev + 1e-10
            resid_prev = resid

    def test_lagrangian_descent_at_theory_penalty(self, rng):
        for trial in range(3):
            pattern = random_pattern(15, 0.35, rng)
            C = random_symsparse(pattern, rng)
            objective = QuadraticForm(C)
            rho = 1.1 * 0.5 * (3.0 + np.sqrt(17.0)) * objective.lipschitz()
            config = SolverConfig(rho0=rho, gamma=1.0, rho_max=rho,
                                  eps=1e-9, max_iter=120, seed=trial)
            result = av.solve(objective, Binary(), 15, config)
            values = [row[5] for row in result.trace.rows()]
            report = descent_check(values, slack=1e-9 + config.cg_tol)
            assert report.ok, report

    def test_lagrangian_matches_dense_oracle(self, rng):
        pattern = random_pattern(9, 0.4, rng)
        C = random_symsparse(pattern, rng)
        x = rng.standard_normal(9)
        y = rng.standard_normal(9)
        u = rng.standard_normal(9)
        state = make_state(x, y, u, 1.3)
        got = av.augmented_lagrangian(state, QuadraticForm(C))
        expect = auglag_oracle(C.to_dense(), x, y, u, 1.3)
        assert got == pytest.approx(expect, rel=1e-12)

    def test_infeasible_y_is_plus_inf(self):
        state = make_state([1.0], [0.5], [0.0], 1.0)
        val = av.augmented_lagrangian(state, QuadraticForm(np.eye(1)),
                                      set_=Binary())
        assert val == float("inf")


class TestSolve:
    def test_single_edge_partition(self):
        instance = build_maxcut(random_graph(2, 1.0, seed=0))
        result = av.solve(QuadraticForm(instance.objective.C), Binary(), 2,
                          SolverConfig(seed=0))
        assert result.converged
        x = sign_round(result.x)
        assert x[0] * x[1] == -1.0
        assert cut_value(instance.adjacency, x) == pytest.approx(1.0)

    def test_triangle_cut(self):
        instance = build_maxcut(random_graph(3, 1.0, seed=0))
        result = av.solve(QuadraticForm(instance.objective.C), Binary(), 3,
                          SolverConfig(seed=0))
        x = sign_round(result.x)
        assert cut_value(instance.adjacency, x) == pytest.approx(2.0)

    def test_feasibility_at_convergence(self, rng):
        A = random_graph(16, 0.4, seed=5)
        instance = build_maxcut(A)
        config = SolverConfig(seed=3)
        result = av.solve(QuadraticForm(instance.objective.C), Binary(), 16,
                          config)
        assert result.converged
        assert result.D <= config.eps
        gap = np.linalg.norm(result.x - result.y)
        assert gap / np.linalg.norm(result.x) <= config.eps

    def test_rounded_cut_beats_half(self, rng):
        # any sign vector cuts at least half the edges in expectation;
        # the solver should never land below the trivial guarantee on
        # these small graphs
        for seed in range(4):
            A = random_graph(10, 0.5, seed=seed)
            instance = build_maxcut(A)
            result = av.solve(QuadraticForm(instance.objective.C), Binary(),
                              10, SolverConfig(seed=seed))
            best = exhaustive_max_cut(instance.adjacency)
            got = cut_value(instance.adjacency, sign_round(result.x))
            assert got >= 0.5 * best

    def test_deterministic_trace(self):
        instance = build_maxcut(random_graph(8, 0.5, seed=2))
        objective = QuadraticForm(instance.objective.C)
        first = av.solve(objective, Binary(), 8, SolverConfig(seed=4))
        second = av.solve(objective, Binary(), 8, SolverConfig(seed=4))
        assert first.trace.to_csv() == second.trace.to_csv()

    def test_linear_objective_one_dim(self):
        result = av.solve(LinearForm(np.array([2.0])), Binary(), 1,
                          SolverConfig(seed=0))
        np.testing.assert_array_equal(sign_round(result.x), [-1.0])
