"""Tests for linearization, quadratization and finite differences"""

import numpy as np
import pytest

from app.approx import finite_diff as fd
from app.approx.local_model import (
    build_local_model,
    ensure_finite,
    linearize_dynamics,
    map_knots,
    quadratize_cost,
)
from app.approx.trajectory import TimeVaryingLQ, Trajectory
from app.core.exceptions import NonFiniteError, ValidationError
from app.problem.base import ControlProblem
from app.problem.presets import make_cliff_world
from app.schemas.solver import SolverConfig

DOUBLE_INTEGRATOR = np.array(
    [[0.0, 0.0, 1.0, 0.0],
     [0.0, 0.0, 0.0, 1.0],
     [0.0, 0.0, 0.0, 0.0],
     [0.0, 0.0, 0.0, 0.0]]
)


def _one_dim_problem(drift, control_matrix, state_cost=lambda t, x: 0.0):
    return ControlProblem(
        state_dim=1,
        control_dim=1,
        noise_dim=1,
        drift=drift,
        control_matrix=control_matrix,
        noise_matrix=lambda t, x: np.array([[1.0]]),
        noise_covariance=[[1.0]],
        running_state_cost=state_cost,
        control_weight=lambda t, x: np.array([[1.0]]),
        control_linear=lambda t, x: np.zeros(1),
        terminal_cost=lambda x: 0.0,
        horizon=1.0,
        initial_state=[0.0],
    )


def _nominal(states, controls, horizon=1.0):
    states = np.asarray(states, dtype=float)
    times = np.linspace(0.0, horizon, states.shape[0])
    return Trajectory(times=times, states=states, controls=np.asarray(controls, dtype=float))


@pytest.fixture
def cfg():
    return SolverConfig(grid_steps=2, fd_step=1e-4)


class TestFiniteDifferences:
    """Central differences on scaled coordinates"""

    def test_steps_scale_with_magnitude(self):
        """h_i = fd_step * max(1, |x_i|)"""
        np.testing.assert_allclose(fd.coordinate_steps(np.array([0.1, -20.0]), 1e-4), [1e-4, 2e-3])

    def test_smooth_function_derivatives(self):
        """Gradient and Hessian of a smooth test function match the closed form"""

        def f(x):
            return np.exp(0.3 * x[0]) * np.sin(x[1]) + x[0] ** 2 * x[1]

        def grad(x):
            return np.array(
                [0.3 * np.exp(0.3 * x[0]) * np.sin(x[1]) + 2 * x[0] * x[1],
                 np.exp(0.3 * x[0]) * np.cos(x[1]) + x[0] ** 2]
            )

        def hess(x):
            e = np.exp(0.3 * x[0])
            return np.array(
                [[0.09 * e * np.sin(x[1]) + 2 * x[1], 0.3 * e * np.cos(x[1]) + 2 * x[0]],
                 [0.3 * e * np.cos(x[1]) + 2 * x[0], -e * np.sin(x[1])]]
            )

        rng = np.random.default_rng(11)
        for x in rng.uniform(-2.0, 2.0, size=(5, 2)):
            np.testing.assert_allclose(fd.gradient(f, x, 1e-4), grad(x), rtol=1e-5, atol=1e-7)
            np.testing.assert_allclose(fd.hessian(f, x, 1e-4), hess(x), rtol=1e-5, atol=1e-6)

    def test_hessian_is_symmetric(self):
        """Off-diagonal entries are mirrored exactly"""
        h = fd.hessian(lambda x: x[0] ** 3 * x[1] + x[1] ** 2 * x[2], np.array([0.3, -1.2, 2.0]), 1e-4)
        assert np.array_equal(h, h.T)

    def test_jacobian_columns(self):
        """Column j differentiates along x_j"""
        jac = fd.jacobian(lambda x: np.array([x[0] * x[1], x[1] ** 2]), np.array([2.0, 3.0]), 1e-4)
        np.testing.assert_allclose(jac, [[3.0, 2.0], [0.0, 6.0]], rtol=1e-8)


class TestLinearizeDynamics:
    """A, B, C along a nominal"""

    def test_linear_system_is_itself(self, cfg):
        """Cliff world linearizes to the double integrator at any nominal"""
        problem = make_cliff_world()
        nominal = _nominal(
            [[0.0, 0.0, 0.0, 0.0], [1.0, -2.0, 3.0, 0.5], [4.0, 1.0, -1.0, 2.0]],
            [[1.0, -1.0], [0.3, 2.0]],
        )
        A, B, C = linearize_dynamics(problem, nominal, cfg)
        for k in range(2):
            np.testing.assert_allclose(A[k], DOUBLE_INTEGRATOR, atol=1e-9)
            np.testing.assert_array_equal(B[k], [[0, 0], [0, 0], [1, 0], [0, 1]])
            np.testing.assert_array_equal(C[k], B[k])

    def test_sine_drift(self, cfg):
        """f(x) = sin(x) at x = 0 gives A = cos(0)"""
        problem = _one_dim_problem(lambda t, x: np.sin(x), lambda t, x: np.array([[1.0]]))
        A, _, _ = linearize_dynamics(problem, _nominal([[0.0], [0.0], [0.0]], [[0.0], [0.0]]), cfg)
        assert A[0, 0, 0] == pytest.approx(1.0, abs=10 * cfg.fd_step**2)

    def test_state_dependent_control_matrix(self, cfg):
        """G(x) = [x] at x = 2, u = 3 contributes dG/dx u = 3"""
        problem = _one_dim_problem(lambda t, x: 0.0 * x, lambda t, x: np.array([[x[0]]]))
        nominal = _nominal([[2.0], [2.0], [2.0]], [[3.0], [3.0]])
        A, B, _ = linearize_dynamics(problem, nominal, cfg)
        assert A[0, 0, 0] == pytest.approx(3.0, rel=1e-8)
        assert B[0, 0, 0] == 2.0

    def test_dimension_mismatch(self, cfg):
        """Nominal and problem dimensions must agree"""
        problem = make_cliff_world()
        with pytest.raises(ValidationError, match="nominal states"):
            linearize_dynamics(problem, _nominal([[0.0], [0.0], [0.0]], [[0.0], [0.0]]), cfg)


class TestQuadratizeCost:
    """Taylor coefficients of the running and terminal cost"""

    def test_cliff_at_origin(self, cfg):
        """q0 = 0.1, dL/dy = -0.1, d2L/dy2 = 0.11, R = diag(2, 0.02)"""
        nominal = _nominal(np.zeros((3, 4)), np.zeros((2, 2)))
        cost = quadratize_cost(make_cliff_world(), nominal, cfg)
        assert cost.q0[0] == pytest.approx(0.1)
        np.testing.assert_allclose(cost.qx[0], [0.0, -0.1, 0.0, 0.0], atol=1e-9)
        assert cost.Q[0, 1, 1] == pytest.approx(0.11, rel=1e-5)
        np.testing.assert_allclose(cost.R[0], np.diag([2.0, 0.02]))
        np.testing.assert_array_equal(cost.P[0], np.zeros((4, 2)))
        np.testing.assert_array_equal(cost.ru[0], np.zeros(2))

    def test_cliff_terminal_at_goal(self, cfg):
        """At rest on the goal: zero value and slope, Hessian diag(200, 200, 20, 20)"""
        states = np.zeros((3, 4))
        states[-1] = [10.0, 0.0, 0.0, 0.0]
        cost = quadratize_cost(make_cliff_world(), _nominal(states, np.zeros((2, 2))), cfg)
        assert cost.terminal_q0 == 0.0
        np.testing.assert_allclose(cost.terminal_qx, np.zeros(4), atol=1e-8)
        np.testing.assert_allclose(cost.terminal_Q, np.diag([200.0, 200.0, 20.0, 20.0]), rtol=1e-6, atol=1e-6)

    def test_scalar_lq_about_origin(self, scalar_problem, cfg):
        """A quadratic cost is its own expansion"""
        cost = quadratize_cost(scalar_problem, _nominal([[0.0], [0.0], [0.0]], [[0.0], [0.0]]), cfg)
        assert cost.q0[0] == 0.0
        assert cost.qx[0, 0] == pytest.approx(0.0, abs=1e-12)
        assert cost.Q[0, 0, 0] == pytest.approx(1.0, rel=1e-6)
        assert cost.R[0, 0, 0] == 1.0

    def test_control_terms(self, cliff_problem, cfg):
        """ru = R u along a nominal with nonzero controls"""
        nominal = _nominal(np.zeros((3, 4)), [[1.0, 2.0], [-1.0, 0.5]])
        cost = quadratize_cost(cliff_problem, nominal, cfg)
        np.testing.assert_allclose(cost.ru[0], [2.0, 0.04])
        np.testing.assert_allclose(cost.ru[1], [-2.0, 0.01])

    def test_matches_analytic_derivatives(self):
        """Finite differences agree with the closed-form cliff derivatives to 1e-5"""
        rng = np.random.default_rng(5)
        N = 6
        states = np.column_stack(
            [rng.uniform(-5, 15, N + 1), rng.uniform(-5, 5, N + 1), rng.normal(size=N + 1), rng.normal(size=N + 1)]
        )
        nominal = _nominal(states, rng.normal(size=(N, 2)), horizon=3.0)
        cfg = SolverConfig(grid_steps=N, fd_step=1e-4)
        numeric = quadratize_cost(make_cliff_world(), nominal, cfg)
        analytic = quadratize_cost(make_cliff_world(analytic_derivatives=True), nominal, cfg)
        np.testing.assert_allclose(numeric.qx, analytic.qx, rtol=1e-5, atol=1e-8)
        np.testing.assert_allclose(numeric.Q, analytic.Q, rtol=1e-5, atol=1e-6)
        np.testing.assert_allclose(numeric.terminal_qx, analytic.terminal_qx, rtol=1e-5, atol=1e-6)
        np.testing.assert_allclose(
            numeric.terminal_Q, analytic.terminal_Q, rtol=1e-5, atol=1e-5 * np.abs(analytic.terminal_Q).max()
        )

        A_numeric, _, _ = linearize_dynamics(make_cliff_world(), nominal, cfg)
        A_analytic, _, _ = linearize_dynamics(make_cliff_world(analytic_derivatives=True), nominal, cfg)
        np.testing.assert_allclose(A_numeric, A_analytic, atol=1e-8)


class TestLocalModel:
    """build_local_model and its containers"""

    def test_carries_drift_and_expansion_points(self, cliff_problem):
        """drift = f + G u at each knot, knot_states = nominal states"""
        cfg = SolverConfig(grid_steps=2)
        states = [[0.0, 0.0, 1.0, 0.0], [1.0, 0.0, 1.0, 0.0], [2.0, 0.0, 1.0, 0.0]]
        nominal = _nominal(states, [[0.5, 0.0], [0.0, -1.0]], horizon=3.0)
        lq = build_local_model(cliff_problem, nominal, cfg)
        np.testing.assert_allclose(lq.drift, [[1.0, 0.0, 0.5, 0.0], [1.0, 0.0, 0.0, -1.0]])
        np.testing.assert_array_equal(lq.knot_states, nominal.states)
        assert lq.dt == pytest.approx(1.5)
        assert lq.sigma == 0.0
        np.testing.assert_array_equal(lq.Sigma, cliff_problem.noise_covariance)

    def test_parallel_matches_sequential(self, cliff_problem):
        """Per-knot work is order-preserving under a thread pool"""
        rng = np.random.default_rng(2)
        nominal = _nominal(rng.normal(size=(11, 4)), rng.normal(size=(10, 2)), horizon=3.0)
        serial = build_local_model(cliff_problem, nominal, SolverConfig(grid_steps=10))
        threaded = build_local_model(cliff_problem, nominal, SolverConfig(grid_steps=10, max_workers=4))
        for name in ("A", "qx", "Q", "R", "ru", "q0"):
            assert np.array_equal(getattr(serial, name), getattr(threaded, name))

    def test_map_knots_order(self):
        """Results come back in knot order"""
        assert map_knots(lambda k: k * k, 6, max_workers=3) == [0, 1, 4, 9, 16, 25]

    def test_ensure_finite_names_location(self):
        """The first bad entry is reported by knot and coordinate"""
        with pytest.raises(NonFiniteError) as info:
            ensure_finite(np.array([1.0, np.nan, 2.0]), "quadratize_cost", 7)
        assert info.value.knot == 7
        assert info.value.details["coordinate"] == 1

    def test_non_finite_cost_raises(self, cfg):
        """A NaN in the running cost surfaces as NonFiniteError"""
        problem = _one_dim_problem(
            lambda t, x: 0.0 * x,
            lambda t, x: np.array([[1.0]]),
            state_cost=lambda t, x: float("nan") if x[0] > 0.5 else 0.0,
        )
        with pytest.raises(NonFiniteError, match="knot 1"):
            quadratize_cost(problem, _nominal([[0.0], [1.0], [1.0]], [[0.0], [0.0]]), cfg)


class TestContainers:
    """Trajectory and TimeVaryingLQ validation"""

    def test_non_uniform_times(self):
        """Knots must be evenly spaced"""
        with pytest.raises(ValidationError, match="uniformly"):
            Trajectory(times=[0.0, 1.0, 3.0], states=np.zeros((3, 1)), controls=np.zeros((2, 1)))

    def test_control_count(self):
        """N + 1 states need N controls"""
        with pytest.raises(ValidationError, match="controls"):
            Trajectory(times=[0.0, 1.0, 2.0], states=np.zeros((3, 1)), controls=np.zeros((3, 1)))

    def test_trajectory_properties(self):
        """dt, horizon, final_state"""
        traj = Trajectory.constant(np.linspace(0.0, 2.0, 5), np.array([1.0, 2.0]), control_dim=1)
        assert traj.grid_steps == 4
        assert traj.dt == 0.5
        assert traj.horizon == 2.0
        np.testing.assert_array_equal(traj.final_state, [1.0, 2.0])
        np.testing.assert_array_equal(traj.controls, np.zeros((4, 1)))

    def test_lq_shape_check(self, scalar_lq_model):
        """Coefficient arrays must agree on N, n, m, p"""
        lq = scalar_lq_model(grid_steps=4)
        with pytest.raises(ValidationError, match="Q has shape"):
            TimeVaryingLQ(
                A=lq.A, B=lq.B, C=lq.C, q0=lq.q0, qx=lq.qx, ru=lq.ru, Q=np.zeros((3, 1, 1)), P=lq.P,
                R=lq.R, terminal_q0=0.0, terminal_qx=lq.terminal_qx, terminal_Q=lq.terminal_Q,
                dt=lq.dt, sigma=0.0, Sigma=lq.Sigma,
            )

    def test_plain_lq_defaults(self, scalar_lq_model):
        """Without drift and expansion points the model sits at the origin"""
        lq = scalar_lq_model(grid_steps=4)
        np.testing.assert_array_equal(lq.drift, np.zeros((4, 1)))
        assert lq.knot_states is None
        assert lq.noise_intensity(0)[0, 0] == 1.0
