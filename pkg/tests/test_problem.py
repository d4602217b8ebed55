"""Tests for problem definitions, presets and config loading"""

import numpy as np
import pytest

from app.core.config import Settings
from app.core.exceptions import ControlWeightError, NotFoundError, ValidationError
from app.problem.base import ControlProblem
from app.problem.loader import (
    build_problem,
    load_problem,
    load_problem_config,
    parse_problem_config,
    serialize_problem_config,
)
from app.problem.presets import CLIFF_COST_CAP, cliff_penalty, make_cliff_world, make_scalar_lq
from app.schemas.problem import ProblemConfig
from app.schemas.solver import SolverConfig


def _scalar_problem(**overrides):
    fields = dict(
        state_dim=1,
        control_dim=1,
        noise_dim=1,
        drift=lambda t, x: 0.0 * x,
        control_matrix=lambda t, x: np.array([[1.0]]),
        noise_matrix=lambda t, x: np.array([[1.0]]),
        noise_covariance=[[1.0]],
        running_state_cost=lambda t, x: 0.0,
        control_weight=lambda t, x: np.array([[1.0]]),
        control_linear=lambda t, x: np.zeros(1),
        terminal_cost=lambda x: 0.0,
        horizon=1.0,
        initial_state=[0.0],
    )
    fields.update(overrides)
    return ControlProblem(**fields)


class TestCliffWorld:
    """Point-mass benchmark"""

    def test_dimensions_and_weights(self, cliff_problem):
        """4 states, 2 force channels, R = diag(2, 0.02)"""
        assert (cliff_problem.state_dim, cliff_problem.control_dim, cliff_problem.noise_dim) == (4, 2, 2)
        x0 = cliff_problem.initial_state
        np.testing.assert_array_equal(cliff_problem.control_weight(0.0, x0), np.diag([2.0, 0.02]))
        assert cliff_problem.horizon == 3.0
        assert cliff_problem.state_labels == ("x", "y", "vx", "vy")

    def test_noise_ratio(self, cliff_problem):
        """Y force noise SD is ten times the X SD"""
        sd = np.sqrt(np.diag(cliff_problem.noise_covariance))
        assert sd[1] == pytest.approx(10.0 * sd[0])
        np.testing.assert_allclose(cliff_problem.noise_covariance, np.diag([0.01, 1.0]))

    def test_double_integrator(self, cliff_problem):
        """Velocities integrate positions, forces integrate velocities"""
        x = np.array([1.0, 2.0, 3.0, 4.0])
        u = np.array([0.5, -0.5])
        np.testing.assert_allclose(cliff_problem.dynamics(0.0, x, u), [3.0, 4.0, 0.5, -0.5])

    def test_running_cost_depends_only_on_y(self, cliff_problem):
        """At u = 0 the running cost ignores x and the velocities"""
        zero = np.zeros(2)
        a = cliff_problem.running_cost(0.0, np.array([0.0, 1.0, 0.0, 0.0]), zero)
        b = cliff_problem.running_cost(2.0, np.array([7.0, 1.0, -3.0, 5.0]), zero)
        assert a == b

    def test_running_cost_decreasing_in_y(self, cliff_problem):
        """The cliff penalty falls off monotonically away from the cliff"""
        ys = np.linspace(-9.0, 20.0, 200)
        costs = [cliff_problem.running_cost(0.0, np.array([0.0, y, 0.0, 0.0]), np.zeros(2)) for y in ys]
        assert np.all(np.diff(costs) < 0)

    def test_control_cost(self, cliff_problem):
        """ux^2 + 0.01 uy^2 on top of the penalty"""
        x = np.zeros(4)
        cost = cliff_problem.running_cost(0.0, x, np.array([1.0, 10.0]))
        assert cost == pytest.approx(0.1 + 1.0 + 1.0)

    def test_terminal_cost(self, cliff_problem):
        """Zero at rest on the goal, quadratic elsewhere"""
        assert cliff_problem.terminal_cost(np.array([10.0, 0.0, 0.0, 0.0])) == 0.0
        assert cliff_problem.terminal_cost(np.zeros(4)) == pytest.approx(10000.0)
        assert cliff_problem.terminal_cost(np.array([10.0, 0.0, 1.0, 1.0])) == pytest.approx(20.0)

    def test_penalty_cap_at_pole(self):
        """At and beyond y = -10 the penalty returns the finite cap"""
        assert cliff_penalty(-10.0) == CLIFF_COST_CAP
        assert cliff_penalty(-25.0) == CLIFF_COST_CAP
        assert cliff_penalty(0.0) == pytest.approx(0.1)

    def test_overrides(self):
        """sigma, horizon, noise and goal are configurable"""
        problem = make_cliff_world(sigma=45.0, horizon=2.0, noise_sd=(0.2, 2.0), goal_state=(5.0, 1.0))
        assert problem.risk_param == 45.0
        assert problem.horizon == 2.0
        np.testing.assert_allclose(problem.noise_covariance, np.diag([0.04, 4.0]))
        assert problem.terminal_cost(np.array([5.0, 1.0, 0.0, 0.0])) == 0.0

    def test_rejects_bad_noise_length(self):
        """Two noise channels, two SDs"""
        with pytest.raises(ValidationError, match="2 noise SDs"):
            make_cliff_world(noise_sd=(0.1,))


class TestScalarLQ:
    """Analytic validation problem"""

    def test_cost_and_dynamics(self):
        """1/2 q (x - g)^2 + 1/2 r u^2 with dx = a x + b u"""
        problem = make_scalar_lq(a=-1.0, b=2.0, c=1.0, q=4.0, r_w=3.0, sigma=0.5, tf=2.0, goal_state=1.0)
        x, u = np.array([3.0]), np.array([2.0])
        assert problem.running_cost(0.0, x, u) == pytest.approx(0.5 * 4.0 * 4.0 + 0.5 * 3.0 * 4.0)
        np.testing.assert_allclose(problem.dynamics(0.0, x, u), [-3.0 + 4.0])
        assert problem.risk_param == 0.5

    def test_rejects_non_positive_control_weight(self):
        """r_w must be positive"""
        with pytest.raises(ValidationError, match="r_w"):
            make_scalar_lq(a=0.0, b=1.0, c=1.0, q=1.0, r_w=0.0, sigma=0.0, tf=1.0)

    def test_rejects_non_positive_horizon(self):
        """tf must be positive"""
        with pytest.raises(ValidationError, match="tf"):
            make_scalar_lq(a=0.0, b=1.0, c=1.0, q=1.0, r_w=1.0, sigma=0.0, tf=0.0)


class TestControlProblem:
    """Construction-time validation and copies"""

    def test_indefinite_control_weight(self):
        """A control weight that fails Cholesky is rejected"""
        with pytest.raises(ControlWeightError):
            _scalar_problem(control_weight=lambda t, x: np.array([[-1.0]]))

    def test_wrong_initial_state_length(self):
        """initial_state must match state_dim"""
        with pytest.raises(ValidationError, match="initial_state"):
            _scalar_problem(initial_state=[0.0, 1.0])

    def test_wrong_function_shape(self):
        """Member functions are checked against the declared dimensions"""
        with pytest.raises(ValidationError, match="control_matrix"):
            _scalar_problem(control_matrix=lambda t, x: np.ones((1, 2)))

    def test_non_symmetric_covariance(self):
        """Sigma must be symmetric"""
        with pytest.raises(ValidationError, match="symmetric"):
            _scalar_problem(
                noise_dim=2,
                noise_matrix=lambda t, x: np.ones((1, 2)),
                noise_covariance=[[1.0, 0.5], [0.0, 1.0]],
            )

    def test_non_positive_horizon(self):
        """horizon > 0"""
        with pytest.raises(ValidationError, match="horizon"):
            _scalar_problem(horizon=0.0)

    def test_arrays_are_frozen(self, cliff_problem):
        """Stored arrays cannot be mutated in place"""
        with pytest.raises(ValueError):
            cliff_problem.initial_state[0] = 1.0

    def test_with_risk_param(self, cliff_problem):
        """Copy with a different sigma, original untouched"""
        other = cliff_problem.with_risk_param(-45.0)
        assert other.risk_param == -45.0
        assert cliff_problem.risk_param == 0.0

    def test_with_noise_scale(self, cliff_problem):
        """Scaling the SDs scales the covariance quadratically"""
        scaled = cliff_problem.with_noise_scale(2.0)
        np.testing.assert_allclose(scaled.noise_covariance, 4.0 * cliff_problem.noise_covariance)
        assert np.all(cliff_problem.with_noise_scale(0.0).noise_covariance == 0.0)
        with pytest.raises(ValidationError):
            cliff_problem.with_noise_scale(-1.0)

    def test_time_grid(self, cliff_problem):
        """N + 1 uniform knots spanning the horizon"""
        grid = cliff_problem.time_grid(300)
        assert grid.shape == (301,)
        assert grid[-1] == 3.0
        assert grid[1] == pytest.approx(0.01)


class TestProblemConfig:
    """Problem-config parsing and loading"""

    def test_sigma_from_config(self):
        """sigma is carried into the built problem"""
        config = parse_problem_config('{"preset": "cliff_world", "sigma": 45}')
        assert build_problem(config).risk_param == 45.0

    def test_sigma_defaults_to_zero(self):
        """Missing sigma is risk-neutral"""
        config = parse_problem_config('{"preset": "cliff_world"}')
        assert config.sigma == 0.0
        assert build_problem(config).risk_param == 0.0

    def test_unknown_key(self):
        """Unknown keys are rejected with their line"""
        text = '{\n  "preset": "cliff_world",\n  "sigmaa": 1\n}'
        with pytest.raises(ValidationError, match=r"unknown key 'sigmaa' \(line 3\)"):
            parse_problem_config(text)

    def test_unknown_preset(self):
        """Preset names are checked"""
        with pytest.raises(ValidationError, match="unknown preset"):
            parse_problem_config('{"preset": "moon_lander"}')

    def test_invalid_json(self):
        """Syntax errors cite line and column"""
        with pytest.raises(ValidationError, match="line 3 column 1"):
            parse_problem_config('{\n  "preset":\n}')

    def test_not_an_object(self):
        """The document must be a JSON object"""
        with pytest.raises(ValidationError, match="JSON object"):
            parse_problem_config("[1, 2]")

    def test_negative_noise_sd(self):
        """Noise SDs must be non-negative"""
        with pytest.raises(ValidationError, match="noise_sd"):
            parse_problem_config('{"preset": "cliff_world", "noise_sd": [0.1, -1.0]}')

    def test_scalar_lq_vector_length(self):
        """scalar_lq overrides hold one entry"""
        config = parse_problem_config('{"preset": "scalar_lq", "initial_state": [1.0, 2.0]}')
        with pytest.raises(ValidationError, match="initial_state"):
            build_problem(config)

    def test_round_trip(self):
        """serialize then parse reproduces the config and the problem bit for bit"""
        config = ProblemConfig(
            preset="cliff_world",
            sigma=-45.0,
            horizon=3.0,
            noise_sd=[0.1, 1.0],
            initial_state=[0.0, 0.5, 0.0, 0.0],
        )
        again = parse_problem_config(serialize_problem_config(config))
        assert again == config
        a, b = build_problem(config), build_problem(again)
        assert a.risk_param == b.risk_param
        assert a.horizon == b.horizon
        assert np.array_equal(a.noise_covariance, b.noise_covariance)
        assert np.array_equal(a.initial_state, b.initial_state)

    def test_load_from_file(self, write_config):
        """load_problem reads and builds in one step"""
        path = write_config({"preset": "scalar_lq", "sigma": 0.5, "horizon": 2.0})
        problem = load_problem(path)
        assert problem.name == "scalar_lq"
        assert problem.risk_param == 0.5
        assert problem.horizon == 2.0

    def test_missing_file(self, tmp_path):
        """A missing config is NotFoundError"""
        with pytest.raises(NotFoundError):
            load_problem_config(tmp_path / "absent.json")


class TestSettings:
    """Environment-driven defaults"""

    def test_env_prefix(self, monkeypatch):
        """ILEG_* variables override defaults"""
        monkeypatch.setenv("ILEG_GRID_STEPS", "50")
        monkeypatch.setenv("ILEG_COST_TOLERANCE", "1e-8")
        source = Settings()
        assert source.grid_steps == 50
        cfg = SolverConfig.from_settings(source)
        assert cfg.grid_steps == 50
        assert cfg.cost_tolerance == 1e-8

    def test_explicit_overrides_win(self):
        """Non-None overrides replace settings, None keeps them"""
        cfg = SolverConfig.from_settings(Settings(), grid_steps=80, max_iterations=None)
        assert cfg.grid_steps == 80
        assert cfg.max_iterations == Settings().max_iterations

    def test_solver_config_is_strict(self):
        """Unknown fields and out-of-range values are rejected"""
        from pydantic import ValidationError as PydanticValidationError

        with pytest.raises(PydanticValidationError):
            SolverConfig(grid_steps=1)
        with pytest.raises(PydanticValidationError):
            SolverConfig(step_count=10)
