"""Test configuration"""

import json

import numpy as np
import pytest

from app.approx.trajectory import TimeVaryingLQ
from app.problem.presets import make_cliff_world, make_scalar_lq
from app.schemas.solver import SolverConfig


@pytest.fixture
def scalar_lq_model():
    """Factory for a constant-coefficient scalar LQ model about the origin"""

    def build(
        sigma=0.0,
        horizon=1.0,
        grid_steps=100,
        a=0.0,
        b=1.0,
        c=1.0,
        q=1.0,
        r=1.0,
        noise=1.0,
        terminal=0.0,
        q0=0.0,
    ):
        N = grid_steps

        def full(value):
            return np.full((N, 1, 1), float(value))

        return TimeVaryingLQ(
            A=full(a),
            B=full(b),
            C=full(c),
            q0=np.full(N, float(q0)),
            qx=np.zeros((N, 1)),
            ru=np.zeros((N, 1)),
            Q=full(q),
            P=np.zeros((N, 1, 1)),
            R=full(r),
            terminal_q0=0.0,
            terminal_qx=np.zeros(1),
            terminal_Q=np.array([[terminal]]),
            dt=horizon / N,
            sigma=sigma,
            Sigma=np.array([[noise]]),
        )

    return build


@pytest.fixture
def scalar_problem():
    """dx = u dt + dw, cost 1/2 x^2 + 1/2 u^2 over one second from x = 1"""
    return make_scalar_lq(a=0.0, b=1.0, c=1.0, q=1.0, r_w=1.0, sigma=0.0, tf=1.0)


@pytest.fixture
def cliff_problem():
    """Cliff world with default noise and horizon"""
    return make_cliff_world()


@pytest.fixture
def lq_config():
    """Coarse grid for scalar problems"""
    return SolverConfig(grid_steps=100)


@pytest.fixture
def write_config(tmp_path):
    """Write a problem-config dict to a JSON file and return its path"""

    def write(data, name="problem.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path

    return write
