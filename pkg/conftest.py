"""
Shared fixtures for the test suite
"""
import numpy as np
import pytest

from core.models import ChannelKind, JointDist, OptimizerOptions, ProbVector
from tools.channel import standard_channel
from tools.information import compose_joint


@pytest.fixture
def light_opts():
    """Smaller multistart for fast tests; seeds keep it deterministic"""
    return OptimizerOptions(restarts=8, tol=1e-9, max_iters=500, seed=0, grid_resolution=16)


@pytest.fixture
def independent_joint():
    return JointDist(matrix=np.full((2, 2), 0.25))


@pytest.fixture
def copy_joint():
    """U = V, a uniform bit"""
    return JointDist(matrix=[[0.5, 0.0], [0.0, 0.5]])


@pytest.fixture
def z_half_joint():
    """Uniform input through zchannel(0.5)"""
    return compose_joint(ProbVector.uniform(2), standard_channel(ChannelKind.ZCHANNEL, 0.5))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
