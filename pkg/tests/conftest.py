import numpy as np
import pytest

from expsplit.propagators import DiagonalPropagator, SmoothingProfile


class ScalarProblem(DiagonalPropagator):
    """u' = lam*u + g(u) as a one-point grid problem, for oracle tests."""

    def __init__(self, lam=-1.0, t_max=10.0):
        super().__init__()
        self.lam = lam
        self.eigenvalues = np.array([lam], dtype=complex)
        self.profile_x = SmoothingProfile(c=1.0, alpha=0.0, t_max=t_max)
        self.profile_w = self.profile_x

    bound_m = 1.0

    def to_modes(self, v):
        return np.asarray(v, dtype=complex)

    def from_modes(self, vh):
        return np.asarray(vh).real

    def zeros(self):
        return np.zeros(1)

    def x_norm(self, v):
        return float(np.max(np.abs(v)))

    v_norm = x_norm
    w_norm = x_norm

    def lp(self, v, p):
        return float(np.max(np.abs(v)))

    def sample_in_ball(self, center, radius, rng):
        return np.asarray(center) + radius * rng.uniform(-1.0, 1.0, size=1)


@pytest.fixture
def scalar_problem():
    return ScalarProblem()


@pytest.fixture
def make_scalar():
    return ScalarProblem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
