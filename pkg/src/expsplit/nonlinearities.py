"""Nonlinearities g(t, v), their sampled Lipschitz constants and the strip
bookkeeping around a reference trajectory.

The integrator only needs a Lipschitz estimate L for its contraction
certificate Omega(h)*C_ell*s*L < 1 and step-size guards, so L is taken
as a sampled maximum ratio inflated by a safety factor; an over-estimate
is harmless while the fixed-point solver independently verifies
contraction at runtime.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import StripViolationError, ValidationError

__all__ = ["Nonlinearity", "PowerNonlinearity", "AdvectionNonlinearity",
           "WaveCubic", "ZeroNonlinearity", "estimate_lipschitz",
           "sample_bound", "StripMonitor", "LIPSCHITZ_SAFETY"]

LIPSCHITZ_SAFETY = 1.5


class Nonlinearity:
    """g: [0,T] x V -> X, deterministic in both arguments."""

    def eval(self, t: float, v):
        raise NotImplementedError

    def __call__(self, t, v):
        return self.eval(t, v)

    def lipschitz_on_ball(self, problem, center, radius, t_range=(0.0, 1.0),
                          rng=None, n_samples=200):
        return estimate_lipschitz(self, problem, center, radius, t_range,
                                  n_samples=n_samples, rng=rng)

    def bound_on_ball(self, problem, center, radius, t_range=(0.0, 1.0),
                      rng=None, n_samples=200):
        return sample_bound(self, problem, center, radius, t_range,
                            n_samples=n_samples, rng=rng)


class ZeroNonlinearity(Nonlinearity):
    """g = 0: the purely linear problem."""

    def eval(self, t, v):
        return np.zeros_like(v)


class PowerNonlinearity(Nonlinearity):
    """Pointwise coeff * |v|^(alpha-1) * v, alpha > 1.

    Maps grid L^p into L^(p/alpha); 0 is mapped to 0 exactly.
    """

    def __init__(self, alpha: float, coeff: float = 1.0):
        if alpha <= 1.0:
            raise ValidationError("power exponent must exceed 1")
        self.alpha = float(alpha)
        self.coeff = float(coeff)

    def eval(self, t, v):
        v = np.asarray(v)
        a = np.abs(v)
        # 0^(alpha-1)*0 := 0, also for alpha < 2 where the power blows up
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.coeff * a ** (self.alpha - 1.0) * v
        if self.alpha < 2.0:
            out = np.where(a == 0.0, 0.0, out)
        return out

    def derivative_bound(self, radius: float) -> float:
        """max |F'| on |u| <= radius: alpha * radius^(alpha-1)."""
        return abs(self.coeff) * self.alpha * radius ** (self.alpha - 1.0)


class AdvectionNonlinearity(Nonlinearity):
    """1D analog of u . grad u on a periodic grid: v * (spectral d/dx v)."""

    def __init__(self, problem):
        if getattr(problem, "dim", None) != 1:
            raise ValidationError("advection nonlinearity needs a 1D periodic grid")
        self.problem = problem

    def eval(self, t, v):
        vh = np.fft.fft(v)
        dv = np.fft.ifft(1j * self.problem.kvec * vh).real
        return np.asarray(v) * dv


class WaveCubic(Nonlinearity):
    """(w, wdot) -> (0, -alpha_w * w^3) in the wave problem's modal coding."""

    def __init__(self, problem):
        self.problem = problem

    def eval(self, t, z):
        pr = self.problem
        w = pr._idst(np.real(z) / pr.omega)
        force = -pr.alpha_w * w ** 3
        return 1j * pr._dst(force)

    def eval_pair(self, t, pair):
        w, _ = pair
        return np.zeros_like(w), -self.problem.alpha_w * w ** 3


def estimate_lipschitz(g, problem, center, radius, t_range=(0.0, 1.0),
                       n_samples: int = 200, rng=None,
                       safety: float = LIPSCHITZ_SAFETY) -> float:
    """Sampled Lipschitz ratio max ||g(t,v)-g(t,w)||_X / ||v-w||_V on the
    V-ball of given radius around center, inflated by the safety factor."""
    if n_samples < 100:
        raise ValidationError("need at least 100 sample pairs")
    if rng is None:
        rng = np.random.default_rng(0)
    t0, t1 = t_range
    best = 0.0
    for _ in range(n_samples):
        t = rng.uniform(t0, t1)
        v = problem.sample_in_ball(center, radius, rng)
        if rng.uniform() < 0.5:
            w = problem.sample_in_ball(center, radius, rng)
        else:
            # nearby pair: probes the local derivative
            w = v + problem.sample_in_ball(problem.zeros(), 1e-4 * max(radius, 1.0), rng)
        dv = problem.v_norm(v - w)
        if dv == 0.0:
            continue
        dg = problem.x_norm(g.eval(t, v) - g.eval(t, w))
        best = max(best, dg / dv)
    return safety * best


def sample_bound(g, problem, center, radius, t_range=(0.0, 1.0),
                 n_samples: int = 200, rng=None,
                 safety: float = LIPSCHITZ_SAFETY) -> float:
    """Sampled sup of ||g(t,v)||_X over the strip ball, with safety factor."""
    if rng is None:
        rng = np.random.default_rng(0)
    t0, t1 = t_range
    best = problem.x_norm(g.eval(t0, np.asarray(center)))
    for _ in range(n_samples):
        t = rng.uniform(t0, t1)
        v = problem.sample_in_ball(center, radius, rng)
        best = max(best, problem.x_norm(g.eval(t, v)))
    return safety * best


@dataclass
class StripMonitor:
    """Checks that a trajectory stays in the V-tube of radius `radius`
    around a reference solution; a violation aborts the run."""

    radius: float
    times: np.ndarray
    states: list
    v_norm: object
    violations: list = field(default_factory=list)

    def reference_at(self, t: float):
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValidationError(f"no reference state stored at t={t}")
        return self.states[i]

    def check(self, t: float, state) -> float:
        dist = self.v_norm(state - self.reference_at(t))
        if dist > self.radius:
            self.violations.append((t, dist))
            raise StripViolationError(
                f"trajectory left the strip at t={t:.6g}: "
                f"distance {dist:.3e} > radius {self.radius:.3e}")
        return dist
