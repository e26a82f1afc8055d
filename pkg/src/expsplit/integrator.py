"""Exponential Runge-Kutta stepper with fixed-point internal stages.

One step computes the stage values U_i as the fixed point of
  Phi(x)_i = e^{c_i h A} u_n + int_0^{c_i h} e^{(c_i h - tau)A}
             sum_j ell_j(tau) g(t_n + c_j h, x_j) dtau
by plain iteration from x_i = e^{c_i h A} u_n, then advances
  u_{n+1} = e^{hA} u_n + int_0^h e^{(h-tau)A} sum_j ell_j(tau) g(., U_j) dtau.
A step is only attempted while the contraction certificate
kappa(h) = Omega(h) * C_ell * s * L is below one.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (ContractionError, FixedPointDivergenceError,
                     StripViolationError, ValidationError)
from .lagrange import LagrangeData, NodeSet, build_lagrange, default_nodes
from .propagators import Propagator, SmoothingProfile

__all__ = ["SchemeSpec", "StepGuards", "StageInfo", "TrajectoryRecord",
           "internal_stages", "step", "run"]


@dataclass(frozen=True)
class SchemeSpec:
    """Stage count, nodes and the derived Lagrange data."""

    lag: LagrangeData

    @property
    def s(self) -> int:
        return self.lag.s

    @property
    def nodes(self) -> NodeSet:
        return self.lag.node_set

    @classmethod
    def with_stages(cls, s: int) -> "SchemeSpec":
        return cls(lag=build_lagrange(default_nodes(s)))

    @classmethod
    def with_nodes(cls, nodes) -> "SchemeSpec":
        return cls(lag=build_lagrange(NodeSet(tuple(nodes))))


@dataclass
class StepGuards:
    """Runtime safeguards from the internal-stage solvability lemma."""

    lipschitz: float
    c_ell: float
    s: int
    omega: SmoothingProfile  # Omega for rho_X
    m_bound: float = 1.0
    fp_tol: float | None = None  # None: min(1e-12, h^(s+1))
    fp_max_iter: int = 60

    def kappa(self, h: float) -> float:
        """Contraction certificate Omega(h) * C_ell * s * L."""
        return self.omega.omega(h) * self.c_ell * self.s * self.lipschitz

    def tolerance(self, h: float) -> float:
        if self.fp_tol is not None:
            return self.fp_tol
        return min(1e-12, h ** (self.s + 1))


@dataclass
class StageInfo:
    """Diagnostics of one fixed-point solve."""

    iterations: int = 0
    increments: list = field(default_factory=list)
    contraction_ratios: list = field(default_factory=list)
    residual_bound: float = float("nan")


@dataclass
class TrajectoryRecord:
    """Stored trajectory plus per-step diagnostics.

    states/times hold every store_stride-th step (always including the
    initial and, on success, the final state).
    """

    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    stage_iterations: list = field(default_factory=list)
    contraction_ratios: list = field(default_factory=list)
    strip_distances: list = field(default_factory=list)
    kappa: float = float("nan")
    wall_per_step: float = float("nan")
    status: str = "ok"
    error: str = ""
    failure_step: int = -1

    def raise_if_failed(self):
        if self.status == "ok":
            return
        exc = {"contraction": ContractionError,
               "strip": StripViolationError,
               "divergence": FixedPointDivergenceError}.get(self.status, ValidationError)
        raise exc(self.error)

    def text_lines(self):
        """Line-oriented record: one line per stored step."""
        yield "# n t iterations"
        for i, t in enumerate(self.times):
            it = self.stage_iterations[i] if i < len(self.stage_iterations) else 0
            yield f"{i} {t:.12g} {it}"

    def summary(self) -> dict:
        return {
            "status": self.status,
            "error": self.error,
            "steps": max(len(self.stage_iterations), 0),
            "kappa": self.kappa,
            "max_stage_iterations": max(self.stage_iterations, default=0),
            "max_contraction_ratio": max(self.contraction_ratios, default=0.0),
            "wall_per_step": self.wall_per_step,
            "failure_step": self.failure_step,
        }


def _check_contraction(guards: StepGuards, h: float) -> float:
    kappa = guards.kappa(h)
    if kappa >= 1.0:
        raise ContractionError(
            f"contraction certificate kappa(h)={kappa:.3f} >= 1 for h={h:.3g} "
            f"(Omega(h)={guards.omega.omega(h):.3g}, C_ell={guards.c_ell:.3g}, "
            f"s={guards.s}, L={guards.lipschitz:.3g}); reduce h")
    return kappa


def internal_stages(u_n, t_n: float, h: float, scheme: SchemeSpec,
                    propagator: Propagator, g, guards: StepGuards):
    """Solve the stage equations; returns (stages, StageInfo)."""
    kappa = _check_contraction(guards, h)
    lag = scheme.lag
    s = scheme.s
    nodes = lag.node_set.nodes
    tol = guards.tolerance(h)
    # linear-flow anchor, the same start the contraction argument uses
    base = propagator.apply_nodes(h, nodes, u_n)
    stages = [b.copy() for b in base]
    info = StageInfo()
    # increments cannot drop below rounding in the stage scale; accept
    # machine-precision stagnation even when h^(s+1) asks for less
    scale = max(max(propagator.v_norm(b) for b in base), 1.0)
    tol = max(tol, 1e-14 * scale)
    # ratios measured below this floor are rounding noise, not contraction
    ratio_floor = max(1e3 * tol, 1e-11 * scale)
    prev_inc = None
    for it in range(1, guards.fp_max_iter + 1):
        g_vals = [g.eval(t_n + c * h, x) for c, x in zip(nodes, stages)]
        conv = propagator.stage_convolve_all(h, lag, g_vals)
        new_stages = [b + c for b, c in zip(base, conv)]
        inc = max(propagator.v_norm(ns - st) for ns, st in zip(new_stages, stages))
        stages = new_stages
        info.iterations = it
        info.increments.append(inc)
        if prev_inc is not None and prev_inc > ratio_floor:
            info.contraction_ratios.append(inc / prev_inc)
        prev_inc = inc
        if not np.isfinite(inc):
            raise FixedPointDivergenceError(
                f"stage iteration diverged at t={t_n:.6g} (non-finite increment)")
        # stop once the a-posteriori distance bound kappa/(1-kappa)*inc
        # is below the tolerance; plain inc <= tol covers kappa near 1
        if inc <= tol or inc * kappa <= tol * (1.0 - kappa):
            break
    else:
        raise FixedPointDivergenceError(
            f"stage iteration did not reach tol={tol:.1e} in "
            f"{guards.fp_max_iter} iterations at t={t_n:.6g} "
            f"(last increment {inc:.3e}, kappa={kappa:.3f})")
    info.residual_bound = inc * kappa / (1.0 - kappa)
    return stages, info


def step(u_n, t_n: float, h: float, scheme: SchemeSpec, propagator: Propagator,
         g, guards: StepGuards):
    """One full step; returns (u_next, StageInfo)."""
    stages, info = internal_stages(u_n, t_n, h, scheme, propagator, g, guards)
    nodes = scheme.nodes.nodes
    g_vals = [g.eval(t_n + c * h, x) for c, x in zip(nodes, stages)]
    u_next = propagator.apply(h, u_n) \
        + propagator.stage_convolve(h, scheme.lag, g_vals, "final")
    return u_next, info


def run(u_0, T: float, N: int, scheme: SchemeSpec, propagator: Propagator,
        g, guards: StepGuards, monitor=None, store_stride: int = 1) -> TrajectoryRecord:
    """N uniform steps of size h = T/N; returns the record even on abort."""
    if N < 0:
        raise ValidationError("step count must be >= 0")
    record = TrajectoryRecord()
    u = np.asarray(u_0).copy()
    record.times.append(0.0)
    record.states.append(u.copy())
    if N == 0:
        return record
    h = T / N
    try:
        record.kappa = _check_contraction(guards, h)
    except ContractionError as exc:
        record.status, record.error, record.failure_step = "contraction", str(exc), 0
        return record
    t_start = time.perf_counter()
    for n in range(N):
        t_n = n * h
        try:
            u, info = step(u, t_n, h, scheme, propagator, g, guards)
        except ContractionError as exc:
            record.status, record.error, record.failure_step = "contraction", str(exc), n
            break
        except FixedPointDivergenceError as exc:
            record.status, record.error, record.failure_step = "divergence", str(exc), n
            break
        record.stage_iterations.append(info.iterations)
        record.contraction_ratios.extend(info.contraction_ratios)
        t_next = (n + 1) * h
        if monitor is not None:
            try:
                record.strip_distances.append(monitor.check(t_next, u))
            except StripViolationError as exc:
                record.status, record.error, record.failure_step = "strip", str(exc), n
                break
        if (n + 1) % store_stride == 0 or n == N - 1:
            record.times.append(t_next)
            record.states.append(u.copy())
    record.wall_per_step = (time.perf_counter() - t_start) / max(len(record.stage_iterations), 1)
    return record
