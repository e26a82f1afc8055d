"""Lagrange basis polynomials on scaled nodes c_i*h.

The basis is represented by monomial coefficients in the scaled variable
sigma = tau/h, so every quantity derived from it (moment identities, the
uniform bound c_ell) is independent of the step size h.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["NodeSet", "LagrangeData", "build_lagrange", "eval_basis",
           "moment_residual", "default_nodes"]


@dataclass(frozen=True)
class NodeSet:
    """Strictly increasing collocation nodes c_1 < ... < c_s in [0, 1]."""

    nodes: tuple[float, ...]

    def __post_init__(self):
        nodes = tuple(float(c) for c in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) < 1:
            raise ValidationError("need at least one node")
        if any(c < 0.0 or c > 1.0 for c in nodes):
            raise ValidationError(f"nodes must lie in [0, 1], got {nodes}")
        if any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise ValidationError(f"nodes must be strictly increasing, got {nodes}")

    @property
    def s(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class LagrangeData:
    """Monomial representation of the Lagrange basis for a node set.

    monomial_coeffs[j, k] is the coefficient of sigma^k in ell_j(sigma),
    sigma = tau/h.  c_ell bounds |ell_j| uniformly on [0, 1] (hence on
    [0, h] for every h).
    """

    node_set: NodeSet
    monomial_coeffs: np.ndarray
    c_ell: float
    _hash_token: int = field(default=0, repr=False)

    @property
    def s(self) -> int:
        return self.node_set.s

    def __hash__(self):  # usable as a cache key
        return hash((self.node_set.nodes, self._hash_token))

    def __eq__(self, other):
        return isinstance(other, LagrangeData) and self.node_set.nodes == other.node_set.nodes


def default_nodes(s: int) -> NodeSet:
    """Shipped node sets: left endpoint for s=1 (the exponential Euler
    scheme), equispaced including 0 and 1 otherwise."""
    if s < 1:
        raise ValidationError("stage count must be >= 1")
    if s == 1:
        return NodeSet((0.0,))
    return NodeSet(tuple(i / (s - 1) for i in range(s)))


def _basis_coeffs(nodes: np.ndarray) -> np.ndarray:
    """Monomial coefficients of the cardinal basis at the reference nodes."""
    s = len(nodes)
    if s == 1:
        return np.array([[1.0]])
    # Vandermonde solve; condition is mild for s <= 8.
    V = np.vander(nodes, s, increasing=True)
    return np.linalg.solve(V, np.eye(s)).T


def _refine_max(coeffs: np.ndarray) -> float:
    """Max of |p| over [0, 1] for p given by monomial coefficients.

    Dense sampling at 4096 points plus Newton refinement of the interior
    critical points of p.
    """
    p = np.polynomial.Polynomial(coeffs)
    dp = p.deriv()
    ddp = dp.deriv()
    sigma = np.linspace(0.0, 1.0, 4096)
    vals = np.abs(p(sigma))
    best = float(vals.max())
    # Newton on p' from the sampled argmax neighbourhood and all local maxima
    cand = set(np.flatnonzero((vals[1:-1] >= vals[:-2]) & (vals[1:-1] >= vals[2:])) + 1)
    cand.add(int(vals.argmax()))
    for idx in cand:
        x = sigma[idx]
        for _ in range(50):
            d = dp(x)
            dd = ddp(x)
            if dd == 0.0:
                break
            step = d / dd
            x -= step
            if not (0.0 <= x <= 1.0):
                break
            if abs(step) < 1e-15:
                break
        if 0.0 <= x <= 1.0:
            best = max(best, float(abs(p(x))))
    return best


def build_lagrange(node_set: NodeSet) -> LagrangeData:
    """Build the scaled Lagrange basis and its h-independent bound c_ell."""
    nodes = np.asarray(node_set.nodes)
    coeffs = _basis_coeffs(nodes)
    c_ell = max(_refine_max(coeffs[j]) for j in range(node_set.s))
    return LagrangeData(node_set=node_set, monomial_coeffs=coeffs, c_ell=c_ell)


def eval_basis(data: LagrangeData, j: int, tau: float, h: float) -> float:
    """Evaluate ell_j(tau) for nodes c_i*h via Horner in sigma = tau/h."""
    if not 1 <= j <= data.s:
        raise ValidationError(f"stage index {j} out of range 1..{data.s}")
    if h <= 0.0:
        raise ValidationError("h must be positive")
    sigma = tau / h
    acc = 0.0
    for a in data.monomial_coeffs[j - 1][::-1]:
        acc = acc * sigma + a
    return acc


def moment_residual(data: LagrangeData, tau: float, h: float, k: int) -> float:
    """Residual of sum_j ell_j(tau) (c_j*h - tau)^k against its exact value.

    The identity target is 1 for k = 0 (partition of unity) and 0 for
    1 <= k <= s-1 (vanishing moments); both hold for all tau.
    """
    if k < 0 or k >= data.s:
        raise ValidationError(f"moment order {k} not guaranteed for s={data.s}")
    total = 0.0
    for j in range(1, data.s + 1):
        cj = data.node_set.nodes[j - 1]
        total += eval_basis(data, j, tau, h) * (cj * h - tau) ** k
    target = 1.0 if k == 0 else 0.0
    return total - target
