"""Convergence-bound oracle for the hierarchical averaging scheme."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class BoundInputs:
    lam: float                  # strong-convexity modulus
    mu: float                   # smoothness
    gamma_sq: np.ndarray        # per-UE variance bounds
    delta_sq: float             # stochastic-gradient norm bound
    eps: np.ndarray             # per-UE heterogeneity
    q0: float                   # E||w0 - w*||^2
    L: int
    J: int = field(default=0)

    def __post_init__(self):
        self.gamma_sq = np.atleast_1d(np.asarray(self.gamma_sq, dtype=float))
        self.eps = np.atleast_1d(np.asarray(self.eps, dtype=float))
        if self.J == 0:
            self.J = self.gamma_sq.size
        if self.lam <= 0:
            raise ValueError("strong-convexity modulus must be positive")
        if self.lam > self.mu:
            raise ValueError("strong convexity cannot exceed smoothness")
        if np.any(self.gamma_sq < 0) or np.any(self.eps < 0) or self.delta_sq < 0 or self.q0 < 0:
            raise ValueError("bound inputs must be non-negative")

    @property
    def psi(self) -> float:
        return max(64.0 * self.mu / self.lam, 4.0 * self.L)

    @property
    def theta(self) -> float:
        ds, L = self.delta_sq, self.L
        return (2.0 * L ** 2 * ds
                + (2.0 + self.lam / (4.0 * self.mu)) * (L - 1) * L * ds
                + L * float(np.sum(self.gamma_sq)) / self.J ** 2
                + 6.0 * self.mu * L * float(np.mean(self.eps)))


def theorem1_bound(inp: BoundInputs, G: int) -> float:
    """Distance-to-optimum bound after G rounds under the diminishing schedule."""
    psi = inp.psi
    num = max(psi ** 2 * inp.q0, (16.0 ** 2 / inp.lam ** 2) * G * inp.theta)
    return num / (G + psi) ** 2


def lemma2_divergence_bound(L: int, eta_g: float, delta_sq: float) -> float:
    """Bound on the mean squared divergence of local iterates: (L-1)*L*eta^2*delta^2."""
    if L < 1 or eta_g <= 0 or delta_sq < 0:
        raise ValueError("invalid divergence-bound inputs")
    return (L - 1) * L * eta_g ** 2 * delta_sq
