"""Closed-form Hessian of the one-parent, M-children latency envelope."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class HessianDomainError(ValueError):
    """A child carries no uplink load, where the Hessian is undefined."""


@dataclass(frozen=True)
class StarSubproblem:
    """One parent with ``M`` children: rates, splits, and the parent's link budget."""

    rates: tuple[float, ...]
    splits: tuple[float, ...]
    phi: float
    rho: float
    child_caps: tuple[float, ...] | None = None
    parent_cap: float = 1.0

    @property
    def Z(self) -> float:
        return (1.0 - self.rho) ** 2 / (2.0 * self.phi)

    @property
    def A(self) -> np.ndarray:
        lam = np.asarray(self.rates, dtype=float)
        s = np.asarray(self.splits, dtype=float)
        return np.sqrt((1.0 - s) * lam + self.rho * s * lam)

    def latency(self, splits=None) -> float:
        """Star L_min: child compute + parent compute + Cauchy transmission term."""
        lam = np.asarray(self.rates, dtype=float)
        s = np.asarray(self.splits if splits is None else splits, dtype=float)
        caps = np.ones_like(lam) if self.child_caps is None else np.asarray(self.child_caps)
        load = (1.0 - s) * lam + self.rho * s * lam
        return float(
            np.sum(s * lam / caps)
            + np.sum((1.0 - s) * lam) / self.parent_cap
            + np.sum(np.sqrt(load)) ** 2 / self.phi
        )


def analytic_hessian(sub: StarSubproblem) -> np.ndarray:
    A = sub.A
    if np.any(A <= 0.0):
        raise HessianDomainError("Hessian undefined where a child has zero uplink load (A_i = 0)")
    lam = np.asarray(sub.rates, dtype=float)
    Z = sub.Z
    H = Z * np.outer(lam, lam) / np.outer(A, A)
    np.fill_diagonal(H, -Z * lam**2 * (A.sum() - A) / A**3)
    return H
