"""Per-agent regularized least squares and confidence ellipsoids.

Each agent keeps a ridge Gram matrix ``G = sum x x^T + nu I`` and moment
vector ``g = sum u x`` over the privatized responses it has returned. The
estimate ``theta_hat = G^{-1} g`` is recomputed by a fresh symmetric solve on
every update; at desk scale (d <= 8) that is cheaper to trust than rank-one
inverse maintenance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import log, sqrt

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConfidenceParams:
    """Problem constants entering the confidence radius.

    ``R`` bounds the response noise (sub-Gaussian level), ``S`` the parameter
    norms, ``K`` the action norms; ``sigma`` is the base privacy-noise scale.
    The failure split across agents (the ``delta_prime / M`` term) is baked
    into the radius formula.
    """

    R: float
    S: float
    K: float
    nu: float
    delta_prime: float
    M: int
    d: int
    sigma: float

    def __post_init__(self):
        if self.R < 0 or self.sigma < 0:
            raise ValueError("noise levels must be nonnegative")
        if self.S <= 0 or self.K <= 0 or self.nu <= 0:
            raise ValueError("S, K and nu must be positive")
        if not 0 < self.delta_prime < 0.5:
            raise ValueError("delta_prime must lie in (0, 1/2)")
        if self.M < 1 or self.d < 1:
            raise ValueError("M and d must be at least 1")


class AgentEstimator:
    """Online ridge estimator for one agent's parameter vector."""

    def __init__(self, d: int, nu: float):
        if nu <= 0:
            raise ValueError("ridge parameter must be positive")
        self.d = d
        self.nu = nu
        self.G = nu * np.eye(d)
        self.g = np.zeros(d)
        self.theta_hat = np.zeros(d)
        self.n_updates = 0

    def update(self, x: np.ndarray, u: float, norm_bound: float | None = None) -> None:
        """Fold in one action/response pair and refresh the estimate."""
        x = np.asarray(x, dtype=float)
        if not (np.all(np.isfinite(x)) and np.isfinite(u)):
            raise ValueError("estimator update needs finite inputs")
        if norm_bound is not None:
            nx = np.linalg.norm(x)
            if nx > norm_bound * (1.0 + 1e-6) + 1e-8:
                logger.warning("action norm %.6g exceeds the bound %.6g", nx, norm_bound)
        self.G = self.G + np.outer(x, x)
        self.g = self.g + u * x
        self.theta_hat = np.linalg.solve(self.G, self.g)
        self.n_updates += 1

    def to_text(self) -> str:
        """Structured-text state dump for trace debugging."""
        lines = [f"estimator d={self.d} nu={self.nu!r} updates={self.n_updates}",
                 "G"]
        lines += [" ".join(repr(float(v)) for v in row) for row in self.G]
        lines.append("g")
        lines.append(" ".join(repr(float(v)) for v in self.g))
        lines.append("theta_hat")
        lines.append(" ".join(repr(float(v)) for v in self.theta_hat))
        return "\n".join(lines)

    def mahalanobis(self, theta: np.ndarray) -> float:
        """``||theta - theta_hat||_G``."""
        diff = np.asarray(theta, dtype=float) - self.theta_hat
        return float(np.sqrt(diff @ self.G @ diff))


def beta(t: int, alpha_m: float, p: ConfidenceParams) -> float:
    """Confidence radius after ``t`` rounds for an agent at level ``alpha_m``.

    ``sqrt(R^2 + alpha_m^2 sigma^2) * sqrt(d log((1 + t K^2/nu)/(delta'/M)))
    + S sqrt(nu)``; increasing in both ``t`` and ``alpha_m``.
    """
    noise = sqrt(p.R ** 2 + (alpha_m * p.sigma) ** 2)
    width = sqrt(p.d * log((1.0 + t * p.K ** 2 / p.nu) / (p.delta_prime / p.M)))
    return noise * width + p.S * sqrt(p.nu)


def in_confidence_set(theta: np.ndarray, est: AgentEstimator, beta_val: float) -> bool:
    """Whether ``theta`` lies in the ellipsoid of radius ``beta_val`` around the estimate."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (est.d,):
        raise ValueError(f"expected a vector of dimension {est.d}")
    return est.mahalanobis(theta) <= beta_val


def min_eig_bound(T_prime: int, nu: float, lambda_check: float) -> float:
    """High-probability lower bound ``nu + T' lambda_check / 2`` on the Gram spectrum."""
    if T_prime < 0:
        raise ValueError("T' must be nonnegative")
    return nu + T_prime * lambda_check / 2.0
