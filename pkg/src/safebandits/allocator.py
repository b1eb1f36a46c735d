"""Privacy-budget allocation against an asymptotic regret constant.

``r_of_a`` is the limit of the simplex regret bound scaled by
``(T^2 log T)^(1/3)``; it depends on the privacy vector through the largest
level and through a max-of-sums ratio ``f_of_a``. Given a budget ``U`` on
that constant, ``allocate`` returns the privacy vector that exhausts it and
cannot be raised for any agent without lowering another
(``verify_unimprovable`` probes this numerically).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class BudgetError(ValueError):
    """The requested regret budget admits no valid privacy vector."""


@dataclass(frozen=True)
class PrivacyVector:
    """Per-agent privacy levels ``alpha_m`` (larger means noisier)."""

    a: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise ValueError("privacy levels must be finite and nonnegative")

    @property
    def n_agents(self) -> int:
        return self.a.size


@dataclass(frozen=True)
class BudgetInputs:
    """Problem constants entering the regret constant.

    ``lambda_check`` is the minimum-eigenvalue lower bound from the
    exploration phase; the theory statement is read with its rate parameter
    equal to this bound.
    """

    U: float
    L: float
    K: float
    S: float
    d: int
    M: int
    sigma: float
    R: float
    c: np.ndarray
    lambda_check: float

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        c.setflags(write=False)
        object.__setattr__(self, "c", c)
        positives = {"U": self.U, "L": self.L, "K": self.K, "S": self.S,
                     "sigma": self.sigma, "lambda_check": self.lambda_check}
        for name, val in positives.items():
            if val <= 0:
                raise ValueError(f"{name} must be positive")
        if self.R < 0:
            raise ValueError("R must be nonnegative")
        if self.d < 1 or self.M < 1:
            raise ValueError("d and M must be at least 1")
        if c.size != self.M or np.any(c <= 0):
            raise ValueError("need M positive simplex scales")


def g_function(b: np.ndarray) -> float:
    """``max_m b_m * sum_m 1/b_m``; at least M, with equality iff b is constant."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if np.any(b <= 0):
        raise ValueError("g is defined for strictly positive vectors")
    return float(np.max(b) * np.sum(1.0 / b))


def _h(a: np.ndarray, c: np.ndarray, R: float, sigma: float) -> np.ndarray:
    denom = np.sqrt(R ** 2 + a ** 2 * sigma ** 2)
    if np.any(denom == 0):
        raise ZeroDivisionError(
            "f(a) is undefined when R = 0 and some privacy level is 0")
    return c / denom


def f_of_a(a: PrivacyVector | np.ndarray, c: np.ndarray, R: float,
           sigma: float) -> float:
    """``max_m sum_m' c_m sqrt(R^2+a_m'^2 s^2) / (c_m' sqrt(R^2+a_m^2 s^2))``.

    Structurally ``g(h(a))`` for ``h_m = c_m / sqrt(R^2 + a_m^2 sigma^2)``.
    """
    a = a.a if isinstance(a, PrivacyVector) else np.asarray(a, dtype=float)
    return g_function(_h(a, np.asarray(c, dtype=float), R, sigma))


def r_of_a(a: PrivacyVector | np.ndarray, inputs: BudgetInputs) -> float:
    """Asymptotic regret constant of the simplex bound at privacy vector ``a``."""
    a = a.a if isinstance(a, PrivacyVector) else np.asarray(a, dtype=float)
    alpha_max = float(np.max(a))
    f_val = f_of_a(a, inputs.c, inputs.R, inputs.sigma)
    M = inputs.M
    lead = 2.0 * inputs.L * inputs.K * (
        inputs.d * (inputs.R ** 2 + alpha_max ** 2 * inputs.sigma ** 2)) ** (1.0 / 3.0)
    return lead * (2.0 * inputs.S * np.sqrt(M) / inputs.lambda_check
                   + np.sqrt((M - 1) + (2.0 * f_val - 1.0) ** 2))


def minimal_feasible_budget(inputs: BudgetInputs) -> float:
    """Budget below which the allocation target is imaginary."""
    M = inputs.M
    return (2.0 * inputs.L * inputs.K * (inputs.d * inputs.R ** 2) ** (1.0 / 3.0)
            * np.sqrt(M)
            * (2.0 * inputs.S / inputs.lambda_check + np.sqrt(4.0 * M - 3.0)))


def allocate(inputs: BudgetInputs) -> PrivacyVector:
    """Unilaterally unimprovable privacy vector exhausting the budget.

    ``alpha_m = sqrt((R^2/sigma^2 + r_tilde^2) c_m^2 / c_max^2 - R^2/sigma^2)``
    with ``r_tilde`` chosen so the constant hits ``U`` exactly. The result is
    verified against ``r_of_a`` to 1e-9 relative before being returned.
    """
    M = inputs.M
    denom = (8.0 * inputs.L ** 3 * inputs.K ** 3 * inputs.d * M ** 1.5
             * (2.0 * inputs.S / inputs.lambda_check + np.sqrt(4.0 * M - 3.0)) ** 3)
    noise_cube = inputs.U ** 3 / denom
    if noise_cube < inputs.R ** 2:
        raise BudgetError(
            f"budget {inputs.U} is infeasible; the minimum feasible budget is "
            f"{minimal_feasible_budget(inputs)}")
    r_tilde_sq = (noise_cube - inputs.R ** 2) / inputs.sigma ** 2
    ratio = inputs.R ** 2 / inputs.sigma ** 2
    c_max = float(np.max(inputs.c))
    vals = (ratio + r_tilde_sq) * (inputs.c / c_max) ** 2 - ratio
    for m, v in enumerate(vals):
        if v < 0:
            raise BudgetError(
                f"budget {inputs.U} cannot accommodate agent {m}: its scale "
                f"{inputs.c[m]} forces a negative squared privacy level")
    a_star = PrivacyVector(np.sqrt(vals))
    achieved = r_of_a(a_star, inputs)
    if abs(achieved - inputs.U) > 1e-9 * max(1.0, abs(inputs.U)):
        raise BudgetError(
            f"allocation self-check failed: r(a*) = {achieved} vs U = {inputs.U}")
    return a_star


@dataclass(frozen=True)
class UnimprovabilityReport:
    passed: bool
    budget_matches: bool
    achieved: float
    worst_margin: float
    n_samples: int

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status}: r(a*) = {self.achieved:.12g} "
                f"(budget match: {self.budget_matches}), worst perturbation "
                f"margin {self.worst_margin:.3e} over {self.n_samples} samples")


def verify_unimprovable(a_star: PrivacyVector, inputs: BudgetInputs,
                        n_samples: int, rng: np.random.Generator) -> UnimprovabilityReport:
    """Numerically probe unimprovability of an allocation.

    Checks ``r(a*) = U`` to 1e-9 relative and that every sampled nonnegative
    perturbation of norm in (1e-6, 1] strictly increases the constant.
    """
    achieved = r_of_a(a_star, inputs)
    budget_ok = abs(achieved - inputs.U) <= 1e-9 * max(1.0, abs(inputs.U))
    worst = np.inf
    M = a_star.n_agents
    for _ in range(n_samples):
        v = np.abs(rng.standard_normal(M))
        norm = np.linalg.norm(v)
        if norm == 0:
            continue
        v *= rng.uniform(1e-6, 1.0) / norm
        worst = min(worst, r_of_a(a_star.a + v, inputs) - inputs.U)
    passed = budget_ok and worst > 0
    return UnimprovabilityReport(passed=passed, budget_matches=budget_ok,
                                 achieved=achieved, worst_margin=float(worst),
                                 n_samples=n_samples)
