"""Action selection: known-safe exploration, phase planning, and OFU.

The controller runs in two phases. During pure exploration it samples
uniformly from a sphere inside the known safe set (safe for every parameter
of norm at most S), which lower-bounds the Gram-matrix spectra. Afterwards it
maximizes an optimistic linear reward over the conservative safe set built
from the per-agent confidence ellipsoids.

The optimistic maximization relaxes each agent's ellipsoid bonus to an
inf-norm bonus, which turns the joint problem into an enumeration of sign and
coordinate choices per agent; the safety rows couple agents, so all
``(2d)^M`` combinations are solved (in one vectorized barrier pass) and the
best kept. Ties break toward the lowest enumeration index.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import ceil, log, sqrt

import numpy as np

from .estimation import AgentEstimator, ConfidenceParams, beta as beta_radius
from .geometry import Polytope
from .solvers import ConicSafeSet, SolverError

SAFETY_SLACK = 1e-10
FEASIBILITY_SLACK = 1e-8


@dataclass
class ActionProfile:
    """Stacked per-agent actions, one row per agent."""

    x: np.ndarray

    def __post_init__(self):
        self.x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if not np.all(np.isfinite(self.x)):
            raise ValueError("actions must be finite")

    @property
    def flat(self) -> np.ndarray:
        return self.x.reshape(-1)

    def agent_norms(self) -> np.ndarray:
        return np.linalg.norm(self.x, axis=1)


@dataclass(frozen=True)
class KnownSafeBall:
    """Ball around ``center`` whose half-radius sphere is sampled during exploration."""

    center: np.ndarray
    radius: float
    n_agents: int
    d: int


class KnownSafeSet:
    """Actions safe for every parameter matrix with row norms at most S.

    Membership: ``sum_m |a_im| S ||x_m|| <= b_i`` for every row plus the
    per-agent norm caps; this is the worst case of the safety constraint over
    the initial parameter ball.
    """

    def __init__(self, poly: Polytope, S: float, K: float, d: int):
        if np.any(poly.b <= 0):
            raise ValueError(
                "the known safe set has no interior: some row offset is nonpositive")
        self.poly = poly
        self.S = S
        self.K = K
        # Largest ball around the origin inside the set, capped so the
        # sampling radius r/2 respects the action-norm bound.
        r = float(np.min(poly.b / (S * poly.row_l1_norms())))
        r = min(r, 2.0 * K)
        self.ball = KnownSafeBall(center=np.zeros(poly.dim * d), radius=r,
                                  n_agents=poly.dim, d=d)

    def contains(self, profile: ActionProfile, tol: float = FEASIBILITY_SLACK) -> bool:
        norms = profile.agent_norms()
        if np.any(norms > self.K + tol):
            return False
        lhs = (np.abs(self.poly.A) * self.S) @ norms
        return bool(np.all(lhs <= self.poly.b + tol))


def known_safe_set(poly: Polytope, S: float, K: float, d: int) -> KnownSafeSet:
    """Known safe set for ``d``-dimensional actions, with its inscribed ball."""
    return KnownSafeSet(poly, S, K, d)


def pure_explore_action(ball: KnownSafeBall, rng: np.random.Generator) -> ActionProfile:
    """Uniform sample from the half-radius sphere around the ball center."""
    n = ball.n_agents * ball.d
    u = rng.standard_normal(n)
    u /= np.linalg.norm(u)
    X = ball.center + 0.5 * ball.radius * u
    return ActionProfile(X.reshape(ball.n_agents, ball.d))


@dataclass(frozen=True)
class PhasePlan:
    """Horizon split into pure exploration and exploration-exploitation."""

    T: int
    T_prime: int
    t_delta_prime: float
    t_h_prime: float
    lambda_check: float
    overridden: bool = False

    def __post_init__(self):
        if not 1 <= self.T_prime < self.T:
            raise ValueError("need 1 <= T' < T")
        if not self.overridden and self.T_prime < max(self.t_delta_prime,
                                                      self.t_h_prime):
            raise ValueError("theorem-compliant plans need T' >= max(t_delta', t_h')")


def plan_phases(T: int, params: ConfidenceParams, lambda_check: float,
                h_scaled: float, alphas: np.ndarray,
                t_prime_override: int | None = None) -> PhasePlan:
    """Choose the pure-exploration length.

    Without an override this is ``ceil(max(t_delta', t_h',
    (2/lambda) (beta_T_max T)^(2/3)))`` and errors when that already reaches
    the horizon. An explicit override bypasses the lower bounds (callers log
    it); the plan records both thresholds either way.
    """
    if h_scaled <= 0 or lambda_check <= 0:
        raise ValueError("need positive maximum shrinkage and eigenvalue bound")
    K, nu, d, dp = params.K, params.nu, params.d, params.delta_prime
    t_dp = (8.0 * K ** 2 / lambda_check) * log(d / dp)
    t_h = 8.0 * K ** 2 / (lambda_check * h_scaled ** 2) - 2.0 * nu / lambda_check
    beta_T_max = max(beta_radius(T, a, params) for a in np.atleast_1d(alphas))
    t_growth = (2.0 / lambda_check) * (beta_T_max * T) ** (2.0 / 3.0)
    if t_prime_override is not None:
        return PhasePlan(T=T, T_prime=int(t_prime_override), t_delta_prime=t_dp,
                         t_h_prime=t_h, lambda_check=lambda_check, overridden=True)
    T_prime = int(ceil(max(t_dp, t_h, t_growth)))
    if T_prime >= T:
        raise ValueError(
            f"horizon too short: the required exploration length {T_prime} "
            f"reaches the horizon {T}")
    return PhasePlan(T=T, T_prime=max(T_prime, 1), t_delta_prime=t_dp,
                     t_h_prime=t_h, lambda_check=lambda_check)


class ConservativeSafeSet:
    """Inner approximation of the safe actions under current uncertainty.

    Row form: ``sum_m (a_im theta_hat_m . x_m + |a_im| beta_m
    ||x_m||_{G_m^{-1}}) <= b_i`` plus per-agent norm caps.
    """

    def __init__(self, poly: Polytope, estimators: list[AgentEstimator],
                 betas: np.ndarray, K: float):
        M = poly.dim
        if len(estimators) != M or len(betas) != M:
            raise ValueError("need one estimator and radius per agent")
        self.poly = poly
        self.K = K
        self.betas = np.asarray(betas, dtype=float)
        d = estimators[0].d
        G = np.stack([e.G for e in estimators])
        evals, evecs = np.linalg.eigh(G)
        self.Q = np.einsum("mde,me,mfe->mdf", evecs, 1.0 / evals, evecs)
        self.G_inv_sqrt = np.einsum("mde,me,mfe->mdf", evecs,
                                    1.0 / np.sqrt(evals), evecs)
        self.theta_hat = np.stack([e.theta_hat for e in estimators])
        self.abar = poly.A[:, :, None] * self.theta_hat[None, :, :]   # (P, M, d)
        self.s = np.abs(poly.A) * self.betas[None, :]                 # (P, M)
        self.d = d

    def slacks(self, profile: ActionProfile) -> np.ndarray:
        """Per-row slack ``b_i - row_i(X)``; nonnegative means satisfied."""
        X = profile.x
        norms = np.sqrt(np.einsum("md,mde,me->m", X, self.Q, X))
        lin = np.einsum("pmd,md->p", self.abar, X)
        return self.poly.b - lin - self.s @ norms

    def feasible(self, profile: ActionProfile, tol: float = FEASIBILITY_SLACK) -> bool:
        if np.any(profile.agent_norms() > self.K + tol):
            return False
        return bool(np.all(self.slacks(profile) >= -tol))

    def conic(self) -> ConicSafeSet:
        return ConicSafeSet(self.abar, self.s, self.Q, self.poly.b, self.K)


@dataclass
class OfuResult:
    profile: ActionProfile
    value: float
    subproblem_values: np.ndarray
    best_index: int


class OfuSolver:
    """Optimistic action selection with warm starts across rounds.

    Holds the previous round's subproblem optima and reuses them as interior
    starting points; the conservative set moves slowly between rounds, so the
    barrier typically converges in a couple of corrector steps.
    """

    def __init__(self, poly: Polytope, K: float, c_reward: np.ndarray,
                 exact: bool = False):
        self.poly = poly
        self.K = float(K)
        self.c = np.asarray(c_reward, dtype=float)
        if np.any(self.c < 0):
            raise ValueError("reward weights must be nonnegative")
        self.exact = exact  # refine every subproblem (verification use)
        self._warm: np.ndarray | None = None
        self._warm_key: tuple | None = None
        self._grid_cache: dict[tuple, np.ndarray] = {}

    def _index_grid(self, counts: tuple[int, ...]) -> np.ndarray:
        grid = self._grid_cache.get(counts)
        if grid is None:
            grid = np.array(list(product(*(range(n) for n in counts))), dtype=int)
            self._grid_cache[counts] = grid
        return grid

    def select(self, estimators: list[AgentEstimator],
               betas: np.ndarray) -> OfuResult:
        safe_set = ConservativeSafeSet(self.poly, estimators, betas, self.K)
        M, d = self.poly.dim, safe_set.d
        betas = safe_set.betas

        # Per-agent optimistic objective options c_m (theta_hat +- beta_m row_i
        # of G^{-1/2}); agents with a zero radius collapse to one option.
        options: list[np.ndarray] = []
        for m in range(M):
            base = self.c[m] * safe_set.theta_hat[m]
            if betas[m] == 0.0:
                options.append(base[None, :])
            else:
                bonus = self.c[m] * betas[m] * safe_set.G_inv_sqrt[m]
                options.append(np.vstack([base[None, :] + bonus,
                                          base[None, :] - bonus]))
        counts = tuple(opt.shape[0] for opt in options)
        grid = self._index_grid(counts)
        W = np.stack([options[m][grid[:, m]] for m in range(M)], axis=1)  # (B, M, d)

        if np.any(self.poly.b <= 0):
            raise RuntimeError(
                "conservative safe set lost its interior: row offsets "
                f"{self.poly.b} must all be positive")
        try:
            conic = safe_set.conic()
            x0 = self._warm if self._warm_key == counts else None
            if self.exact:
                res = conic.maximize(W, x0=x0, refine_all=True)
            else:
                res = conic.maximize_robust(W, x0=x0)
        except SolverError as exc:
            raise RuntimeError(f"optimistic subproblem solve failed: {exc}") from exc

        best = int(np.argmax(res.value))
        profile = ActionProfile(res.x[best])
        if not safe_set.feasible(profile):
            raise RuntimeError(
                "optimistic action failed the conservative feasibility check; "
                f"slacks={safe_set.slacks(profile)}")
        self._warm = res.x_mid if res.x_mid is not None else res.x
        self._warm_key = counts
        return OfuResult(profile=profile, value=float(res.value[best]),
                         subproblem_values=res.value, best_index=best)


def ofu_select(c_reward: np.ndarray, estimators: list[AgentEstimator],
               betas: np.ndarray, poly: Polytope,
               K: float) -> tuple[ActionProfile, float]:
    """One-shot optimistic selection (no warm-start state, every subproblem
    refined to full accuracy)."""
    solver = OfuSolver(poly, K, c_reward, exact=True)
    res = solver.select(estimators, betas)
    return res.profile, res.value


def is_truly_safe(profile: ActionProfile, theta_star: np.ndarray,
                  poly: Polytope) -> bool:
    """Ground-truth safety check (simulator only)."""
    y = np.einsum("md,md->m", np.asarray(theta_star, dtype=float), profile.x)
    return bool(np.all(poly.A @ y <= poly.b + SAFETY_SLACK))
