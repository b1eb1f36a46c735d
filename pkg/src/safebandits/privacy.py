"""Per-agent Gaussian local-privacy mechanism and privacy-level bookkeeping.

Each agent perturbs its scalar response before sharing: ``u = y + h`` with
``h ~ N(0, (alpha_m * sigma)^2)``, where ``sigma`` is the base Gaussian
mechanism scale for the shared ``(epsilon, delta)`` pair and
``alpha_m = epsilon / epsilon_m`` encodes agent m's privacy level. The
mechanism is per-round ``(epsilon_m, delta)``-locally-private and closed
under post-processing; neither property needs runtime code beyond the
perturbation itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log, sqrt

import numpy as np


def sigma_for(epsilon: float, delta: float, sensitivity: float) -> float:
    """Gaussian mechanism scale ``(sensitivity / epsilon) * sqrt(2 ln(1.25/delta))``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if sensitivity < 0:
        raise ValueError("sensitivity must be nonnegative")
    return (sensitivity / epsilon) * sqrt(2.0 * log(1.25 / delta))


@dataclass(frozen=True)
class PrivacyScheme:
    """Base budget ``(epsilon, delta)`` plus per-agent budgets ``epsilon_m``.

    ``sigma``, ``alpha`` and ``sigma_m`` are derived, never stored, so the
    defining identities hold exactly. ``delta`` is shared across agents.
    Sensitivity is configurable: responses in [-1, 1] give 2, while the
    reference experiments use 1.
    """

    epsilon: float
    delta: float
    epsilon_m: tuple[float, ...]
    sensitivity: float = 1.0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.sensitivity < 0:
            raise ValueError("sensitivity must be nonnegative")
        object.__setattr__(self, "epsilon_m", tuple(float(e) for e in self.epsilon_m))
        if not self.epsilon_m or any(e <= 0 for e in self.epsilon_m):
            raise ValueError("every per-agent epsilon must be positive")

    @classmethod
    def from_alpha(cls, epsilon: float, delta: float, alpha,
                   sensitivity: float = 1.0) -> "PrivacyScheme":
        """Build a scheme from privacy levels ``alpha_m = epsilon / epsilon_m``."""
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        if np.any(alpha < 0):
            raise ValueError("alpha levels must be nonnegative")
        return cls(epsilon, delta,
                   tuple(epsilon / a if a > 0 else np.inf for a in alpha),
                   sensitivity)

    @property
    def n_agents(self) -> int:
        return len(self.epsilon_m)

    @property
    def sigma(self) -> float:
        return sigma_for(self.epsilon, self.delta, self.sensitivity)

    @property
    def alpha(self) -> np.ndarray:
        return self.epsilon / np.array(self.epsilon_m)

    @property
    def sigma_m(self) -> np.ndarray:
        return self.alpha * self.sigma


def alpha_levels(scheme: PrivacyScheme) -> np.ndarray:
    """Privacy levels ``alpha_m = epsilon / epsilon_m``, one per agent."""
    return scheme.alpha


@dataclass(frozen=True)
class PerturbedResponse:
    """Privatized response as it crosses the agent boundary.

    Deliberately carries no record of the raw response.
    """

    u: float
    agent: int
    round: int = 0

    def __post_init__(self):
        if not np.isfinite(self.u):
            raise ValueError("perturbed response must be finite")


def privatize(y: float, agent: int, scheme: PrivacyScheme,
              rng: np.random.Generator, round: int = 0) -> PerturbedResponse:
    """Apply agent ``agent``'s Gaussian mechanism to the raw response ``y``."""
    if not 0 <= agent < scheme.n_agents:
        raise ValueError(f"agent index {agent} out of range")
    sd = scheme.alpha[agent] * scheme.sigma
    h = sd * rng.standard_normal()
    return PerturbedResponse(u=float(y + h), agent=agent, round=round)


@dataclass(frozen=True)
class RngStreams:
    """Independent per-agent, per-phase noise streams from one master seed.

    Splitting rule: ``SeedSequence(master_seed)`` spawns ``4M + 1`` children
    in order (action sampling; response noise per agent for the exploration
    phase, then for the exploitation phase; privacy noise per agent in the
    same phase order). Privacy noise is drawn as standard normals and scaled
    by ``alpha_m * sigma``, so permuting a privacy vector re-weights, but
    never re-draws, the underlying agent streams, and the environment noise
    sequence is untouched (paired comparisons across privacy vectors).
    """

    actions: np.random.Generator
    response_noise: tuple[tuple[np.random.Generator, ...], ...]
    privacy_noise: tuple[tuple[np.random.Generator, ...], ...]

    @classmethod
    def split(cls, master_seed: int, n_agents: int) -> "RngStreams":
        children = np.random.SeedSequence(master_seed).spawn(4 * n_agents + 1)
        gen = [np.random.default_rng(c) for c in children]
        M = n_agents
        return cls(
            actions=gen[0],
            response_noise=(tuple(gen[1:1 + M]), tuple(gen[1 + M:1 + 2 * M])),
            privacy_noise=(tuple(gen[1 + 2 * M:1 + 3 * M]),
                           tuple(gen[1 + 3 * M:])),
        )

    def phase(self, explore: bool) -> tuple[tuple[np.random.Generator, ...],
                                            tuple[np.random.Generator, ...]]:
        """(response, privacy) streams for the requested phase."""
        idx = 0 if explore else 1
        return self.response_noise[idx], self.privacy_noise[idx]
