"""Simulated environments: stochastic arms and noisy convex functions.

Arm environments expose their true means so the harness can measure
pseudo-regret exactly.  Function environments return loss values perturbed by
stochastic multiplicative noise and a bounded adversarial term, and must
accept queries on the tau-enlarged feasible set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import simplex as smp
from .distributions import HeavyTailSpec, LogPareto, log_pareto_normalizer
from .exceptions import OutOfDomain
from .rng import as_generator


class ArmEnvironment:
    """A finite set of heavy-tailed loss arms with known means."""

    def __init__(self, arms):
        self.arms = tuple(arms)
        if len(self.arms) < 1:
            raise ValueError("need at least one arm")
        self.known_means = np.array([a.mean() for a in self.arms])

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def optimal_arm(self) -> int:
        return int(np.argmin(self.known_means))

    @property
    def moment_scale(self) -> float:
        """The smallest M certifying every arm's (1+alpha)-moment bound."""
        return max(a.M for a in self.arms)

    @property
    def alpha(self) -> float:
        return min(a.alpha for a in self.arms)

    def pull(self, arm: int, rng) -> float:
        """One independent loss draw from the chosen arm."""
        return float(self.arms[arm].sample(rng))

    def sample_table(self, T: int, rngs) -> np.ndarray:
        """A (T, n_arms) table of pre-drawn losses, one stream per arm."""
        cols = [np.asarray(spec.sample(as_generator(r), T), dtype=float)
                for spec, r in zip(self.arms, rngs)]
        return np.column_stack(cols)


def two_arm_experiment_env(alpha: float) -> ArmEnvironment:
    """The two-arm study environment: mean losses 3.0 and 3.1."""
    from .distributions import experiment_arms

    return ArmEnvironment(experiment_arms(alpha))


# ---------------------------------------------------------------------------
# Feasible sets


class SimplexSet:
    """The probability simplex, with Euclidean tau-enlargement membership."""

    def __init__(self, n: int):
        self.n = n

    def contains_enlarged(self, x: np.ndarray, tau: float, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return len(x) == self.n and smp.distance_to_simplex(x) <= tau + tol

    def center(self) -> np.ndarray:
        return smp.uniform(self.n)


class BallSet:
    """Euclidean ball of a given radius centered at the origin."""

    def __init__(self, n: int, radius: float):
        self.n = n
        self.radius = float(radius)

    def contains_enlarged(self, x: np.ndarray, tau: float, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return len(x) == self.n and float(np.linalg.norm(x)) <= self.radius + tau + tol

    def center(self) -> np.ndarray:
        return np.zeros(self.n)


# ---------------------------------------------------------------------------
# Bounded adversaries: the theory constrains only |delta| <= Delta, so we
# ship representatives at the boundary.


@dataclass(frozen=True)
class ZeroAdversary:
    bound: float = 0.0

    def __call__(self, x: np.ndarray) -> float:
        return 0.0


@dataclass(frozen=True)
class ConstantAdversary:
    bound: float

    def __call__(self, x: np.ndarray) -> float:
        return self.bound


@dataclass(frozen=True)
class SignAdversary:
    """delta(x) = Delta * sign(sin(<w, x>)); oscillates at the bound."""

    bound: float
    w: np.ndarray = field(default=None)

    def __call__(self, x: np.ndarray) -> float:
        w = self.w if self.w is not None else np.arange(1.0, len(x) + 1.0)
        s = math.sin(float(np.dot(w, x)))
        return self.bound * (1.0 if s >= 0 else -1.0)


def unit_mean_noise(alpha: float) -> LogPareto:
    """The xi law rescaled to mean one; multiplies the nonlinear losses."""
    _, xi_mean = log_pareto_normalizer(alpha)
    return LogPareto(alpha, 1.0 / xi_mean)


class FunctionEnvironment:
    """Noisy-function environment: query returns l(x, xi) + delta(x).

    ``base`` is the deterministic loss, multiplied by a positive unit-mean
    heavy-tailed factor (which keeps convexity for every realization), plus a
    bounded adversarial perturbation that is deterministic in x.  Regularity
    constants and the loss-moment bound B are certified analytically from the
    noise moment and the geometry of the enlarged feasible set.
    """

    def __init__(self, feasible_set, tau: float, noise: HeavyTailSpec, adversary,
                 lipschitz_M: float | None = None, smooth_L: float | None = None,
                 B: float | None = None):
        self.S = feasible_set
        self.tau = float(tau)
        self.noise = noise
        self.adversary = adversary
        self.delta_bound = float(getattr(adversary, "bound", 0.0))
        self.lipschitz_M = lipschitz_M
        self.smooth_L = smooth_L
        self.B = B

    @property
    def alpha(self) -> float:
        return self.noise.alpha

    @property
    def n(self) -> int:
        return self.S.n

    def base_loss(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def expected_loss(self, x: np.ndarray) -> float:
        # Noise has mean one and the adversary is excluded from the target.
        return self.base_loss(x)

    def query(self, x: np.ndarray, t: int, rng) -> float:
        x = np.asarray(x, dtype=float)
        if not self.S.contains_enlarged(x, self.tau):
            raise OutOfDomain("query point outside the enlarged feasible set")
        xi = float(self.noise.sample(rng))
        return xi * self.base_loss(x) + self.adversary(x)


class LinearSimplexEnv(FunctionEnvironment):
    """l(x, xi) = xi <c, x> on the simplex; Lipschitz branch with M = M_xi ||c||."""

    def __init__(self, c: np.ndarray, alpha: float, tau: float, adversary=None):
        c = np.asarray(c, dtype=float)
        if np.any(c < 0):
            raise ValueError("cost vector must be nonnegative on the enlarged simplex")
        noise = unit_mean_noise(alpha)
        sup_abs = float(np.max(c) + tau * np.linalg.norm(c))
        super().__init__(
            SimplexSet(len(c)), tau, noise, adversary or ZeroAdversary(),
            lipschitz_M=noise.M * float(np.linalg.norm(c)),
            B=noise.M * sup_abs,
        )
        self.c = c

    def base_loss(self, x: np.ndarray) -> float:
        return float(np.dot(self.c, x))

    def minimizer(self) -> np.ndarray:
        u = np.zeros(len(self.c))
        u[int(np.argmin(self.c))] = 1.0
        return u


class QuadraticBallEnv(FunctionEnvironment):
    """l(x, xi) = xi * 0.5 ||x - b||^2 on a ball; smooth branch with L = M_xi."""

    def __init__(self, b: np.ndarray, radius: float, alpha: float, tau: float, adversary=None):
        b = np.asarray(b, dtype=float)
        noise = unit_mean_noise(alpha)
        sup_dist = float(np.linalg.norm(b)) + radius + tau
        super().__init__(
            BallSet(len(b), radius), tau, noise, adversary or ZeroAdversary(),
            smooth_L=noise.M,
            B=noise.M * 0.5 * sup_dist ** 2,
        )
        self.b = b

    def base_loss(self, x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - self.b
        return 0.5 * float(np.dot(d, d))

    def minimizer(self) -> np.ndarray:
        norm = float(np.linalg.norm(self.b))
        if norm <= self.S.radius:
            return self.b.copy()
        return self.b * (self.S.radius / norm)


class NormBallEnv(FunctionEnvironment):
    """l(x, xi) = xi ||x - b|| on a ball; Lipschitz branch with M = M_xi."""

    def __init__(self, b: np.ndarray, radius: float, alpha: float, tau: float, adversary=None):
        b = np.asarray(b, dtype=float)
        noise = unit_mean_noise(alpha)
        sup_dist = float(np.linalg.norm(b)) + radius + tau
        super().__init__(
            BallSet(len(b), radius), tau, noise, adversary or ZeroAdversary(),
            lipschitz_M=noise.M,
            B=noise.M * sup_dist,
        )
        self.b = b

    def base_loss(self, x: np.ndarray) -> float:
        return float(np.linalg.norm(np.asarray(x, dtype=float) - self.b))

    def minimizer(self) -> np.ndarray:
        norm = float(np.linalg.norm(self.b))
        if norm <= self.S.radius:
            return self.b.copy()
        return self.b * (self.S.radius / norm)
