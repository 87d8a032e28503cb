"""Closed-form parameter schedules for both solvers.

The linear-bandit planner maps (T, alpha, n, M) to the clip level, the
stepsize, and the guaranteed average-regret bound.  The gradient-free planner
maps the problem constants to the sphere-moment factor a_q, the estimator
moment scale sigma_q, the stepsize, the clip level, and (given a target
accuracy) the smoothing radius and iteration count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .exceptions import DegenerateAlpha, InvalidDimension


def _check_alpha_open(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DegenerateAlpha(f"alpha must lie strictly inside (0, 1), got {alpha}")
    return alpha


def a_q_constant(n: int, q: float) -> float:
    """Sphere-moment factor n^(1/q - 1/2) * min{sqrt(32 ln n - 8), sqrt(2q - 1)}.

    q = inf takes the max-norm limit n^(-1/2) sqrt(32 ln n - 8).  n = 1 is
    rejected: the log branch is negative there and the formula is never
    evaluated at n = 1 upstream.
    """
    if n < 2:
        raise InvalidDimension("a_q is undefined for n < 2 (32 ln n - 8 < 0)")
    if not q >= 2.0:
        raise ValueError(f"q must lie in [2, inf], got {q}")
    log_branch = math.sqrt(32.0 * math.log(n) - 8.0)
    if math.isinf(q):
        return n ** -0.5 * log_branch
    return n ** (1.0 / q - 0.5) * min(log_branch, math.sqrt(2.0 * q - 1.0))


class Theorem1Plan(NamedTuple):
    lam: float
    mu: float
    bound: float


def theorem1_planner(T: int, alpha: float, n: int, M: float) -> Theorem1Plan:
    """Clip level, stepsize and average-regret bound for the linear solver.

        lambda = T^(1/(1+a)) * (2a/(1-a))^(2/(1+a)) / (8n)^(1/(1+a)) * M
        mu     = sqrt(2) / sqrt(T lambda^(1-a) M^(1+a))
        bound  = T^(-a/(1+a)) M n^(a/(1+a)) 2^(2 - a^2/(1+a)) (a/(1-a))^(2/(1+a))
    """
    alpha = _check_alpha_open(alpha)
    if T < 1 or n < 1:
        raise ValueError("T and n must be at least 1")
    if M <= 0:
        raise ValueError("M must be positive")
    ia = 1.0 + alpha
    lam = T ** (1.0 / ia) * (2.0 * alpha / (1.0 - alpha)) ** (2.0 / ia) / (8.0 * n) ** (1.0 / ia) * M
    mu = math.sqrt(2.0) / math.sqrt(T * lam ** (1.0 - alpha) * M ** ia)
    bound = (
        T ** (-alpha / ia)
        * M
        * n ** (alpha / ia)
        * 2.0 ** (2.0 - alpha ** 2 / ia)
        * (alpha / (1.0 - alpha)) ** (2.0 / ia)
    )
    return Theorem1Plan(lam, mu, bound)


@dataclass
class ZoConfig:
    """Run parameters for the gradient-free solver.

    p is the primal norm index, q its dual (p = 1 pairs with q = inf);
    tau the smoothing radius; gamma the simplex negentropy shift; delta the
    adversarial noise bound; B the loss moment scale; exactly one of
    lipschitz_M / smooth_L names the regularity branch.  mu and lam may be
    left unset and filled from the planner.
    """

    T: int
    alpha: float
    tau: float
    B: float
    n: int
    q: float = 2.0
    p: float = 2.0
    gamma: float = 1e-3
    delta: float = 0.0
    mu: float | None = None
    lam: float | None = None
    lipschitz_M: float | None = None
    smooth_L: float | None = None

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if self.B <= 0 or self.delta < 0:
            raise ValueError("B must be positive and delta nonnegative")
        dual_ok = (
            (math.isinf(self.q) and self.p == 1.0)
            or (not math.isinf(self.q) and abs(1.0 / self.p + 1.0 / self.q - 1.0) < 1e-12)
        )
        if not dual_ok:
            raise ValueError(f"p = {self.p} and q = {self.q} are not a dual pair")
        if self.lipschitz_M is not None and self.smooth_L is not None:
            raise ValueError("give exactly one of lipschitz_M or smooth_L")


@dataclass
class PlannerOutput:
    """Evaluated closed-form constants for one gradient-free run."""

    a_q: float
    sigma_q: float
    mu_star: float
    lambda_star: float
    tau_star: float
    R1: float
    D_psi: float
    iterations: float | None = None


def sigma_q_power(n: int, q: float, alpha: float, B: float, delta: float, tau: float) -> float:
    """sigma_q^(alpha+1) = 2^a (n a_q B / tau)^(a+1) + 2^a (n a_q Delta / tau)^(a+1)."""
    aq = a_q_constant(n, q)
    ia = 1.0 + alpha
    return 2.0 ** alpha * ((n * aq * B / tau) ** ia + (n * aq * delta / tau) ** ia)


def plan_parameters(cfg: ZoConfig, R1: float, D_psi: float, eps: float | None = None) -> PlannerOutput:
    """Evaluate the schedule: sigma_q, the stepsize, and the clip level,

        mu*     = (R1^2 / (4 T sigma_q^(a+1) D_psi^(1-a)))^(1/(a+1))
        lambda* = 2 a D_psi / ((1-a) mu*)

    plus, when a target accuracy eps is supplied, the smoothing radius
    tau_M = eps/(8M) (Lipschitz) or tau_L = sqrt(eps/(4L)) (smooth) and the
    matching iteration count.  The stepsize uses the alpha-free variant, which
    stays bounded as alpha -> 0.
    """
    alpha = _check_alpha_open(cfg.alpha)
    if R1 <= 0 or D_psi <= 0:
        raise ValueError("R1 and D_psi must be positive")
    ia = 1.0 + alpha
    aq = a_q_constant(cfg.n, cfg.q)
    sig_pow = sigma_q_power(cfg.n, cfg.q, alpha, cfg.B, cfg.delta, cfg.tau)
    sigma_q = sig_pow ** (1.0 / ia)
    mu_star = (R1 ** 2 / (4.0 * cfg.T * sig_pow * D_psi ** (1.0 - alpha))) ** (1.0 / ia)
    lambda_star = 2.0 * alpha * D_psi / ((1.0 - alpha) * mu_star)

    tau_star = cfg.tau
    iterations = None
    if eps is not None:
        if eps <= 0:
            raise ValueError("eps must be positive")
        core = 4.0 * R1 ** (2.0 * alpha / ia) * D_psi ** ((1.0 - alpha) / ia) * cfg.n * aq * cfg.B
        if cfg.lipschitz_M is not None:
            tau_star = eps / (8.0 * cfg.lipschitz_M)
            iterations = (8.0 * cfg.lipschitz_M * core / eps ** 2) ** (ia / alpha)
        elif cfg.smooth_L is not None:
            tau_star = math.sqrt(eps / (4.0 * cfg.smooth_L))
            iterations = (math.sqrt(4.0 * cfg.smooth_L) * core / eps ** 1.5) ** (ia / alpha)
        else:
            raise ValueError("accuracy targeting needs lipschitz_M or smooth_L")

    return PlannerOutput(aq, sigma_q, mu_star, lambda_star, tau_star, R1, D_psi, iterations)


def simplex_prox_geometry(n: int, gamma: float, alpha: float) -> tuple[float, float]:
    """Conservative (R1, D_psi) for the shifted negentropy on the simplex.

    Both use the sup-over-domain form X^((1+a)/a) = ((1+a)/a) sup B(x, y);
    the Bregman suprema are attained at vertices (B is convex in each
    argument over the polytope), giving closed forms.
    """
    alpha = _check_alpha_open(alpha)
    if n < 2 or gamma <= 0:
        raise ValueError("need n >= 2 and gamma > 0")
    scale = 1.0 + gamma
    shift = gamma / n
    # sup over x, y of B(x, y): distinct vertices.
    sup_xy = scale * math.log((n + gamma) / gamma)
    # sup over x of B(x, x1) with x1 the uniform prox center: any vertex.
    un = (1.0 + gamma) / n
    sup_x1 = scale * (
        (1.0 + shift) * math.log((1.0 + shift) / un)
        + (n - 1) * shift * math.log(shift / un)
    )
    power = (1.0 + alpha) / alpha
    r1 = (power * sup_x1) ** (1.0 / power)
    d_psi = (power * sup_xy) ** (1.0 / power)
    return r1, d_psi


def ball_prox_geometry(radius: float, alpha: float) -> tuple[float, float]:
    """Conservative (R1, D_psi) for the Euclidean prox on an origin ball."""
    alpha = _check_alpha_open(alpha)
    if radius <= 0:
        raise ValueError("radius must be positive")
    power = (1.0 + alpha) / alpha
    sup_xy = 0.5 * (2.0 * radius) ** 2
    sup_x1 = 0.5 * radius ** 2
    return (power * sup_x1) ** (1.0 / power), (power * sup_xy) ** (1.0 / power)
