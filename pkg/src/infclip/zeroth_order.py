"""Gradient-free clipped mirror descent for nonlinear bandits.

Per step: sample a direction on the unit sphere, query the loss at the
perturbed point z = x + tau e, form the one-point estimator (n/tau) phi e,
clip it in q-norm, push it through the mirror map, and Bregman-project back
onto the feasible set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import simplex as smp
from .clipping import clip_vector, qnorm
from .exceptions import ProjectionFailure
from .planners import ZoConfig
from .rng import as_generator


def sample_sphere(n: int, rng) -> np.ndarray:
    """Uniform draw from the unit Euclidean sphere (normalized Gaussians)."""
    if n < 1:
        raise ValueError("dimension must be at least 1")
    gen = as_generator(rng)
    while True:
        e = gen.standard_normal(n)
        norm = float(np.linalg.norm(e))
        if norm > 0.0:  # probability-zero resample guard
            return e / norm


def one_point_gradient(loss_value: float, e: np.ndarray, tau: float, n: int | None = None) -> np.ndarray:
    """(n/tau) * observed loss * direction; the one-point feedback estimator."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    e = np.asarray(e, dtype=float)
    n = len(e) if n is None else n
    return (n / tau) * float(loss_value) * e


def smoothed_value_mc(f, x: np.ndarray, tau: float, n_samples: int, rng) -> tuple[float, float]:
    """Monte-Carlo estimate (mean, standard error) of E_e[f(x + tau e)]."""
    gen = as_generator(rng)
    x = np.asarray(x, dtype=float)
    vals = np.empty(n_samples)
    for i in range(n_samples):
        vals[i] = f(x + tau * sample_sphere(len(x), gen))
    return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n_samples))


# ---------------------------------------------------------------------------
# Prox functions: exactly two built-ins, the Euclidean ball and the
# shifted negentropy on the simplex (the pair named optimal for the simplex).


class EuclideanBallProx:
    """psi = 0.5 ||x||^2 on an origin-centered ball; mirror map is identity."""

    p = 2.0

    def __init__(self, n: int, radius: float):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.n = n
        self.radius = float(radius)

    def start_point(self) -> np.ndarray:
        return np.zeros(self.n)

    def dual_step(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        # grad psi and its conjugate are the identity, so the dual update is
        # a plain gradient step.
        return np.asarray(x, dtype=float) - np.asarray(v, dtype=float)

    def project(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        norm = float(np.linalg.norm(y))
        if norm <= self.radius:
            return y.copy()
        return y * (self.radius / norm)

    def bregman(self, x: np.ndarray, y: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return 0.5 * float(np.dot(d, d))

    def feasibility_gap(self, x: np.ndarray) -> float:
        return max(0.0, float(np.linalg.norm(x)) - self.radius)


class ShiftedNegentropySimplexProx:
    """psi = (1+gamma) sum (x_i + gamma/n) log(x_i + gamma/n) on the simplex.

    The shift keeps the gradient finite on the boundary.  The Bregman
    projection reduces to a one-dimensional waterfilling problem solved
    exactly by breakpoint sorting.
    """

    p = 1.0

    def __init__(self, n: int, gamma: float = 1e-3):
        if n < 2 or gamma <= 0:
            raise ValueError("need n >= 2 and gamma > 0")
        self.n = n
        self.gamma = float(gamma)
        self.shift = self.gamma / n
        self.scale = 1.0 + self.gamma

    def start_point(self) -> np.ndarray:
        return smp.uniform(self.n)

    def potential(self, x: np.ndarray) -> float:
        z = np.asarray(x, dtype=float) + self.shift
        return self.scale * float(np.sum(z * np.log(z)))

    def dual_step(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        # grad psi = scale*(log(x+shift)+1); its conjugate inverts the log,
        # giving a multiplicative update in the shifted coordinates.
        z = (np.asarray(x, dtype=float) + self.shift) * np.exp(-np.asarray(v, dtype=float) / self.scale)
        return z - self.shift

    def project(self, y: np.ndarray) -> np.ndarray:
        """argmin over the simplex of B(x, y).

        KKT gives x_i = max(0, (y_i + shift) t - shift) with t > 0 set by the
        sum-to-one constraint; sum x(t) is piecewise linear and increasing, so
        the breakpoints t_i = shift/(y_i + shift) localize the root exactly.
        """
        z = np.asarray(y, dtype=float) + self.shift
        if np.any(z <= 0):
            raise ProjectionFailure("dual point left the domain of the shifted entropy")
        zs = np.sort(z)[::-1]  # coordinates activate from largest z on
        prefix = np.cumsum(zs)
        ks = np.arange(1, self.n + 1)
        # With the k largest coordinates active: t = (1 + k*shift)/prefix_k;
        # keep the largest k whose k-th coordinate is really active.
        ts = (1.0 + ks * self.shift) / prefix
        active = zs * ts - self.shift > 0.0
        k = int(np.nonzero(active)[0][-1])
        t = ts[k]
        x = np.maximum(z * t - self.shift, 0.0)
        resid = abs(x.sum() - 1.0)
        if resid > 1e-10:
            raise ProjectionFailure(f"projection residual {resid:.2e} above tolerance")
        return x

    def bregman(self, x: np.ndarray, y: np.ndarray) -> float:
        zx = np.asarray(x, dtype=float) + self.shift
        zy = np.asarray(y, dtype=float) + self.shift
        return self.scale * float(np.sum(zx * np.log(zx / zy) - (zx - zy)))

    def feasibility_gap(self, x: np.ndarray) -> float:
        return smp.distance_to_simplex(x)


PROX_REGISTRY = {
    "euclidean_ball": EuclideanBallProx,
    "simplex_negentropy": ShiftedNegentropySimplexProx,
}


def make_prox(prox_id: str, n: int, **kwargs):
    try:
        factory = PROX_REGISTRY[prox_id]
    except KeyError:
        raise KeyError(f"unknown prox id {prox_id!r}; registered: {sorted(PROX_REGISTRY)}")
    return factory(n, **kwargs)


# ---------------------------------------------------------------------------
# The descent loop


@dataclass
class ZoStepInfo:
    z: np.ndarray
    loss_observed: float
    raw_norm: float
    clipped_norm: float


def zo_step(x: np.ndarray, cfg: ZoConfig, prox, query, rng) -> tuple[np.ndarray, ZoStepInfo]:
    """One clipped mirror-descent step from a single loss query.

    ``query`` maps the perturbed point z to an observed loss value.
    """
    if cfg.mu is None or cfg.lam is None:
        raise ValueError("cfg.mu and cfg.lam must be set (run the planner first)")
    x = np.asarray(x, dtype=float)
    n = len(x)
    e = sample_sphere(n, rng)
    z = x + cfg.tau * e
    phi = float(query(z))
    g = one_point_gradient(phi, e, cfg.tau, n)
    g_hat = clip_vector(g, cfg.lam, cfg.q)
    y = prox.dual_step(x, cfg.mu * g_hat)
    x_next = prox.project(y)
    if prox.feasibility_gap(x_next) > 1e-9:
        raise ProjectionFailure("iterate left the feasible set")
    return x_next, ZoStepInfo(z, phi, qnorm(g, cfg.q), qnorm(g_hat, cfg.q))


@dataclass
class ZoTrace:
    """Per-step expected losses at the query points and the competitor."""

    expected_losses: np.ndarray
    competitor_loss: float
    clipped_norms: np.ndarray

    @property
    def average_pseudo_regret(self) -> float:
        return float(self.expected_losses.mean() - self.competitor_loss)

    @property
    def regret_curve(self) -> np.ndarray:
        """Running average pseudo-regret after each step."""
        t = np.arange(1, len(self.expected_losses) + 1)
        return (np.cumsum(self.expected_losses) - t * self.competitor_loss) / t


def run_zo(cfg: ZoConfig, prox, env, competitor_point: np.ndarray, rng) -> ZoTrace:
    """Run the solver for cfg.T steps against a function environment.

    Pseudo-regret is measured at the perturbed query points z_t (what the
    algorithm returns) using the environment's known expected loss.
    """
    gen = as_generator(rng)
    u = np.asarray(competitor_point, dtype=float)
    x = prox.start_point()
    exp_losses = np.empty(cfg.T)
    clipped = np.empty(cfg.T)

    for t in range(cfg.T):
        def query(z, _t=t):
            return env.query(z, _t, gen)

        x, info = zo_step(x, cfg, prox, query, gen)
        exp_losses[t] = env.expected_loss(info.z)
        clipped[t] = info.clipped_norm

    return ZoTrace(exp_losses, float(env.expected_loss(u)), clipped)


# ---------------------------------------------------------------------------
# Smoothing-gap verification


@dataclass
class GapCheck:
    point_index: int
    gap: float
    bound: float
    passed: bool


@dataclass
class SmoothingGapReport:
    branch: str
    checks: list[GapCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def smoothing_gap_check(
    f,
    tau: float,
    n: int,
    n_samples: int,
    rng,
    lipschitz_M: float | None = None,
    smooth_L: float | None = None,
    probes: int = 20,
    probe_scale: float = 1.0,
) -> SmoothingGapReport:
    """Check |f_tau_hat(x) - f(x)| against tau*M (Lipschitz) or L*tau^2/2 (smooth).

    f_tau_hat is estimated by Monte Carlo over sphere draws; the bound gets a
    3-sigma allowance for the estimator error.
    """
    if (lipschitz_M is None) == (smooth_L is None):
        raise ValueError("give exactly one of lipschitz_M or smooth_L")
    gen = as_generator(rng)
    if lipschitz_M is not None:
        branch, theory = "lipschitz", tau * lipschitz_M
    else:
        branch, theory = "smooth", 0.5 * smooth_L * tau ** 2

    checks = []
    for i in range(probes):
        x = probe_scale * gen.standard_normal(n) / math.sqrt(n)
        est, se = smoothed_value_mc(f, x, tau, n_samples, gen)
        gap = abs(est - f(x))
        bound = theory + 3.0 * se
        checks.append(GapCheck(i, gap, bound, gap <= bound))
    return SmoothingGapReport(branch, checks)
