"""Tsallis-entropy mirror map and the implicit-normalization descent step.

The update minimizes, over the simplex,

    mu <x, g> - (1/(1-q)) sum x_i^q + (q/(1-q)) sum x_prev_i^(q-1) x_i

whose KKT form is x_i(nu) = [x_prev_i^(q-1) + ((1-q)/q)(mu g_i + nu)]^(1/(q-1))
with the dual multiplier nu chosen so the coordinates sum to one.  The
normalizer has no closed form, hence "implicitly normalized".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import simplex
from .exceptions import RootBracketFailure

_RESIDUAL_TOL = 1e-13
_MAX_NEWTON = 200
_SCALAR_MAX_N = 32


@dataclass(frozen=True)
class TsallisConfig:
    """Mirror-map parameters: q strictly inside (0, 1), stepsize mu > 0.

    The q = 1 negentropy limit is out of scope; q = 1/2 is the default the
    linear-bandit analysis specializes to.
    """

    mu: float
    q: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie strictly inside (0, 1), got {self.q}")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ValueError(f"mu must be finite and positive, got {self.mu}")


@dataclass
class StepSolveDiagnostics:
    """Dual multiplier, iteration count and normalization residual."""

    nu: float
    iterations: int
    residual: float


def tsallis_potential(x: np.ndarray, q: float) -> float:
    """psi_q(x) = (1/(1-q)) (1 - sum x_i^q)."""
    x = np.asarray(x, dtype=float)
    return float((1.0 - np.sum(x ** q)) / (1.0 - q))


def tsallis_gradient(y: np.ndarray, q: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return -q * y ** (q - 1.0) / (1.0 - q)


def bregman_divergence(x: np.ndarray, y: np.ndarray, q: float) -> float:
    """B_psi(x, y) = psi(x) - psi(y) - <grad psi(y), x - y>; nonnegative."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(
        tsallis_potential(x, q)
        - tsallis_potential(y, q)
        - tsallis_gradient(y, q) @ (x - y)
    )


def step_objective(x: np.ndarray, x_prev: np.ndarray, g: np.ndarray, cfg: TsallisConfig) -> float:
    """The descent-step objective; exposed for oracle comparisons."""
    x = np.asarray(x, dtype=float)
    q = cfg.q
    return float(
        cfg.mu * (x @ g)
        - np.sum(x ** q) / (1.0 - q)
        + (q / (1.0 - q)) * (x @ (np.asarray(x_prev, dtype=float) ** (q - 1.0)))
    )


def omd_step(x_prev: np.ndarray, g_hat, cfg: TsallisConfig):
    """One implicitly normalized descent step.

    Returns (next point, diagnostics).  The dual root is found by monotone
    Newton from the left: sum_i x_i(nu) is convex and strictly decreasing in
    nu, so starting where the sum is >= 1 each tangent step stays left of the
    root and the iteration converges monotonically.  A safeguarded bisection
    picks up the (unreached in practice) case where Newton stalls.
    """
    x_prev = np.asarray(x_prev, dtype=float)
    g = np.asarray(getattr(g_hat, "values", g_hat), dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient estimate must be finite")
    q = cfg.q
    e = 1.0 / (q - 1.0)
    c = (1.0 - q) / q
    w = x_prev ** (q - 1.0) + c * cfg.mu * g

    if len(w) <= _SCALAR_MAX_N:
        nu, iters, resid = _newton_scalar(list(w), c, e)
    else:
        nu, iters, resid = _newton_vector(w, c, e)

    if nu is None:
        nu, iters, resid = _bisect_fallback(w, c, e)

    b = w + c * nu
    x_next = b ** e
    x_next /= x_next.sum()
    return simplex.floor_and_renormalize(x_next), StepSolveDiagnostics(nu, iters, abs(resid))


def _newton_scalar(w, c, e):
    wmin = min(w)
    nu = (1.0 - wmin) / c
    for it in range(1, _MAX_NEWTON + 1):
        s = 0.0
        sp = 0.0
        for wi in w:
            b = wi + c * nu
            xb = b ** e
            s += xb
            sp += xb / b
        sp *= c * e
        diff = s - 1.0
        if diff <= _RESIDUAL_TOL:
            return nu, it, diff
        nu += diff / (-sp)
    return None, _MAX_NEWTON, float("nan")


def _newton_vector(w, c, e):
    wmin = float(w.min())
    nu = (1.0 - wmin) / c
    for it in range(1, _MAX_NEWTON + 1):
        b = w + c * nu
        xb = b ** e
        s = float(xb.sum())
        diff = s - 1.0
        if diff <= _RESIDUAL_TOL:
            return nu, it, diff
        sp = c * e * float((xb / b).sum())
        nu += diff / (-sp)
    return None, _MAX_NEWTON, float("nan")


def _bisect_fallback(w, c, e):
    w = np.asarray(w, dtype=float)
    wmin = float(w.min())

    def total(nu):
        return float(np.sum((w + c * nu) ** e))

    lo = (1.0 - wmin) / c
    if total(lo) < 1.0:
        raise RootBracketFailure("left edge of the dual bracket already below one")
    hi, step = lo, max(1.0, abs(lo))
    for _ in range(200):
        hi = hi + step
        step *= 2.0
        if total(hi) < 1.0:
            break
    else:
        raise RootBracketFailure("could not bracket the dual multiplier")
    for it in range(200):
        mid = 0.5 * (lo + hi)
        if total(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, abs(mid)):
            break
    nu = 0.5 * (lo + hi)
    # Two Newton polish steps from the bisection estimate.
    for _ in range(2):
        b = w + c * nu
        xb = b ** e
        diff = float(xb.sum()) - 1.0
        sp = c * e * float((xb / b).sum())
        nu += diff / (-sp)
    resid = total(nu) - 1.0
    if abs(resid) > 1e-12:
        raise RootBracketFailure(f"dual residual {resid:.2e} above tolerance")
    return nu, it + 1, resid
