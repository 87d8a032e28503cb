"""Probability-simplex helpers shared by the mirror-descent modules."""

from __future__ import annotations

import numpy as np

FLOOR = 1e-15
SUM_TOL = 1e-9


def uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def floor_and_renormalize(x: np.ndarray) -> np.ndarray:
    """Clamp entries to the numeric floor and rescale to sum one.

    The theory keeps iterates strictly positive; floats need the guard
    because x^(q-1) overflows as x -> 0.
    """
    y = np.maximum(np.asarray(x, dtype=float), FLOOR)
    return y / y.sum()


def is_simplex_point(x: np.ndarray, sum_tol: float = SUM_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= FLOOR * (1 - 1e-12)) and abs(x.sum() - 1.0) <= sum_tol)


def euclidean_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the simplex (sort-based exact algorithm)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, len(v) + 1)
    rho = np.nonzero(u * ks > css)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def distance_to_simplex(v: np.ndarray) -> float:
    v = np.asarray(v, dtype=float)
    return float(np.linalg.norm(v - euclidean_projection(v)))
