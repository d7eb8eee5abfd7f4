"""Shared test helpers."""

import numpy as np
from scipy import optimize


def brute_force_real_directivity(c_real, b, rng, restarts=24):
    """Best directivity over real weight vectors by random-restart search.

    Independent oracle: maximizes the scale-invariant Rayleigh ratio
    |w'b|^2 / (w' C w) directly with Nelder-Mead from random starts,
    never using the closed-form solution.
    """
    c_real = np.asarray(c_real, dtype=float)
    b = np.asarray(b, dtype=complex)

    def neg_ratio(w):
        denom = float(w @ c_real @ w)
        if denom <= 0:
            return np.inf
        return -abs(np.dot(w, b)) ** 2 / denom

    best = 0.0
    for _ in range(restarts):
        w0 = rng.standard_normal(b.size)
        res = optimize.minimize(
            neg_ratio,
            w0,
            method="Nelder-Mead",
            options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 8000},
        )
        best = max(best, -res.fun)
    return best


def rotation_matrix(axis, angle):
    """Rodrigues rotation matrix around a unit axis."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def unit_to_angles(u):
    """Spherical angles (theta, phi) of a unit vector."""
    theta = float(np.arccos(np.clip(u[2], -1.0, 1.0)))
    phi = float(np.mod(np.arctan2(u[1], u[0]), 2.0 * np.pi))
    return theta, phi
