"""Special functions for phase-mode spherical array processing.

Legendre polynomials, orthonormal complex spherical harmonics
(Condon-Shortley phase), spherical Bessel/Hankel functions with
derivatives, and the rigid-sphere mode strength b_n(kr).

Conventions
-----------
* Spherical harmonics are orthonormal over the sphere,
  ``Y_0^0 = 1/sqrt(4*pi)``, with the Condon-Shortley phase folded into
  the associated Legendre factor.
* Spherical Hankel functions are of the second kind,
  ``h_n = j_n - i*y_n``, matching a ``exp(+i*omega*t)`` time convention
  for an incident plane wave.
* Polar angle ``theta`` is measured from the +z axis, ``theta in [0, pi]``;
  azimuth ``phi in [0, 2*pi)``.

All functions are pure and safe for concurrent use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lpmv, spherical_jn, spherical_yn

from .errors import ModeStrengthUnderflowError

__all__ = [
    "legendre_p",
    "legendre_p_all",
    "sph_harmonic",
    "sph_harmonic_matrix",
    "sph_bessel",
    "sph_bessel_deriv",
    "sph_hankel2",
    "sph_hankel2_deriv",
    "mode_strength",
    "mode_strength_spectrum",
    "ModeStrengthSpectrum",
]

# i**n without complex-power roundoff
_IPOW = (1.0 + 0.0j, 0.0 + 1.0j, -1.0 + 0.0j, 0.0 - 1.0j)

_X_DOMAIN_TOL = 1e-12


def legendre_p_all(nmax: int, x) -> np.ndarray:
    """Evaluate P_0(x) .. P_nmax(x) by the three-term recurrence.

    Parameters
    ----------
    nmax : int
        Highest polynomial degree, >= 0.
    x : float or ndarray
        Argument(s) in [-1, 1] (a slack of 1e-12 is tolerated and clipped).

    Returns
    -------
    ndarray
        Shape ``(nmax+1,) + shape(x)``; row n holds P_n(x).

    Notes
    -----
    The recurrence ``(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`` is
    numerically stable on [-1, 1] and exact at the endpoints
    (P_n(1) = 1, P_n(-1) = (-1)**n).
    """
    if nmax < 0:
        raise ValueError("polynomial degree must be >= 0")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1.0 + _X_DOMAIN_TOL):
        raise ValueError("Legendre argument outside [-1, 1]")
    x = np.clip(x, -1.0, 1.0)
    out = np.empty((nmax + 1,) + x.shape, dtype=float)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = x
    for n in range(1, nmax):
        out[n + 1] = ((2 * n + 1) * x * out[n] - n * out[n - 1]) / (n + 1)
    return out


def legendre_p(n: int, x):
    """Legendre polynomial P_n(x); see :func:`legendre_p_all`."""
    values = legendre_p_all(n, x)[n]
    return float(values) if np.isscalar(x) or np.ndim(x) == 0 else values


def sph_harmonic(n: int, m: int, theta, phi):
    """Orthonormal complex spherical harmonic Y_n^m(theta, phi).

    Parameters
    ----------
    n : int
        Order, >= 0.
    m : int
        Degree, |m| <= n.
    theta, phi : float or ndarray
        Polar angle [0, pi] and azimuth [0, 2*pi), radians; broadcastable.

    Returns
    -------
    complex or ndarray of complex

    Notes
    -----
    Negative degrees are produced through
    ``Y_n^{-m} = (-1)**m * conj(Y_n^m)``, so that identity holds exactly
    as computed.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    if abs(m) > n:
        raise ValueError(f"degree |m|={abs(m)} exceeds order n={n}")
    if m < 0:
        return (-1) ** (-m) * np.conj(sph_harmonic(n, -m, theta, phi))
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    norm = math.sqrt(
        (2 * n + 1) / (4.0 * math.pi) * math.factorial(n - m) / math.factorial(n + m)
    )
    val = norm * lpmv(m, n, np.cos(theta)) * np.exp(1j * m * phi)
    return complex(val) if val.ndim == 0 else val


def sph_harmonic_matrix(order: int, theta, phi) -> np.ndarray:
    """Matrix of spherical harmonics up to ``order`` at given points.

    Columns are ordered (n, m) = (0,0), (1,-1), (1,0), (1,1), (2,-2), ...
    so column index equals ``n*n + n + m``.

    Returns
    -------
    ndarray, shape ``(len(theta), (order+1)**2)``
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    cols = [
        sph_harmonic(n, m, theta, phi)
        for n in range(order + 1)
        for m in range(-n, n + 1)
    ]
    return np.stack([np.broadcast_to(c, theta.shape) for c in cols], axis=-1)


def sph_bessel(kind: str, n: int, x: float) -> float:
    """Spherical Bessel function j_n(x) or y_n(x).

    ``kind`` is ``"j"`` (first kind) or ``"y"`` (second kind).
    ``x`` must be positive; ``j_n(0)`` is returned exactly
    (1 for n = 0, 0 otherwise), while ``y_n`` requires ``x > 0``.
    """
    _check_kind_order(kind, n)
    x = float(x)
    if kind == "j":
        if x == 0.0:
            return 1.0 if n == 0 else 0.0
        if x < 0.0:
            raise ValueError("argument must be >= 0 for j_n")
        return float(spherical_jn(n, x))
    if x <= 0.0:
        raise ValueError("argument must be > 0 for y_n")
    return float(spherical_yn(n, x))


def sph_bessel_deriv(kind: str, n: int, x: float) -> float:
    """Derivative of the spherical Bessel function of given kind.

    Uses the recurrence identity ``f_n'(x) = f_{n-1}(x) - (n+1)/x * f_n(x)``
    rather than finite differences. Requires ``x > 0``.
    """
    _check_kind_order(kind, n)
    x = float(x)
    if x <= 0.0:
        raise ValueError("argument must be > 0 for derivatives")
    fn = spherical_jn if kind == "j" else spherical_yn
    return float(fn(n, x, derivative=True))


def sph_hankel2(n: int, x: float) -> complex:
    """Spherical Hankel function of the second kind, h_n = j_n - i*y_n."""
    return complex(sph_bessel("j", n, x), -sph_bessel("y", n, x))


def sph_hankel2_deriv(n: int, x: float) -> complex:
    """Derivative of the second-kind spherical Hankel function."""
    return complex(sph_bessel_deriv("j", n, x), -sph_bessel_deriv("y", n, x))


def mode_strength(n: int, kr: float) -> complex:
    """Rigid-sphere mode strength b_n(kr) for an incident plane wave.

    ``b_n(kr) = 4*pi * i**n * (j_n(kr) - j_n'(kr)/h_n'(kr) * h_n(kr))``
    with h_n the second-kind spherical Hankel function.

    Parameters
    ----------
    n : int
        Harmonic order, >= 0.
    kr : float
        Product of wavenumber and sphere radius, > 0.

    Raises
    ------
    ModeStrengthUnderflowError
        If ``h_n'(kr)`` underflows to exactly zero or is non-finite, so the
        scattering ratio cannot be formed.
    """
    if n < 0:
        raise ValueError("order must be >= 0")
    if kr <= 0.0:
        raise ValueError("kr must be > 0")
    jn = sph_bessel("j", n, kr)
    jp = sph_bessel_deriv("j", n, kr)
    hn = sph_hankel2(n, kr)
    hp = sph_hankel2_deriv(n, kr)
    if hp == 0 or not np.isfinite(hp):
        raise ModeStrengthUnderflowError(
            f"h_{n}'({kr}) is {hp}; mode strength not representable"
        )
    return 4.0 * math.pi * _IPOW[n % 4] * (jn - jp / hp * hn)


@dataclass(frozen=True)
class ModeStrengthSpectrum:
    """Mode strengths b_0 .. b_N of a rigid sphere at a single kr."""

    order: int
    kr: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.order + 1,):
            raise ValueError("spectrum length must be order + 1")
        if not np.all(np.isfinite(values)):
            raise ModeStrengthUnderflowError("non-finite mode strength value")
        object.__setattr__(self, "values", values)
        values.setflags(write=False)


def mode_strength_spectrum(order: int, kr: float) -> ModeStrengthSpectrum:
    """Evaluate b_n(kr) for n = 0 .. order; see :func:`mode_strength`."""
    if order < 0:
        raise ValueError("order must be >= 0")
    values = np.array([mode_strength(n, kr) for n in range(order + 1)])
    return ModeStrengthSpectrum(order=order, kr=float(kr), values=values)


def _check_kind_order(kind: str, n: int):
    if kind not in ("j", "y"):
        raise ValueError("kind must be 'j' or 'y'")
    if n < 0:
        raise ValueError("order must be >= 0")
