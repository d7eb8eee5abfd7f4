"""Array models, manifold vectors, sampling layouts and steering.

Three array models are supported:

* :class:`LinearArray` -- uniformly spaced sensors on a line; the arrival
  angle ``theta`` is measured from endfire and the coordinate origin sits
  at the array edge, so channel q responds with ``exp(i*psi*q)``,
  ``psi = 2*pi*d/lambda * cos(theta)``.
* :class:`OpenArray` -- arbitrary 3-D sensor positions with pure phase
  response ``exp(-i k0.r_q)`` to a plane wave with wavevector ``k0``.
* :class:`SphericalArray` -- rigid-sphere array processed in the
  spherical-harmonics (phase-mode) domain; its "manifold" is the length
  N+1 vector ``v_n(Theta) = b_n(kr) (2n+1)/(4*pi) P_n(cos Theta)`` where
  ``Theta`` is the angle from the look axis.

Models are immutable; all operations are pure.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import specfun
from .errors import LayoutError

__all__ = [
    "SPEED_OF_SOUND",
    "Direction",
    "angle_between",
    "LinearArray",
    "OpenArray",
    "SphericalArray",
    "WeightVector",
    "SphericalLayout",
    "SteeredSpatialWeights",
    "steer",
]

SPEED_OF_SOUND = 343.0

_ANGLE_TOL = 1e-9


@dataclass(frozen=True)
class Direction:
    """A direction on the sphere: polar angle theta, azimuth phi (radians)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not (-_ANGLE_TOL <= theta <= math.pi + _ANGLE_TOL):
            raise ValueError(f"theta={theta} outside [0, pi]")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))

    @property
    def unit_vector(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array(
            [st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)]
        )

    def antipode(self) -> "Direction":
        return Direction(math.pi - self.theta, self.phi + math.pi)

    @classmethod
    def from_degrees(cls, theta_deg: float, phi_deg: float = 0.0) -> "Direction":
        return cls(math.radians(theta_deg), math.radians(phi_deg))


def angle_between(a: Direction, b: Direction) -> float:
    """Great-circle angle between two directions, in [0, pi].

    Computed as arccos of the clipped dot product of the unit vectors;
    floating-point dot products may exceed |1| marginally, so the value
    is clamped before arccos.
    """
    dot = float(np.dot(a.unit_vector, b.unit_vector))
    return math.acos(min(1.0, max(-1.0, dot)))


def _check_theta(theta: np.ndarray):
    if np.any(theta < -_ANGLE_TOL) or np.any(theta > math.pi + _ANGLE_TOL):
        raise ValueError("arrival angle outside [0, pi]")


@dataclass(frozen=True)
class LinearArray:
    """Uniform linear array of ``num_mics`` sensors spaced ``spacing`` meters."""

    num_mics: int
    spacing: float
    frequency: float
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        if self.num_mics < 1:
            raise ValueError("need at least one sensor")
        if self.spacing <= 0 or self.frequency <= 0 or self.speed_of_sound <= 0:
            raise ValueError("spacing, frequency and sound speed must be > 0")

    @property
    def wavelength(self) -> float:
        return self.speed_of_sound / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def num_channels(self) -> int:
        return self.num_mics

    def phase_increment(self, theta) -> np.ndarray:
        """Inter-sensor phase psi = 2*pi*d/lambda * cos(theta)."""
        theta = np.asarray(theta, dtype=float)
        _check_theta(theta)
        return 2.0 * math.pi * self.spacing / self.wavelength * np.cos(theta)

    def manifold(self, theta) -> np.ndarray:
        """Manifold vector(s) for arrival angle(s) theta from endfire.

        Returns shape ``(num_mics,)`` for scalar theta, else
        ``shape(theta) + (num_mics,)``.
        """
        psi = self.phase_increment(theta)
        q = np.arange(self.num_mics)
        return np.exp(1j * np.multiply.outer(psi, q))


@dataclass(frozen=True)
class OpenArray:
    """Open (phase-only) array with arbitrary 3-D sensor positions, meters."""

    positions: np.ndarray
    frequency: float
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 3 or pos.shape[0] < 1:
            raise ValueError("positions must be an (M, 3) array")
        if self.frequency <= 0 or self.speed_of_sound <= 0:
            raise ValueError("frequency and sound speed must be > 0")
        object.__setattr__(self, "positions", pos)
        pos.setflags(write=False)

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi * self.frequency / self.speed_of_sound

    @property
    def num_channels(self) -> int:
        return self.positions.shape[0]

    def manifold_wavevector(self, k_vec) -> np.ndarray:
        """Channel responses ``exp(-i k0 . r_q)`` for plane-wave wavevector k0."""
        k_vec = np.asarray(k_vec, dtype=float)
        return np.exp(-1j * self.positions @ k_vec)

    def manifold(self, direction: Direction) -> np.ndarray:
        """Manifold for a wave arriving *from* ``direction``.

        The wave propagates along ``-u(direction)``, i.e. its wavevector is
        ``k0 = -k u``, giving entries ``exp(+i k u . r_q)``.
        """
        return self.manifold_wavevector(-self.wavenumber * direction.unit_vector)


@dataclass(frozen=True)
class SphericalArray:
    """Rigid-sphere array of given phase-mode order, parameterized by kr."""

    order: int
    kr: float

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be >= 0")
        if self.kr <= 0:
            raise ValueError("kr must be > 0")

    @classmethod
    def from_physical(
        cls,
        order: int,
        radius: float,
        frequency: float,
        speed_of_sound: float = SPEED_OF_SOUND,
    ) -> "SphericalArray":
        if radius <= 0 or frequency <= 0:
            raise ValueError("radius and frequency must be > 0")
        kr = 2.0 * math.pi * frequency * radius / speed_of_sound
        return cls(order=order, kr=kr)

    @cached_property
    def mode_strengths(self) -> np.ndarray:
        return specfun.mode_strength_spectrum(self.order, self.kr).values

    @property
    def num_channels(self) -> int:
        return self.order + 1

    def manifold(self, big_theta) -> np.ndarray:
        """Phase-mode manifold v_n(Theta) for angle(s) Theta off the look axis.

        Returns shape ``(order+1,)`` for scalar input, else
        ``shape(Theta) + (order+1,)``.
        """
        big_theta = np.asarray(big_theta, dtype=float)
        _check_theta(big_theta)
        n = np.arange(self.order + 1)
        p = specfun.legendre_p_all(self.order, np.cos(big_theta))
        scale = self.mode_strengths * (2 * n + 1) / (4.0 * math.pi)
        return np.moveaxis(p, 0, -1) * scale

    def look_manifold(self) -> np.ndarray:
        """Manifold at Theta = 0 (P_n(1) = 1 for all n)."""
        return self.manifold(0.0)


@dataclass(frozen=True)
class WeightVector:
    """Design weights with their domain tag and look direction.

    ``domain`` is ``"spatial"`` (one weight per microphone) or
    ``"phase_mode"`` (one weight per spherical-harmonic order). Real-valued
    designs are stored in a float array, so imaginary parts are exactly
    zero by construction.
    """

    values: np.ndarray
    domain: str
    look: Direction | float | None = None

    def __post_init__(self):
        if self.domain not in ("spatial", "phase_mode"):
            raise ValueError("domain must be 'spatial' or 'phase_mode'")
        values = np.asarray(self.values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("weights must be a non-empty vector")
        values = values.astype(complex) if np.iscomplexobj(values) else values.astype(float)
        object.__setattr__(self, "values", values)
        values.setflags(write=False)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SphericalLayout:
    """Sphere sampling layout: point angles plus quadrature coefficients."""

    thetas: np.ndarray
    phis: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        thetas = np.asarray(self.thetas, dtype=float)
        phis = np.asarray(self.phis, dtype=float)
        alphas = np.asarray(self.alphas, dtype=float)
        if not (thetas.shape == phis.shape == alphas.shape) or thetas.ndim != 1:
            raise LayoutError("thetas, phis, alphas must be 1-D of equal length")
        if thetas.size < 1:
            raise LayoutError("layout needs at least one point")
        if np.any(thetas < 0) or np.any(thetas > math.pi + _ANGLE_TOL):
            raise LayoutError("layout theta outside [0, pi]")
        if np.any(phis < 0) or np.any(phis >= 2 * math.pi):
            raise LayoutError("layout phi outside [0, 2*pi)")
        if np.any(alphas <= 0):
            raise LayoutError("sampling coefficients must be positive")
        for name, arr in (("thetas", thetas), ("phis", phis), ("alphas", alphas)):
            object.__setattr__(self, name, arr)
            arr.setflags(write=False)

    @property
    def num_points(self) -> int:
        return self.thetas.size

    @property
    def unit_vectors(self) -> np.ndarray:
        st = np.sin(self.thetas)
        return np.column_stack(
            [st * np.cos(self.phis), st * np.sin(self.phis), np.cos(self.thetas)]
        )

    @classmethod
    def fibonacci(cls, num_points: int) -> "SphericalLayout":
        """Nearly-uniform spherical Fibonacci layout with alpha = 4*pi/M."""
        if num_points < 1:
            raise LayoutError("need at least one point")
        i = np.arange(num_points)
        z = 1.0 - (2.0 * i + 1.0) / num_points
        thetas = np.arccos(np.clip(z, -1.0, 1.0))
        phis = np.mod(i * math.pi * (3.0 - math.sqrt(5.0)), 2.0 * math.pi)
        alphas = np.full(num_points, 4.0 * math.pi / num_points)
        return cls(thetas=thetas, phis=phis, alphas=alphas)

    @classmethod
    def gauss(cls, order: int) -> "SphericalLayout":
        """Gauss-Legendre x uniform-azimuth product layout.

        Uses ``order+1`` polar nodes and ``2*order+1`` azimuths, so the
        quadrature integrates products of two harmonics of order ``order``
        exactly (discrete orthonormality to machine precision); M is
        ``(order+1)*(2*order+1)``.
        """
        if order < 0:
            raise LayoutError("order must be >= 0")
        n_theta = order + 1
        n_phi = 2 * order + 1
        x, w = np.polynomial.legendre.leggauss(n_theta)
        th = np.arccos(x)
        ph = 2.0 * math.pi * np.arange(n_phi) / n_phi
        big_th, big_ph = np.meshgrid(th, ph, indexing="ij")
        alphas = np.repeat(w, n_phi) * (2.0 * math.pi / n_phi)
        return cls(thetas=big_th.ravel(), phis=big_ph.ravel(), alphas=alphas)

    def to_dict(self) -> dict:
        return {
            "M": int(self.num_points),
            "points": [[float(t), float(p)] for t, p in zip(self.thetas, self.phis)],
            "alpha": [float(a) for a in self.alphas],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SphericalLayout":
        required = {"M", "points", "alpha"}
        if not isinstance(data, dict):
            raise LayoutError("layout file must hold a JSON object")
        unknown = set(data) - required
        if unknown:
            raise LayoutError(f"unknown layout fields: {sorted(unknown)}")
        missing = required - set(data)
        if missing:
            raise LayoutError(f"missing layout fields: {sorted(missing)}")
        points = np.asarray(data["points"], dtype=float)
        if points.ndim != 2 or points.shape[1] != 2:
            raise LayoutError("points must be a list of [theta, phi] pairs")
        if len(points) != data["M"] or len(data["alpha"]) != data["M"]:
            raise LayoutError("M does not match points/alpha lengths")
        return cls(thetas=points[:, 0], phis=points[:, 1], alphas=np.asarray(data["alpha"]))

    @classmethod
    def load(cls, path) -> "SphericalLayout":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise LayoutError(f"invalid layout JSON: {exc}") from exc
        return cls.from_dict(data)

    def save(self, path):
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )


@dataclass(frozen=True)
class SteeredSpatialWeights:
    """Per-microphone weights obtained by steering phase-mode weights."""

    values: np.ndarray
    layout: SphericalLayout
    look: Direction
    undersampled: bool = False

    def __post_init__(self):
        values = np.asarray(self.values)
        object.__setattr__(self, "values", values)
        values.setflags(write=False)


def steer(
    d: WeightVector, look: Direction, layout: SphericalLayout
) -> SteeredSpatialWeights:
    """Steer phase-mode weights to spatial weights over a sampling layout.

    The steered weighting function is axisymmetric around the look
    direction:  ``w(Theta_i) = sum_n d_n (2n+1)/(4*pi) P_n(cos Theta_i)``
    with ``Theta_i`` the angle between layout point i and ``look``.
    Real phase-mode weights yield real spatial weights.

    Layouts with fewer than ``(N+1)**2`` points cannot resolve order N;
    a warning is emitted and the result is flagged ``undersampled``.
    """
    if d.domain != "phase_mode":
        raise ValueError("steering requires phase-mode weights")
    order = len(d) - 1
    undersampled = layout.num_points < (order + 1) ** 2
    if undersampled:
        warnings.warn(
            f"layout has {layout.num_points} points, fewer than "
            f"(N+1)^2 = {(order + 1) ** 2} needed for order {order}",
            stacklevel=2,
        )
    cos_theta = np.clip(layout.unit_vectors @ look.unit_vector, -1.0, 1.0)
    p = specfun.legendre_p_all(order, cos_theta)
    n = np.arange(order + 1)
    coeff = d.values * (2 * n + 1) / (4.0 * math.pi)
    values = np.moveaxis(p, 0, -1) @ coeff
    return SteeredSpatialWeights(
        values=values, layout=layout, look=look, undersampled=undersampled
    )
