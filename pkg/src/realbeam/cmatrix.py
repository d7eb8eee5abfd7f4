"""Quadratic-form matrices for directivity and sensitivity.

``C`` is the Hermitian matrix in the directivity denominator,
``D = |w^T b|^2 / (w^T C w*)``.  With the natural spherical weighting
(cost ``sin``) it has closed forms for linear arrays (a sinc Toeplitz
matrix) and for rigid-sphere phase-mode processing (a diagonal matrix).
Other angular cost functions reshape where sidelobe energy is penalized
and are integrated numerically.

All cost functions share one normalization: the angular weight is scaled
so that a single unit-gain sensor always yields ``C = [[1.0]]``.  The
``sin`` cost is unchanged by this scaling, so the closed forms hold
exactly, and directivity ratios across costs stay comparable.

``U`` is the diagonal phase-mode sensitivity metric
``diag(1, 3, ..., 2N+1) / M``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import toeplitz

from .errors import ConvergenceError
from .geometry import LinearArray, OpenArray, SphericalArray

__all__ = [
    "CostFunction",
    "CMatrix",
    "UMatrix",
    "c_linear",
    "c_spherical",
    "c_numeric",
    "u_matrix",
]

_HERMITIAN_TOL = 1e-12
_PSD_TOL = 1e-10
_CONVERGENCE_TOL = 1e-9

# default step-cost parameters; a 20-degree floor cone reproduces the
# characteristic low-sidelobe/uniform-spread behaviour without collapsing
# the directivity index
DEFAULT_STEP_THETA0 = math.pi / 9.0
DEFAULT_STEP_FLOOR = 0.1


@dataclass(frozen=True)
class CostFunction:
    """Nonnegative angular weight rho(Theta) on [0, pi].

    Variants: ``sin`` (natural spherical weighting), ``linear``
    (``Theta/pi``, cheap at the look direction and maximal at Theta = pi),
    ``uniform`` (1 everywhere), ``step`` (a small positive ``floor`` inside
    ``Theta < theta0``, 1 beyond), and ``custom`` (arbitrary callable).
    """

    kind: str
    theta0: float = DEFAULT_STEP_THETA0
    floor: float = DEFAULT_STEP_FLOOR
    func: Callable | None = None

    _KINDS = ("sin", "linear", "uniform", "step", "custom")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown cost kind {self.kind!r}")
        if self.kind == "step":
            if not (0.0 < self.theta0 < math.pi):
                raise ValueError("step theta0 must lie in (0, pi)")
            if self.floor <= 0.0:
                raise ValueError("step floor must be > 0")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom cost requires a callable")

    @classmethod
    def sin(cls) -> "CostFunction":
        return cls(kind="sin")

    @classmethod
    def linear(cls) -> "CostFunction":
        return cls(kind="linear")

    @classmethod
    def uniform(cls) -> "CostFunction":
        return cls(kind="uniform")

    @classmethod
    def step(
        cls, theta0: float = DEFAULT_STEP_THETA0, floor: float = DEFAULT_STEP_FLOOR
    ) -> "CostFunction":
        return cls(kind="step", theta0=theta0, floor=floor)

    @classmethod
    def custom(cls, func: Callable) -> "CostFunction":
        return cls(kind="custom", func=func)

    @classmethod
    def from_name(cls, name: str, theta0=None, floor=None) -> "CostFunction":
        if name == "step":
            kwargs = {}
            if theta0 is not None:
                kwargs["theta0"] = theta0
            if floor is not None:
                kwargs["floor"] = floor
            return cls.step(**kwargs)
        return cls(kind=name)

    def __call__(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if self.kind == "sin":
            return np.sin(theta)
        if self.kind == "linear":
            return theta / math.pi
        if self.kind == "uniform":
            return np.ones_like(theta)
        if self.kind == "step":
            return np.where(theta < self.theta0, self.floor, 1.0)
        return np.asarray(self.func(theta), dtype=float)

    def breakpoints(self) -> tuple:
        """Interior discontinuities; quadrature splits the domain there."""
        return (self.theta0,) if self.kind == "step" else ()

    def normalization(self) -> float:
        """The scale s = (1/2) * integral(rho, 0, pi); s = 1 for ``sin``."""
        if self.kind == "sin":
            return 1.0
        if self.kind == "linear":
            return math.pi / 4.0
        if self.kind == "uniform":
            return math.pi / 2.0
        if self.kind == "step":
            return 0.5 * (self.floor * self.theta0 + (math.pi - self.theta0))
        nodes, weights = _segmented_gauss(512, self.breakpoints())
        return 0.5 * float(weights @ self(nodes))


@dataclass(frozen=True)
class CMatrix:
    """Hermitian directivity-denominator matrix with its cost function."""

    entries: np.ndarray
    cost: CostFunction
    exactness: str  # "closed_form" | "quadrature"
    quadrature_order: int | None = None
    convergence_estimate: float | None = None

    def __post_init__(self):
        entries = np.asarray(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("C must be square")
        scale = max(1.0, float(np.max(np.abs(entries))))
        if np.max(np.abs(entries - entries.conj().T)) > _HERMITIAN_TOL * scale:
            raise ValueError("C must be Hermitian")
        # real part must be positive semidefinite (it is the quadratic form
        # actually minimized for real weights)
        real_part = np.real(entries)
        trace = float(np.trace(real_part))
        eigmin = float(np.linalg.eigvalsh((real_part + real_part.T) / 2.0)[0])
        if eigmin < -_PSD_TOL * max(trace, 1.0):
            raise ValueError(f"Re(C) not PSD: min eigenvalue {eigmin}")
        object.__setattr__(self, "entries", entries)
        entries.setflags(write=False)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    @property
    def real_part(self) -> np.ndarray:
        return np.ascontiguousarray(np.real(self.entries))


@dataclass(frozen=True)
class UMatrix:
    """Diagonal phase-mode sensitivity metric diag(1, 3, ..., 2N+1)/M."""

    order: int
    num_mics: int

    def __post_init__(self):
        if self.order < 0 or self.num_mics < 1:
            raise ValueError("order must be >= 0 and num_mics >= 1")

    @property
    def diagonal(self) -> np.ndarray:
        return (2.0 * np.arange(self.order + 1) + 1.0) / self.num_mics

    def as_array(self) -> np.ndarray:
        return np.diag(self.diagonal)


def u_matrix(order: int, num_mics: int) -> UMatrix:
    """Phase-mode sensitivity metric for an M-microphone order-N array."""
    return UMatrix(order=order, num_mics=num_mics)


def c_linear(num_mics: int, spacing: float, wavelength: float) -> CMatrix:
    """Closed-form C for a uniform linear array (sin cost).

    Entry (n, m) is ``sinc(2 d (n-m) / lambda)`` with the normalized
    ``sinc(x) = sin(pi x)/(pi x)``; the matrix is real, symmetric and
    Toeplitz, and reduces to the identity at half-wavelength spacing.
    """
    if num_mics < 1 or spacing <= 0 or wavelength <= 0:
        raise ValueError("num_mics >= 1 and spacing, wavelength > 0 required")
    col = np.sinc(2.0 * spacing * np.arange(num_mics) / wavelength)
    return CMatrix(entries=toeplitz(col), cost=CostFunction.sin(), exactness="closed_form")


def c_spherical(
    order: int,
    kr: float,
    cost: CostFunction | None = None,
    method: str = "auto",
    quadrature_nodes: int | None = None,
) -> CMatrix:
    """C matrix for rigid-sphere phase-mode processing.

    For the ``sin`` cost the matrix is diagonal by Legendre orthogonality,
    ``(1/4pi)^2 diag(|b_0|^2, 3 |b_1|^2, ..., (2N+1) |b_N|^2)``, returned
    in closed form.  Other costs integrate
    ``C_nm = 1/(2 s) * integral(v_n(Theta) conj(v_m(Theta)) rho(Theta))``
    by Gauss-Legendre quadrature (``s`` normalizes the cost so the sin
    case is reproduced exactly).

    ``method`` is ``"auto"`` (closed form when available), ``"closed"``,
    or ``"quadrature"``.  A node-doubling convergence check guards the
    quadrature; failure raises :class:`ConvergenceError`.
    """
    cost = cost or CostFunction.sin()
    if method not in ("auto", "closed", "quadrature"):
        raise ValueError("method must be auto, closed or quadrature")
    use_closed = cost.kind == "sin" and method != "quadrature"
    if method == "closed" and cost.kind != "sin":
        raise ValueError("closed form only exists for the sin cost")

    model = SphericalArray(order=order, kr=kr)
    if use_closed:
        n = np.arange(order + 1)
        diag = (2 * n + 1) * np.abs(model.mode_strengths) ** 2 / (4.0 * math.pi) ** 2
        return CMatrix(entries=np.diag(diag), cost=cost, exactness="closed_form")

    nodes = quadrature_nodes or 8 * (order + 1)
    entries, estimate = _converged_quadrature(
        lambda nn: _c_spherical_quad(model, cost, nn), nodes
    )
    return CMatrix(
        entries=entries,
        cost=cost,
        exactness="quadrature",
        quadrature_order=nodes,
        convergence_estimate=estimate,
    )


def c_numeric(model, cost: CostFunction | None = None, quadrature_order: int | None = None) -> CMatrix:
    """C by direct quadrature of the sphere integral for any array model.

    The angular weight ``sin(theta)`` of the natural sphere measure is
    replaced by the cost ``rho(theta)`` (polar-axis parameterization) and
    rescaled by the cost normalization.  Polar integration uses
    Gauss-Legendre (in ``cos theta`` for the sin cost, in ``theta``
    otherwise, split at cost discontinuities); azimuth uses the
    trapezoid rule on a periodic uniform grid.  Node counts default from
    the electrical aperture and are verified by a doubling check.
    """
    cost = cost or CostFunction.sin()
    if isinstance(model, SphericalArray):
        return c_spherical(model.order, model.kr, cost=cost, method="auto")
    if isinstance(model, LinearArray):
        omega = model.wavenumber * model.spacing * (model.num_mics - 1)
        n_theta = quadrature_order or max(32, int(0.7 * omega) + 24)
        entries, estimate = _converged_quadrature(
            lambda nn: _c_linear_quad(model, cost, nn), n_theta
        )
    elif isinstance(model, OpenArray):
        span = model.positions.max(axis=0) - model.positions.min(axis=0)
        omega = model.wavenumber * float(np.linalg.norm(span))
        n_theta = quadrature_order or max(24, int(0.7 * omega) + 16)
        entries, estimate = _converged_quadrature(
            lambda nn: _c_open_quad(model, cost, nn), n_theta
        )
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return CMatrix(
        entries=entries,
        cost=cost,
        exactness="quadrature",
        quadrature_order=n_theta,
        convergence_estimate=estimate,
    )


# -- quadrature internals ---------------------------------------------------


def _segmented_gauss(n_nodes: int, breakpoints: tuple, lo: float = 0.0, hi: float = math.pi):
    """Gauss-Legendre nodes/weights on [lo, hi], split at breakpoints."""
    edges = [lo, *sorted(b for b in breakpoints if lo < b < hi), hi]
    xs, ws = np.polynomial.legendre.leggauss(n_nodes)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * xs + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * ws)
    return np.concatenate(nodes), np.concatenate(weights)


def _converged_quadrature(builder, n_nodes: int):
    """Evaluate builder at n and 2n nodes; fail if entries have not settled."""
    coarse = builder(n_nodes)
    fine = builder(2 * n_nodes)
    scale = max(1.0, float(np.max(np.abs(fine))))
    estimate = float(np.max(np.abs(fine - coarse))) / scale
    if estimate > _CONVERGENCE_TOL:
        raise ConvergenceError(
            f"quadrature not converged at {n_nodes} nodes "
            f"(doubling changed entries by {estimate:.2e} relative); "
            "increase the quadrature order"
        )
    return fine, estimate


def _c_spherical_quad(model: SphericalArray, cost: CostFunction, n_nodes: int) -> np.ndarray:
    thetas, weights = _segmented_gauss(n_nodes, cost.breakpoints())
    v = model.manifold(thetas)  # (n_nodes, N+1)
    wr = weights * cost(thetas)
    c = (v.T * wr) @ v.conj()
    return c / (2.0 * cost.normalization())


def _c_linear_quad(model: LinearArray, cost: CostFunction, n_nodes: int) -> np.ndarray:
    # manifold has no azimuth dependence; the phi integral contributes 2*pi
    if cost.kind == "sin":
        x, w = np.polynomial.legendre.leggauss(n_nodes)
        thetas = np.arccos(x)
        weights = w  # already includes the sin(theta) d(theta) measure
    else:
        thetas, w = _segmented_gauss(n_nodes, cost.breakpoints())
        weights = w * cost(thetas)
    v = model.manifold(thetas)
    c = (v.T * weights) @ v.conj()
    return c / (2.0 * cost.normalization())


def _c_open_quad(model: OpenArray, cost: CostFunction, n_nodes: int) -> np.ndarray:
    if cost.kind == "sin":
        x, w_theta = np.polynomial.legendre.leggauss(n_nodes)
        thetas = np.arccos(x)
    else:
        thetas, w = _segmented_gauss(n_nodes, cost.breakpoints())
        w_theta = w * cost(thetas)
    n_phi = 2 * n_nodes
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    big_t = np.repeat(thetas, n_phi)
    big_p = np.tile(phis, thetas.size)
    st, ct = np.sin(big_t), np.cos(big_t)
    units = np.column_stack([st * np.cos(big_p), st * np.sin(big_p), ct])
    v = np.exp(1j * model.wavenumber * (units @ model.positions.T))
    weights = np.repeat(w_theta, n_phi) * (2.0 * math.pi / n_phi)
    c = (v.T * weights) @ v.conj()
    return c / (4.0 * math.pi * cost.normalization())
