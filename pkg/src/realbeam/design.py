"""Optimal beamformer design: maximum directivity and minimum sensitivity.

The designers solve the distortionless-response problem
``min w' C w*  s.t. |w' b| = 1`` over complex or strictly real weight
vectors.  The complex solution is the classical
``w = (C^-1 b / b^H C^-1 b)*``.  The real solution is closed-form as
well: with ``Ct = Re(C)``, the free response phase is fixed at

    phi = 0.5 * angle(b' Ct^-1 b),

the rotated-manifold real part ``c = Re(b e^{-i phi})`` becomes the
effective (real) steering vector, and ``w = Ct^-1 c / (c' Ct^-1 c)``.
The principal branch of the angle maximizes the quadratic form, so no
sign search is needed and ``Re(w' b) >= 0`` holds by construction.

Sensitivity caps are enforced through diagonal loading ``C + beta S``
with ``beta`` found by bisection on the achieved sensitivity, and the
achievable lower bounds follow from the eigenvalues of ``Re(b b^H)``
(after whitening by the metric): the real-weight bound
``T_min = 1/gamma_max`` with ``gamma_max = (b^H b + |b' b|)/2`` can never
beat the complex bound ``1/(b^H b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve, LinAlgError

from .cmatrix import CMatrix, UMatrix
from .errors import (
    ConvergenceError,
    DegenerateLookDirectionError,
    IllConditionedMatrixError,
    InfeasibleSensitivityError,
)
from .geometry import Direction, WeightVector

__all__ = [
    "DesignResult",
    "SensitivityBounds",
    "max_directivity_complex",
    "max_directivity_real",
    "bounded_sensitivity_real",
    "min_sensitivity_complex",
    "min_sensitivity_real",
    "sensitivity_bounds",
]

_MAX_CONDITION = 1e12
_DEGENERATE_TOL = 1e-14
_BISECTION_REL_TOL = 1e-6
_BISECTION_MAX_ITER = 200


class SensitivityBounds(NamedTuple):
    """Lower sensitivity bounds under the distortionless constraint.

    ``gamma_max`` and ``mu`` describe the metric-whitened manifold:
    ``mu = b^H b`` is the single nonzero eigenvalue of ``b b^H`` and
    ``gamma_max`` the largest eigenvalue of ``Re(b b^H)``.
    """

    t_min_complex: float
    t_min_real: float
    gamma_max: float
    mu: float


@dataclass(frozen=True)
class DesignResult:
    """Weights plus design diagnostics.

    ``directivity``/``directivity_index_db`` are evaluated against the
    sin-cost matrix when one is supplied (physical directivity); otherwise
    against the design matrix itself, which coincides with the physical
    value for sin-cost designs.
    """

    weights: WeightVector
    phase_phi: float | None
    beta: float
    directivity: float
    directivity_index_db: float
    sensitivity: float
    sensitivity_db: float
    bound_complex: float
    bound_real: float
    condition_number: float
    lagrange_lambda: float

    def to_json_dict(self) -> dict:
        look = self.weights.look
        if isinstance(look, Direction):
            look_out = {
                "theta_deg": math.degrees(look.theta),
                "phi_deg": math.degrees(look.phi),
            }
        elif look is None:
            look_out = None
        else:
            look_out = {"theta_deg": math.degrees(look)}
        return {
            "weights_re": [float(x) for x in np.real(self.weights.values)],
            "weights_im": [float(x) for x in np.imag(self.weights.values)],
            "weight_class": "real" if self.weights.is_real else "complex",
            "domain": self.weights.domain,
            "look": look_out,
            "phase_phi": self.phase_phi,
            "beta": self.beta,
            "directivity": self.directivity,
            "directivity_index_db": self.directivity_index_db,
            "sensitivity": self.sensitivity,
            "sensitivity_db": self.sensitivity_db,
            "bound_complex": self.bound_complex,
            "bound_real": self.bound_real,
            "condition_number": self.condition_number,
            "lagrange_lambda": self.lagrange_lambda,
        }


def _metric_diagonal(metric, size: int) -> np.ndarray:
    """Normalize a sensitivity metric (None, UMatrix, vector or matrix)."""
    if metric is None:
        return np.ones(size)
    if isinstance(metric, UMatrix):
        diag = metric.diagonal
    else:
        diag = np.asarray(metric, dtype=float)
        if diag.ndim == 2:
            diag = np.diagonal(diag).copy()
    if diag.size != size or np.any(diag <= 0):
        raise ValueError("metric must be a positive diagonal matching b")
    return diag


def _as_b(b) -> np.ndarray:
    b = np.asarray(b, dtype=complex).ravel()
    if b.size == 0 or not np.any(b != 0):
        raise ValueError("zero or empty look-direction manifold")
    return b


def _spd_solver(matrix: np.ndarray, what: str):
    """Return (solve, condition_number) for a Hermitian PD matrix.

    Diagonal matrices (phase-mode C, loaded diagonals) are inverted
    entrywise: that is exact at any dynamic range, so the conditioning
    gate is not applied.  Dense matrices go through a Cholesky
    factorization and are rejected above condition 1e12, where the solve
    would be untrustworthy.
    """
    diag = np.real(np.diagonal(matrix))
    scale = float(np.max(np.abs(matrix)))
    off = matrix - np.diag(np.diagonal(matrix))
    if scale == 0.0:
        raise IllConditionedMatrixError(f"{what} is zero")
    if float(np.max(np.abs(off))) <= 1e-14 * scale:
        if np.any(diag <= 0.0):
            raise IllConditionedMatrixError(f"{what} is not positive definite")
        cond = float(diag.max() / diag.min())
        return (lambda rhs: rhs / diag), cond
    cond = float(np.linalg.cond(matrix))
    if not np.isfinite(cond) or cond > _MAX_CONDITION:
        raise IllConditionedMatrixError(
            f"{what} has condition number {cond:.3e} (> {_MAX_CONDITION:.0e}); "
            "consider a bounded-sensitivity design with diagonal loading"
        )
    try:
        factor = cho_factor(matrix)
    except LinAlgError as exc:
        raise IllConditionedMatrixError(f"{what} is not positive definite") from exc
    return (lambda rhs: cho_solve(factor, rhs)), cond


def _real_solution(solve, b: np.ndarray):
    """Phase angle, effective steering vector and quadratic form optimum."""
    ct_inv_b = solve(b)
    phi = 0.5 * float(np.angle(b @ ct_inv_b))
    c = np.real(b * np.exp(-1j * phi))
    ct_inv_c = solve(c)
    quad = float(c @ ct_inv_c)
    return phi, c, np.real(ct_inv_c), quad


def _directivity_against(w: np.ndarray, c_dir: np.ndarray, b: np.ndarray) -> float:
    num = abs(np.dot(w, b)) ** 2
    den = float(np.real(w @ c_dir @ np.conj(w)))
    return num / den


def _pack(
    w_values,
    *,
    domain,
    look,
    phi,
    beta,
    d_value,
    t_se,
    bounds,
    cond,
    lagrange,
) -> DesignResult:
    weights = WeightVector(values=w_values, domain=domain, look=look)
    return DesignResult(
        weights=weights,
        phase_phi=phi,
        beta=beta,
        directivity=d_value,
        directivity_index_db=10.0 * math.log10(d_value),
        sensitivity=t_se,
        sensitivity_db=10.0 * math.log10(t_se),
        bound_complex=bounds.t_min_complex,
        bound_real=bounds.t_min_real,
        condition_number=cond,
        lagrange_lambda=lagrange,
    )


def sensitivity_bounds(b, metric=None) -> SensitivityBounds:
    """Lower bounds on sensitivity for complex and real weights.

    With the metric-whitened manifold ``bt``, the complex bound is
    ``1/(bt^H bt)`` and the real bound ``1/gamma_max`` with
    ``gamma_max = (bt^H bt + |bt' bt|)/2`` the top eigenvalue of
    ``Re(bt bt^H)``; the real bound is never smaller than the complex one.
    """
    b = _as_b(b)
    diag = _metric_diagonal(metric, b.size)
    bt = b / np.sqrt(diag)
    mu = float(np.real(np.vdot(bt, bt)))
    gamma_max = 0.5 * (mu + abs(bt @ bt))
    if gamma_max < _DEGENERATE_TOL:
        raise DegenerateLookDirectionError("manifold too small to constrain")
    return SensitivityBounds(
        t_min_complex=1.0 / mu,
        t_min_real=1.0 / gamma_max,
        gamma_max=gamma_max,
        mu=mu,
    )


def max_directivity_complex(
    c: CMatrix,
    b,
    *,
    metric=None,
    c_directivity: CMatrix | None = None,
    domain: str = "spatial",
    look=None,
) -> DesignResult:
    """Maximum-directivity design with unconstrained complex weights.

    ``w = (C^-1 b / b^H C^-1 b)*`` with directivity ``D = b^H C^-1 b``
    for a Hermitian positive-definite ``C``.
    """
    b = _as_b(b)
    if b.size != c.size:
        raise ValueError("dimension mismatch between C and b")
    solve, cond = _spd_solver(c.entries.astype(complex), "C")
    c_inv_b = solve(b)
    denom = float(np.real(np.vdot(b, c_inv_b)))
    w = np.conj(c_inv_b / denom)
    diag = _metric_diagonal(metric, b.size)
    t_se = float(np.real(np.vdot(w, diag * w)))
    d_value = (
        denom
        if c_directivity is None
        else _directivity_against(w, c_directivity.entries, b)
    )
    return _pack(
        w,
        domain=domain,
        look=look,
        phi=None,
        beta=0.0,
        d_value=d_value,
        t_se=t_se,
        bounds=sensitivity_bounds(b, metric),
        cond=cond,
        lagrange=-1.0 / denom,
    )


def max_directivity_real(
    c: CMatrix,
    b,
    *,
    metric=None,
    c_directivity: CMatrix | None = None,
    domain: str = "spatial",
    look=None,
) -> DesignResult:
    """Closed-form maximum-directivity design with strictly real weights."""
    b = _as_b(b)
    if b.size != c.size:
        raise ValueError("dimension mismatch between C and b")
    solve, cond = _spd_solver(c.real_part, "Re(C)")
    phi, _, ct_inv_c, quad = _real_solution(solve, b)
    if quad < _DEGENERATE_TOL:
        raise DegenerateLookDirectionError(
            "effective steering vector vanishes for this look direction; "
            "the real-weight design is infeasible without loading"
        )
    w = ct_inv_c / quad
    diag = _metric_diagonal(metric, b.size)
    t_se = float(w @ (diag * w))
    d_value = (
        quad
        if c_directivity is None
        else _directivity_against(w, c_directivity.entries, b)
    )
    return _pack(
        w,
        domain=domain,
        look=look,
        phi=phi,
        beta=0.0,
        d_value=d_value,
        t_se=t_se,
        bounds=sensitivity_bounds(b, metric),
        cond=cond,
        lagrange=-1.0 / quad,
    )


def bounded_sensitivity_real(
    c: CMatrix,
    metric,
    b,
    t0: float,
    *,
    c_directivity: CMatrix | None = None,
    domain: str = "spatial",
    look=None,
) -> DesignResult:
    """Real maximum-directivity design with sensitivity capped at ``t0``.

    If the unconstrained real design already satisfies ``w' S w <= t0`` it
    is returned unchanged (beta = 0).  Otherwise the constraint is active:
    the loaded matrix ``Re(C) + beta S`` is used and ``beta`` is found by
    bisection so the achieved sensitivity matches ``t0`` to a relative
    1e-6, checking monotonicity at every iteration.
    """
    b = _as_b(b)
    if b.size != c.size:
        raise ValueError("dimension mismatch between C and b")
    diag = _metric_diagonal(metric, b.size)
    bounds = sensitivity_bounds(b, metric)
    if t0 < bounds.t_min_real * (1.0 - 1e-12):
        raise InfeasibleSensitivityError(
            f"sensitivity cap {t0:.6g} below the real-weight lower bound "
            f"{bounds.t_min_real:.6g}"
        )
    base = max_directivity_real(
        c, b, metric=metric, c_directivity=c_directivity, domain=domain, look=look
    )
    if base.sensitivity <= t0:
        return base

    ct = c.real_part

    def design_at(beta: float):
        loaded = ct + beta * np.diag(diag)
        solve, cond = _spd_solver(loaded, "loaded Re(C)")
        phi, _, ct_inv_c, quad = _real_solution(solve, b)
        if quad < _DEGENERATE_TOL:
            raise DegenerateLookDirectionError("degenerate loaded design")
        w = ct_inv_c / quad
        return w, phi, quad, cond, float(w @ (diag * w))

    t_lo = base.sensitivity  # beta = 0
    beta_hi = 1.0
    w, phi, quad, cond, t_hi = design_at(beta_hi)
    doublings = 0
    while t_hi > t0 and doublings < 200:
        beta_hi *= 2.0
        w, phi, quad, cond, t_hi = design_at(beta_hi)
        doublings += 1
    if t_hi > t0:
        raise ConvergenceError("could not bracket the loading factor")

    beta_lo = 0.0
    beta = beta_hi
    t_mid = t_hi
    for _ in range(_BISECTION_MAX_ITER):
        beta = 0.5 * (beta_lo + beta_hi)
        w, phi, quad, cond, t_mid = design_at(beta)
        # sensitivity must stay monotone within the bracket
        if t_mid > t_lo * (1.0 + 1e-7) or t_mid < t_hi * (1.0 - 1e-7):
            raise ConvergenceError(
                "sensitivity not monotone in the loading factor"
            )
        if abs(t_mid - t0) <= _BISECTION_REL_TOL * t0:
            break
        if t_mid > t0:
            beta_lo, t_lo = beta, t_mid
        else:
            beta_hi, t_hi = beta, t_mid
    else:
        raise ConvergenceError(
            f"bisection did not converge in {_BISECTION_MAX_ITER} iterations"
        )

    d_value = _directivity_against(
        w, (c_directivity.entries if c_directivity is not None else c.entries), b
    )
    return _pack(
        w,
        domain=domain,
        look=look,
        phi=phi,
        beta=beta,
        d_value=d_value,
        t_se=t_mid,
        bounds=bounds,
        cond=cond,
        lagrange=-1.0 / quad,
    )


def min_sensitivity_complex(
    b,
    *,
    metric=None,
    c_directivity: CMatrix | None = None,
    domain: str = "spatial",
    look=None,
) -> DesignResult:
    """Minimum-sensitivity complex design ``w = b*/(b^H b)``.

    With a metric S the solution generalizes to
    ``w = (S^-1 b / (b^H S^-1 b))*`` and the achieved sensitivity equals
    the complex bound ``1/(b^H S^-1 b)`` (``1/M`` for open arrays under
    the identity metric).  Directivity is reported against
    ``c_directivity`` when given, else as the distortionless unit response.
    """
    b = _as_b(b)
    diag = _metric_diagonal(metric, b.size)
    s_inv_b = b / diag
    denom = float(np.real(np.vdot(b, s_inv_b)))
    w = np.conj(s_inv_b / denom)
    bounds = sensitivity_bounds(b, metric)
    d_value = (
        1.0
        if c_directivity is None
        else _directivity_against(w, c_directivity.entries, b)
    )
    return _pack(
        w,
        domain=domain,
        look=look,
        phi=None,
        beta=0.0,
        d_value=d_value,
        t_se=bounds.t_min_complex,
        bounds=bounds,
        cond=float(diag.max() / diag.min()),
        lagrange=-bounds.t_min_complex,
    )


def min_sensitivity_real(
    b,
    *,
    metric=None,
    c_directivity: CMatrix | None = None,
    domain: str = "spatial",
    look=None,
) -> DesignResult:
    """Minimum-sensitivity strictly real design.

    The bound ``1/gamma_max`` is achieved by the dominant eigenvector of
    ``Re(bt bt^H)`` (bt the whitened manifold), which in closed form is
    ``c/(c' c)`` with ``c = Re(bt e^{-i phi})``, ``phi = angle(bt' bt)/2``.
    """
    b = _as_b(b)
    diag = _metric_diagonal(metric, b.size)
    root = np.sqrt(diag)
    bt = b / root
    phi = 0.5 * float(np.angle(bt @ bt))
    c = np.real(bt * np.exp(-1j * phi))
    gamma = float(c @ c)
    if gamma < _DEGENERATE_TOL:
        raise DegenerateLookDirectionError("degenerate manifold for real design")
    w = (c / gamma) / root
    bounds = sensitivity_bounds(b, metric)
    d_value = (
        1.0
        if c_directivity is None
        else _directivity_against(w, c_directivity.entries, b)
    )
    return _pack(
        w,
        domain=domain,
        look=look,
        phi=phi,
        beta=0.0,
        d_value=d_value,
        t_se=float(w @ (diag * w)),
        bounds=bounds,
        cond=float(diag.max() / diag.min()),
        lagrange=-bounds.t_min_real,
    )
