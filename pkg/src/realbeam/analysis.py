"""Beampattern evaluation, performance measures and lobe analysis.

Beampatterns are sampled on dense angular grids, normalized to the
look-direction response (0 dB at the look direction for distortionless
designs).  Lobe analysis locates the mainlobe null-to-null interval, the
highest genuine sidelobe, and any parasitic lobe -- a non-mainlobe local
maximum whose level reaches within 0.5 dB of the mainlobe, the signature
of real-weighted open-geometry designs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .cmatrix import CMatrix, UMatrix
from .geometry import (
    Direction,
    LinearArray,
    OpenArray,
    SphericalArray,
    WeightVector,
)

__all__ = [
    "DB_FLOOR",
    "BeampatternGrid",
    "BeampatternMap",
    "LobeReport",
    "ParasiticLobe",
    "beampattern",
    "directivity",
    "sensitivity",
    "lobe_analysis",
    "write_pattern_csv",
    "write_map_csv",
]

DB_FLOOR = -200.0
_PLATEAU_EPS = 1e-12


class Directivity(NamedTuple):
    d: float
    di_db: float


class Sensitivity(NamedTuple):
    t_se: float
    t_se_db: float


@dataclass(frozen=True)
class BeampatternGrid:
    """1-D beampattern samples over angle.

    ``kind`` is ``"theta"`` for linear arrays (arrival angle from endfire)
    or ``"big_theta"`` for axisymmetric phase-mode patterns (angle from
    the look axis).  ``magnitude_db`` is normalized to the look-direction
    response and floored at ``DB_FLOOR``.
    """

    angles: np.ndarray
    response: np.ndarray
    magnitude_db: np.ndarray
    look_angle: float
    kind: str

    @property
    def resolution(self) -> float:
        return float(np.max(np.diff(self.angles)))


@dataclass(frozen=True)
class BeampatternMap:
    """Full-sphere beampattern on a (theta, phi) product grid."""

    thetas: np.ndarray
    phis: np.ndarray
    magnitude_db: np.ndarray  # shape (len(thetas), len(phis))
    look: Direction


def _grid_with(points, lo, hi, resolution_rad):
    n = int(round((hi - lo) / resolution_rad)) + 1
    grid = np.linspace(lo, hi, n)
    extra = [p for p in points if lo <= p <= hi]
    return np.unique(np.concatenate([grid, np.asarray(extra)]))


def beampattern(w: WeightVector, model, resolution_deg: float | None = None):
    """Sample B = w^T v over a dense angular grid, normalized to the look.

    For :class:`LinearArray` the grid covers theta in [0, pi] and includes
    the look angle and its mirror exactly; for :class:`SphericalArray` it
    covers Theta in [0, pi].  Both default to 0.05 degree resolution.
    :class:`OpenArray` models produce a full-sphere
    :class:`BeampatternMap` (default 2 degrees).
    """
    res = math.radians(resolution_deg if resolution_deg is not None else 0.05)
    if isinstance(model, LinearArray):
        if w.domain != "spatial" or len(w) != model.num_channels:
            raise ValueError("weights do not match the linear model")
        if isinstance(w.look, (int, float)):
            look = float(w.look)
        else:
            look = getattr(w.look, "theta", None)
        if look is None:
            raise ValueError("linear beampattern needs the look angle on the weights")
        angles = _grid_with([look, math.pi - look], 0.0, math.pi, res)
        response = model.manifold(angles) @ w.values
        b_look = model.manifold(look) @ w.values
        return _make_grid(angles, response, b_look, look, "theta")
    if isinstance(model, SphericalArray):
        if w.domain != "phase_mode" or len(w) != model.num_channels:
            raise ValueError("weights do not match the phase-mode model")
        angles = _grid_with([], 0.0, math.pi, res)
        response = model.manifold(angles) @ w.values
        b_look = model.look_manifold() @ w.values
        return _make_grid(angles, response, b_look, 0.0, "big_theta")
    if isinstance(model, OpenArray):
        if w.domain != "spatial" or len(w) != model.num_channels:
            raise ValueError("weights do not match the open model")
        if not isinstance(w.look, Direction):
            raise ValueError("open-array beampattern needs a look Direction")
        res = math.radians(resolution_deg if resolution_deg is not None else 2.0)
        thetas = _grid_with([w.look.theta], 0.0, math.pi, res)
        phis = np.arange(0.0, 2.0 * math.pi - 1e-12, res)
        big_t = np.repeat(thetas, phis.size)
        big_p = np.tile(phis, thetas.size)
        st = np.sin(big_t)
        units = np.column_stack([st * np.cos(big_p), st * np.sin(big_p), np.cos(big_t)])
        v = np.exp(1j * model.wavenumber * (units @ model.positions.T))
        response = (v @ w.values).reshape(thetas.size, phis.size)
        b_look = model.manifold(w.look) @ w.values
        mag = _to_db(response, b_look)
        return BeampatternMap(thetas=thetas, phis=phis, magnitude_db=mag, look=w.look)
    raise TypeError(f"unsupported model type {type(model).__name__}")


def _to_db(response, b_look):
    ref = abs(complex(b_look))
    if ref == 0.0:
        raise ValueError("zero look-direction response; cannot normalize")
    floor_ratio = 10.0 ** (DB_FLOOR / 20.0)
    ratio = np.maximum(np.abs(response) / ref, floor_ratio)
    return 20.0 * np.log10(ratio)


def _make_grid(angles, response, b_look, look_angle, kind):
    return BeampatternGrid(
        angles=angles,
        response=response,
        magnitude_db=_to_db(response, b_look),
        look_angle=look_angle,
        kind=kind,
    )


def directivity(w: WeightVector, c_sin: CMatrix, b: np.ndarray) -> Directivity:
    """Directivity D = |w^T b|^2 / (w^T C w*) and its index in dB.

    ``c_sin`` must carry the ``sin`` cost: directivity is a fixed physical
    measure regardless of the cost used to design the weights.
    """
    if c_sin.cost.kind != "sin":
        raise ValueError("directivity must be computed with the sin-cost C")
    v = w.values
    if v.size != c_sin.size or v.size != np.asarray(b).size:
        raise ValueError("dimension mismatch between weights, C and b")
    num = abs(np.dot(v, b)) ** 2
    den = float(np.real(v @ c_sin.entries @ v.conj()))
    if den <= 0.0:
        raise ValueError("non-positive directivity denominator")
    d = num / den
    return Directivity(d=d, di_db=10.0 * math.log10(d))


def sensitivity(w: WeightVector, metric: UMatrix | np.ndarray | None = None) -> Sensitivity:
    """Squared weight norm w^H S w (S identity, a diagonal, or U)."""
    v = w.values
    if metric is None:
        t = float(np.real(np.vdot(v, v)))
    else:
        diag = metric.diagonal if isinstance(metric, UMatrix) else np.asarray(metric)
        if diag.ndim == 2:
            diag = np.diagonal(diag)
        if diag.size != v.size:
            raise ValueError("metric dimension mismatch")
        t = float(np.real(np.vdot(v, diag * v)))
    return Sensitivity(t_se=t, t_se_db=10.0 * math.log10(t))


@dataclass(frozen=True)
class ParasiticLobe:
    angle: float
    level_db: float


@dataclass(frozen=True)
class LobeReport:
    """Mainlobe width, highest genuine sidelobe, and parasitic-lobe flag."""

    mainlobe_width_null_to_null: float
    sidelobe_level_db: float | None
    sidelobe_angle: float | None
    parasitic_lobe: ParasiticLobe | None

    def to_json_dict(self) -> dict:
        return {
            "mainlobe_width_null_to_null_deg": math.degrees(
                self.mainlobe_width_null_to_null
            ),
            "sidelobe_level_db": self.sidelobe_level_db,
            "sidelobe_angle_deg": None
            if self.sidelobe_angle is None
            else math.degrees(self.sidelobe_angle),
            "parasitic_lobe": None
            if self.parasitic_lobe is None
            else {
                "angle_deg": math.degrees(self.parasitic_lobe.angle),
                "level_db": self.parasitic_lobe.level_db,
            },
        }


def _walk_to_minimum(values, start, step):
    """Index of the first strict local minimum from start in direction step."""
    i = start
    n = len(values)
    while 0 <= i + step < n and values[i + step] <= values[i] + _PLATEAU_EPS:
        i += step
    return i


def _local_maxima(values):
    idx = []
    n = len(values)
    for i in range(n):
        left_ok = i == 0 or values[i] > values[i - 1] + _PLATEAU_EPS
        right_ok = i == n - 1 or values[i] > values[i + 1] + _PLATEAU_EPS
        if left_ok and right_ok:
            idx.append(i)
    return idx


def lobe_analysis(grid: BeampatternGrid, look_angle: float | None = None) -> LobeReport:
    """Locate mainlobe bounds, sidelobe level, and any parasitic lobe.

    The mainlobe is bounded by the first strict local minima on each side
    of the look direction (domain edges count as bounds); its null-to-null
    width is the bound separation, mirrored when the look sits on a domain
    edge.  The sidelobe level is the highest local maximum outside the
    mainlobe and outside any parasitic lobe's own interval.  A parasitic
    lobe is reported when a non-mainlobe local maximum reaches within
    0.5 dB of 0 dB.
    """
    if grid.resolution > math.radians(0.1) + 1e-12:
        raise ValueError("grid too coarse for lobe analysis (need <= 0.1 deg)")
    look = grid.look_angle if look_angle is None else look_angle
    db = grid.magnitude_db
    angles = grid.angles
    i_look = int(np.argmin(np.abs(angles - look)))
    # climb to the lobe apex first in case the pattern peaks slightly off look
    while i_look + 1 < len(db) and db[i_look + 1] > db[i_look]:
        i_look += 1
    while i_look - 1 >= 0 and db[i_look - 1] > db[i_look]:
        i_look -= 1
    left = _walk_to_minimum(db, i_look, -1)
    right = _walk_to_minimum(db, i_look, +1)
    if left == 0 and angles[i_look] - angles[0] < 1e-12:
        width = 2.0 * (angles[right] - angles[i_look])
    elif right == len(db) - 1 and angles[-1] - angles[i_look] < 1e-12:
        width = 2.0 * (angles[i_look] - angles[left])
    else:
        width = angles[right] - angles[left]

    outside = [i for i in _local_maxima(db) if i < left or i > right]
    parasitic = None
    excluded = set(range(left, right + 1))
    candidates = sorted(outside, key=lambda i: db[i], reverse=True)
    if candidates and db[candidates[0]] >= -0.5:
        ip = candidates[0]
        parasitic = ParasiticLobe(angle=float(angles[ip]), level_db=float(db[ip]))
        p_left = _walk_to_minimum(db, ip, -1)
        p_right = _walk_to_minimum(db, ip, +1)
        excluded.update(range(p_left, p_right + 1))

    remaining = [i for i in outside if i not in excluded]
    if remaining:
        i_best = max(remaining, key=lambda i: db[i])
        side_level, side_angle = float(db[i_best]), float(angles[i_best])
    else:
        side_level = side_angle = None
    return LobeReport(
        mainlobe_width_null_to_null=float(width),
        sidelobe_level_db=side_level,
        sidelobe_angle=side_angle,
        parasitic_lobe=parasitic,
    )


# -- delimited output --------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_pattern_csv(grid: BeampatternGrid, path):
    """Write a 1-D pattern as ``angle_deg,re,im,mag_db`` (UTF-8, LF)."""
    lines = ["angle_deg,re,im,mag_db"]
    for ang, resp, db in zip(grid.angles, grid.response, grid.magnitude_db):
        lines.append(
            ",".join(
                [_fmt(math.degrees(ang)), _fmt(resp.real), _fmt(resp.imag), _fmt(db)]
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_map_csv(thetas, phis, magnitude_db, path):
    """Write a full-sphere map as ``theta_deg,phi_deg,mag_db`` (UTF-8, LF)."""
    lines = ["theta_deg,phi_deg,mag_db"]
    for i, th in enumerate(thetas):
        for j, ph in enumerate(phis):
            lines.append(
                ",".join(
                    [_fmt(math.degrees(th)), _fmt(math.degrees(ph)), _fmt(magnitude_db[i, j])]
                )
            )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
