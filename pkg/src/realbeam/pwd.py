"""Simulated plane-wave decomposition on a rigid-sphere array.

Pipeline: synthesize the surface pressure sampled by the microphone
layout for a unit plane wave (order-limited spherical-harmonic
synthesis, optional additive complex white noise), recover the pressure
coefficients by a least-squares spherical Fourier transform
(pseudo-inverse), then scan a beamformer over all look directions:

    y(look) = sum_nm  p_nm * d_n * Y_n^m(look)

The intensity map |y|^2 is normalized to its peak; with complex
maximum-directivity weights ``d_n = 1/b_n`` the map peaks at the true
arrival direction, while real-weighted designs add a secondary peak in
the reciprocal direction unless the design cost suppresses it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
import warnings

import numpy as np

from . import specfun
from .errors import IllConditionedMatrixError, LayoutError
from .geometry import SPEED_OF_SOUND, Direction, SphericalLayout, WeightVector

__all__ = [
    "PressureSnapshot",
    "SftResult",
    "PwdPeak",
    "PwdMap",
    "PwdScenario",
    "simulate_pressure",
    "sft_pinv",
    "pwd_map",
    "load_scenario",
    "default_scenario",
    "bundled_layout_path",
]

_COND_WARN = 1e6
_COND_ERROR = 1e12


@dataclass(frozen=True)
class PressureSnapshot:
    """Complex microphone pressures for one plane-wave scene."""

    kr: float
    pressures: np.ndarray
    true_source: Direction
    synthesis_order: int

    def __post_init__(self):
        pressures = np.asarray(self.pressures, dtype=complex)
        if not np.all(np.isfinite(pressures)):
            raise ValueError("non-finite pressure values")
        object.__setattr__(self, "pressures", pressures)
        pressures.setflags(write=False)


@dataclass(frozen=True)
class SftResult:
    """Least-squares spherical Fourier coefficients up to a given order.

    Coefficients are stored flat in (n, m) order with index n*n + n + m.
    """

    order: int
    coeffs: np.ndarray
    condition_number: float

    def coeff(self, n: int, m: int) -> complex:
        if abs(m) > n or n > self.order:
            raise ValueError("invalid (n, m)")
        return complex(self.coeffs[n * n + n + m])


@dataclass(frozen=True)
class PwdPeak:
    direction: Direction
    relative_db: float


@dataclass(frozen=True)
class PwdMap:
    """Normalized PWD intensity map over a (theta, phi) grid."""

    thetas: np.ndarray
    phis: np.ndarray
    intensity: np.ndarray  # (len(thetas), len(phis)), peak normalized to 1
    peak_direction: Direction
    secondary_peak: PwdPeak | None

    @property
    def magnitude_db(self) -> np.ndarray:
        return 10.0 * np.log10(np.maximum(self.intensity, 1e-30))


def _expand_orders(per_order: np.ndarray) -> np.ndarray:
    """Repeat an order-indexed vector across degrees m = -n..n."""
    order = per_order.size - 1
    return np.concatenate(
        [np.full(2 * n + 1, per_order[n]) for n in range(order + 1)]
    )


def simulate_pressure(
    source: Direction,
    kr: float,
    layout: SphericalLayout,
    synthesis_order: int,
    *,
    noise_snr_db: float | None = None,
    rng: np.random.Generator | None = None,
) -> PressureSnapshot:
    """Rigid-sphere surface pressure at the layout points for a plane wave.

    ``p(mic) = sum_{n <= N_sim} sum_m b_n(kr) conj(Y_n^m(source)) Y_n^m(mic)``.
    Optional complex white noise is added at the requested SNR (relative
    to the mean squared pressure magnitude).
    """
    if synthesis_order < 0:
        raise ValueError("synthesis order must be >= 0")
    modes = specfun.mode_strength_spectrum(synthesis_order, kr).values
    y_src = specfun.sph_harmonic_matrix(
        synthesis_order, np.array([source.theta]), np.array([source.phi])
    )[0]
    y_mic = specfun.sph_harmonic_matrix(synthesis_order, layout.thetas, layout.phis)
    pressures = y_mic @ (_expand_orders(modes) * np.conj(y_src))
    if noise_snr_db is not None:
        rng = rng or np.random.default_rng()
        power = float(np.mean(np.abs(pressures) ** 2))
        sigma = math.sqrt(power * 10.0 ** (-noise_snr_db / 10.0) / 2.0)
        noise = sigma * (
            rng.standard_normal(pressures.size)
            + 1j * rng.standard_normal(pressures.size)
        )
        pressures = pressures + noise
    return PressureSnapshot(
        kr=float(kr),
        pressures=pressures,
        true_source=source,
        synthesis_order=synthesis_order,
    )


def sft_pinv(
    snapshot: PressureSnapshot, layout: SphericalLayout, order: int
) -> SftResult:
    """Least-squares spherical Fourier transform of sampled pressures.

    Solves ``Y p_vec ~= p`` over the ``(order+1)**2`` spherical-harmonic
    columns.  The layout must have at least that many points; the
    transform-matrix condition number is reported, warned about above
    1e6 and rejected above 1e12.
    """
    k = (order + 1) ** 2
    if layout.num_points < k:
        raise LayoutError(
            f"layout has {layout.num_points} points but order {order} needs {k}"
        )
    if layout.num_points != snapshot.pressures.size:
        raise ValueError("snapshot and layout sizes differ")
    y = specfun.sph_harmonic_matrix(order, layout.thetas, layout.phis)
    cond = float(np.linalg.cond(y))
    if cond > _COND_ERROR:
        raise IllConditionedMatrixError(
            f"transform matrix condition {cond:.3e} exceeds {_COND_ERROR:.0e}"
        )
    if cond > _COND_WARN:
        warnings.warn(
            f"poorly conditioned spherical Fourier transform (cond {cond:.3e})",
            stacklevel=2,
        )
    coeffs, *_ = np.linalg.lstsq(y, snapshot.pressures, rcond=None)
    return SftResult(order=order, coeffs=coeffs, condition_number=cond)


def pwd_map(
    coeffs: SftResult | np.ndarray,
    d: WeightVector | np.ndarray,
    *,
    resolution_deg: float = 2.0,
    exclusion_deg: float = 30.0,
) -> PwdMap:
    """Scan phase-mode weights over all looks and map |y|^2.

    ``y(look) = sum_nm p_nm d_n Y_n^m(look)``; the map is normalized to
    its peak.  The secondary peak is the strongest local maximum at least
    ``exclusion_deg`` away from the primary (great-circle), reported with
    its level relative to the peak in dB.
    """
    d_values = d.values if isinstance(d, WeightVector) else np.asarray(d)
    order = d_values.size - 1
    p_flat = coeffs.coeffs if isinstance(coeffs, SftResult) else np.asarray(coeffs)
    if p_flat.size != (order + 1) ** 2:
        raise ValueError("coefficient count does not match weight order")

    step = math.radians(resolution_deg)
    thetas = np.linspace(0.0, math.pi, int(round(math.pi / step)) + 1)
    n_phi = int(round(2.0 * math.pi / step))
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    big_t = np.repeat(thetas, n_phi)
    big_p = np.tile(phis, thetas.size)
    y_grid = specfun.sph_harmonic_matrix(order, big_t, big_p)
    y = y_grid @ (p_flat * _expand_orders(d_values))
    intensity = (np.abs(y) ** 2).reshape(thetas.size, n_phi)
    peak_value = float(intensity.max())
    if peak_value <= 0.0:
        raise ValueError("all-zero PWD map")
    intensity = intensity / peak_value

    i_peak, j_peak = np.unravel_index(int(np.argmax(intensity)), intensity.shape)
    peak_dir = Direction(thetas[i_peak], phis[j_peak])
    secondary = _find_secondary(intensity, thetas, phis, peak_dir, exclusion_deg)
    return PwdMap(
        thetas=thetas,
        phis=phis,
        intensity=intensity,
        peak_direction=peak_dir,
        secondary_peak=secondary,
    )


def _find_secondary(intensity, thetas, phis, peak_dir, exclusion_deg):
    n_t, n_p = intensity.shape
    neighbors = []
    for dj in (-1, 0, 1):
        for dk in (-1, 0, 1):
            if dj == 0 and dk == 0:
                continue
            neighbors.append((dj, dk))
    u_peak = peak_dir.unit_vector
    best = None
    for i in range(1, n_t - 1):  # pole rows are azimuth-degenerate
        for j in range(n_p):
            val = intensity[i, j]
            is_max = True
            for dj, dk in neighbors:
                if val <= intensity[i + dj, (j + dk) % n_p]:
                    is_max = False
                    break
            if not is_max:
                continue
            cand = Direction(thetas[i], phis[j])
            sep = math.degrees(
                math.acos(min(1.0, max(-1.0, float(np.dot(cand.unit_vector, u_peak)))))
            )
            if sep < exclusion_deg:
                continue
            if best is None or val > best[0]:
                best = (val, cand)
    if best is None:
        return None
    return PwdPeak(direction=best[1], relative_db=10.0 * math.log10(best[0]))


# -- scenario files -----------------------------------------------------------


@dataclass(frozen=True)
class PwdScenario:
    """A simulated PWD scene: source, frequency, sphere and layout."""

    source: Direction
    f_hz: float
    r_m: float
    order: int
    layout: SphericalLayout
    noise_snr_db: float | None = None

    @property
    def kr(self) -> float:
        return 2.0 * math.pi * self.f_hz * self.r_m / SPEED_OF_SOUND

    @property
    def synthesis_order(self) -> int:
        return int(math.ceil(self.kr)) + 4

    def run(
        self, d: WeightVector | np.ndarray, *, resolution_deg: float = 2.0, seed=None
    ) -> PwdMap:
        rng = np.random.default_rng(seed) if self.noise_snr_db is not None else None
        snapshot = simulate_pressure(
            self.source,
            self.kr,
            self.layout,
            self.synthesis_order,
            noise_snr_db=self.noise_snr_db,
            rng=rng,
        )
        coeffs = sft_pinv(snapshot, self.layout, self.order)
        return pwd_map(coeffs, d, resolution_deg=resolution_deg)


_SCENARIO_KEYS = {"source", "f_hz", "r_m", "N", "layout_path", "noise_snr_db"}


def load_scenario(path) -> PwdScenario:
    """Load a scenario JSON file; angles are stored in degrees.

    Keys: ``source`` ([theta_deg, phi_deg]), ``f_hz``, ``r_m``, ``N``,
    ``layout_path`` (relative to the scenario file), optional
    ``noise_snr_db``.  Unknown keys are rejected.
    """
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ValueError("scenario file must hold a JSON object")
    unknown = set(data) - _SCENARIO_KEYS
    if unknown:
        raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
    missing = {"source", "f_hz", "r_m", "N", "layout_path"} - set(data)
    if missing:
        raise ValueError(f"missing scenario fields: {sorted(missing)}")
    source = data["source"]
    if not (isinstance(source, list) and len(source) == 2):
        raise ValueError("source must be [theta_deg, phi_deg]")
    layout_path = Path(data["layout_path"])
    if not layout_path.is_absolute():
        layout_path = path.parent / layout_path
    return PwdScenario(
        source=Direction.from_degrees(float(source[0]), float(source[1])),
        f_hz=float(data["f_hz"]),
        r_m=float(data["r_m"]),
        order=int(data["N"]),
        layout=SphericalLayout.load(layout_path),
        noise_snr_db=None if data.get("noise_snr_db") is None else float(data["noise_snr_db"]),
    )


def bundled_layout_path() -> Path:
    """Path of the packaged 32-point nearly-uniform layout."""
    return Path(__file__).with_name("data") / "layout32.json"


def default_scenario() -> PwdScenario:
    """The bundled demonstration scene: order 4, r = 9 cm, 2400 Hz,
    source at (100, 160) degrees, 32-microphone nearly-uniform layout."""
    return PwdScenario(
        source=Direction.from_degrees(100.0, 160.0),
        f_hz=2400.0,
        r_m=0.09,
        order=4,
        layout=SphericalLayout.load(bundled_layout_path()),
    )
