"""realbeam: real-weighted maximum-directivity beamformer design.

Closed-form maximum-directivity and minimum-sensitivity beamformers with
strictly real weights (alongside the classical complex solutions) for
uniform linear arrays, generic open 3-D arrays and rigid-sphere
phase-mode arrays, plus beampattern/performance analysis and a simulated
plane-wave-decomposition pipeline.
"""

__version__ = "0.1.0"

from .analysis import (
    BeampatternGrid,
    BeampatternMap,
    LobeReport,
    beampattern,
    directivity,
    lobe_analysis,
    sensitivity,
)
from .cmatrix import CMatrix, CostFunction, UMatrix, c_linear, c_numeric, c_spherical, u_matrix
from .design import (
    DesignResult,
    SensitivityBounds,
    bounded_sensitivity_real,
    max_directivity_complex,
    max_directivity_real,
    min_sensitivity_complex,
    min_sensitivity_real,
    sensitivity_bounds,
)
from .errors import (
    BeamformerError,
    ConvergenceError,
    DegenerateLookDirectionError,
    IllConditionedMatrixError,
    InfeasibleSensitivityError,
    LayoutError,
    ModeStrengthUnderflowError,
)
from .geometry import (
    SPEED_OF_SOUND,
    Direction,
    LinearArray,
    OpenArray,
    SphericalArray,
    SphericalLayout,
    SteeredSpatialWeights,
    WeightVector,
    angle_between,
    steer,
)
from .pwd import (
    PressureSnapshot,
    PwdMap,
    PwdScenario,
    SftResult,
    default_scenario,
    load_scenario,
    pwd_map,
    sft_pinv,
    simulate_pressure,
)
from .specfun import (
    ModeStrengthSpectrum,
    legendre_p,
    legendre_p_all,
    mode_strength,
    mode_strength_spectrum,
    sph_bessel,
    sph_bessel_deriv,
    sph_harmonic,
    sph_harmonic_matrix,
)

__all__ = [name for name in dir() if not name.startswith("_")]
