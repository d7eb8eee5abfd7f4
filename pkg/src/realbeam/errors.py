"""Exception types shared across the package."""


class BeamformerError(Exception):
    """Base class for all realbeam-specific errors."""


class IllConditionedMatrixError(BeamformerError):
    """The matrix to be inverted is singular or too ill-conditioned."""


class DegenerateLookDirectionError(BeamformerError):
    """The real-weight design is degenerate (c ~ 0) for this look direction.

    Raised instead of silently regularizing; a bounded-sensitivity design
    with diagonal loading may still be feasible.
    """


class InfeasibleSensitivityError(BeamformerError):
    """The requested sensitivity cap lies below the achievable lower bound."""


class ConvergenceError(BeamformerError):
    """An iterative procedure (quadrature refinement, bisection) failed."""


class ModeStrengthUnderflowError(BeamformerError):
    """The radial-function denominator underflowed; b_n cannot be evaluated."""


class LayoutError(ValueError, BeamformerError):
    """A spherical sampling layout file or object is invalid."""
