"""Exception types raised by the special-function and verification layers."""


class GammaKernelError(ArithmeticError):
    """Base class for numerical failures in this package."""


class PoleProximityError(GammaKernelError):
    """A denominator came within ``pole_guard`` of zero.

    Callers that sample points (the verification harness) catch this and
    resample instead of trying to subtract the pole.
    """


class ContinuationError(GammaKernelError):
    """The hyperbolic continuation ladder needed too many steps."""


class MagnitudeOverflowError(GammaKernelError):
    """|Im z| is so large that the product form leaves the float range."""


class DivergenceError(GammaKernelError, ValueError):
    """A nome parameter has modulus >= 1, so the product diverges."""


class ChamberError(ValueError):
    """Point is not strictly ordered inside the real Weyl chamber."""


class SamplingExhaustedError(GammaKernelError):
    """Rejection sampling could not find an admissible point."""
