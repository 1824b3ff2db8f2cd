"""Exception types shared across the package."""


class AnhoscError(Exception):
    """Base class for package-specific failures."""


class AccuracyError(AnhoscError):
    """A numerical routine could not reach the requested tolerance.

    Carries the achieved error estimate so callers (and the CLI) can report
    how far off the result is instead of silently returning garbage.
    """

    def __init__(self, message, achieved=None, required=None):
        super().__init__(message)
        self.achieved = achieved
        self.required = required


class SingularFrequencyError(AnhoscError):
    """Continuum formulas evaluated at (or past) a trigonometric singularity.

    On the negative-frequency branch the propagator degenerates when
    |gamma|*beta hits a multiple of pi.
    """


class SingularLatticeError(AnhoscError):
    """Finite-N formulas hit a degenerate lattice (omega_i = 0, 4*sigma^2 >= 1, ...)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
