"""Exception hierarchy shared by all modules.

Input-type errors map to CLI exit code 2, size and conditioning errors to 3.
"""


class ZenoRankError(Exception):
    """Base class for every error raised by the package."""


class InputError(ZenoRankError, ValueError):
    """Malformed or out-of-range input."""


class DimensionMismatchError(InputError):
    pass


class NonHermitianError(InputError):
    pass


class InvalidDensityMatrixError(InputError):
    pass


class SizeLimitError(ZenoRankError):
    """Requested object exceeds the dense-storage limits."""


class ConditioningError(ZenoRankError):
    """A numerical result is too ill-conditioned to be trusted."""


class NonUniqueSteadyStateError(ConditioningError):
    """The Liouvillian null space has dimension larger than one."""

    def __init__(self, null_dim, eigenvalues=None):
        self.null_dim = null_dim
        self.eigenvalues = eigenvalues
        super().__init__(f"steady state is not unique: null-space dimension {null_dim}")


class StepSizeError(ConditioningError):
    """Explicit time integration drifted; the step is too large."""


class CollinearityError(InputError):
    """The two helix states coincide, so no rank-2 basis exists."""


class NotClosedError(ZenoRankError):
    """A candidate class leaks probability to the rest of the chain."""


class NonUniqueStationaryError(ZenoRankError):
    """The Markov chain has more than one closed class."""

    def __init__(self, classes):
        self.classes = classes
        sizes = ", ".join(str(len(c)) for c in classes)
        super().__init__(f"{len(classes)} closed classes (sizes {sizes}); stationary law not unique")


class ConditionsNotMetError(ZenoRankError):
    """Criterion conditions required for assembling the Zeno NESS fail."""
