"""Exception types raised by polarsar3d."""


class PolarSARError(Exception):
    """Base class for all library errors."""


class InvalidInputError(PolarSARError, ValueError):
    """Malformed or out-of-domain input (non-positive frequency, NaN, empty sweep...)."""


class FrameSingularityError(InvalidInputError):
    """The antenna frame is undefined: K = cos²θcos²φ + sin²φ is below the guard."""


class OutOfBandError(InvalidInputError):
    """A measurement's spatial-frequency location falls outside the k-space grid."""


class InfeasibleError(InvalidInputError):
    """A requested k-space node cannot be reached by any monostatic measurement."""


class CannotSuggestError(InvalidInputError):
    """The acquisition is too degenerate to derive a k-space grid from."""


class SizeCapError(PolarSARError):
    """A dense oracle object would exceed the configured entry cap."""


class ConditioningError(PolarSARError):
    """AA† is numerically singular (duplicate or near-duplicate samples)."""


class IdentityViolatedError(PolarSARError):
    """The diagonal AA† identity does not hold for this acquisition/grid pair."""


class FormatError(PolarSARError, ValueError):
    """A file does not follow the expected on-disk layout."""
