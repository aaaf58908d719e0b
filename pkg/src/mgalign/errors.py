"""Exception hierarchy shared across the package."""


class MgalignError(Exception):
    """Base class for all package errors."""


class EmptyInput(MgalignError):
    """An operation received an empty collection where data is required."""


class ShapeError(MgalignError):
    """Array dimensions disagree with what the operation requires."""


class InvalidK(MgalignError):
    """Neighbor count k is out of range for the given node count."""


class DegenerateVector(MgalignError):
    """A zero-norm vector was passed where cosine distance is requested."""


class TooLarge(MgalignError):
    """Instance exceeds the exact solver's enumeration bound."""


class SizeMismatch(MgalignError):
    """Graph distance requested between graphs of unequal node counts."""


class InvalidScale(MgalignError):
    """Noise scale must be strictly positive."""


class InvalidParameter(MgalignError):
    """A numeric parameter lies outside its admissible interval."""


class GenerationError(MgalignError):
    """Synthetic data generation could not satisfy its constraints."""


class TrainingDiverged(MgalignError):
    """Training produced non-finite parameters."""


class FormatError(MgalignError):
    """A file does not conform to its documented on-disk format."""
