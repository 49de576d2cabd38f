"""Exception hierarchy.

Property violations found by the checkers are reported as data, not raised.
The classes below cover malformed input and requests the library cannot
honour exactly.
"""


class DualVolError(Exception):
    """Base class for all library errors."""


class DomainError(DualVolError, ValueError):
    """A value lies outside the domain of an operation (negative level, non-unit direction, ...)."""


class DimensionError(DualVolError, ValueError):
    """Arguments live in incompatible dimensions."""


class ArityError(DualVolError, ValueError):
    """Wrong number of arguments for an n-ary operation."""


class UnsupportedGridError(DualVolError):
    """No exact grid exists for the requested dimension."""


class UnsupportedRotationError(DualVolError):
    """Rotation of grid-backed data by something that is not a grid symmetry."""


class RequiresGridError(DualVolError):
    """Regions cannot be refined exactly without rasterizing onto a shared grid."""


class GridMismatchError(DualVolError, ValueError):
    """Grid-backed inputs refer to different grids."""


class BudgetError(DualVolError):
    """An enumeration would exceed the configured evaluation budget."""


class DegenerateSampleError(DualVolError):
    """Every sampled tuple was unusable (e.g. all dual mixed volumes vanished)."""


class InvalidParameterError(DualVolError, ValueError):
    """A parameter combination is rejected (missing seed, centered-ball weight, ...)."""


class DescriptorError(DualVolError, ValueError):
    """A JSON descriptor failed validation.

    Attributes:
        field: Dotted path of the offending field, when known
    """

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field
