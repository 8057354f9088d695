"""Exception hierarchy.

The CLI maps these onto exit codes: ConfigError -> 1, file/IO problems
(FileFormatError, OSError) -> 2, validation and numerical failures -> 3.
"""


class ChainFactorError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ChainFactorError):
    """Invalid experiment configuration (bad keys, out-of-range values)."""


class FileFormatError(ChainFactorError):
    """Chain file cannot be parsed (bad JSON/CSV structure, missing fields)."""


class ValidationError(ChainFactorError):
    """A constructed or loaded object violates a structural invariant."""


class RowSumError(ValidationError):
    """A transition-matrix row does not sum to one."""


class StationarityError(ValidationError):
    """The attached distribution is not stationary for the matrix."""


class NumericalError(ChainFactorError):
    """A computation cannot proceed (infinite divergences, unbounded step bound)."""


class IndeterminateGapError(NumericalError):
    """Both sides of an identity are infinite; their difference is undefined."""
