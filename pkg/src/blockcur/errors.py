"""Exception hierarchy.

Every error raised for bad caller input derives from :class:`CurError`, which
is itself a ``ValueError`` so generic handlers keep working.
"""


class CurError(ValueError):
    """Base class for all blockcur errors."""


class InvalidDimensionError(CurError):
    pass


class InvalidRankError(CurError):
    pass


class InvalidPartitionError(CurError):
    pass


class InvalidArgumentError(CurError):
    pass


class InvalidIndexError(CurError):
    pass


class InvalidShapeError(CurError):
    pass


class MatrixLoadError(CurError):
    """Raised when a matrix file is malformed; the message carries the position."""


class BudgetError(CurError):
    """Raised when an exhaustive or capped computation would exceed its budget."""
