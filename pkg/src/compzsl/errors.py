"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes (config 2, data 3, numeric 4,
tolerance 5); library callers catch them directly.
"""


class CompzslError(Exception):
    """Base class for all package errors."""


class ConfigError(CompzslError):
    """Invalid run configuration: unknown keys, bad types, bad ranges."""


class DataError(CompzslError):
    """Invalid dataset content: bad indices, split overlap, malformed packs."""


class NumericError(CompzslError):
    """Numeric contract violation: non-finite values, bad optimizer input."""


class DimensionError(NumericError):
    """Shape mismatch between tensors; the message names both shapes."""


class DeterminismError(NumericError):
    """Two evaluations of a supposedly deterministic function disagreed."""


class ToleranceError(CompzslError):
    """A verification check exceeded its configured tolerance."""
