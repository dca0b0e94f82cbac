"""Shared exception types.

``DataError`` covers problems with the data handed to an estimator or test
(degenerate variances, samples too short, and so on).  The CLI maps it to
exit code 2; genuine usage errors stay ``ValueError``/argparse and map to 1.
"""


class DataError(Exception):
    """Input data violates an estimator or test contract."""


class DegeneracyError(DataError):
    """A variance, standardization or scaling term is degenerate (<= 0)."""


class KernelError(ValueError):
    """A kernel fails the required shape conditions at construction."""
