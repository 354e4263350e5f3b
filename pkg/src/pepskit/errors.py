"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: usage/input problems exit 1, resource
budgets exit 2, numerical failures exit 3.
"""

from __future__ import annotations


class PepskitError(Exception):
    """Base class for all package errors."""

    code = "error"


class ArgumentError(PepskitError):
    """Invalid argument or malformed input (CLI exit code 1)."""

    code = "argument"


class ModelError(PepskitError):
    """Inconsistent lattice/tensor data, e.g. mismatched bond dimensions."""

    code = "model"


class NotInjectiveError(PepskitError):
    """A site or blocked tensor has no left-inverse.

    Carries the offending smallest singular value so callers can report
    how far from injective the tensor is.
    """

    code = "not_injective"

    def __init__(self, message: str, sigma_min: float = 0.0):
        super().__init__(message)
        self.sigma_min = sigma_min


class SizeBudgetError(PepskitError):
    """A requested computation exceeds a configured size budget (exit 2).

    ``predicted_size`` is the number of complex entries of the offending
    object (state vector or contraction intermediate).
    """

    code = "budget"

    def __init__(self, message: str, predicted_size: int = 0):
        super().__init__(message)
        self.predicted_size = predicted_size


class NumericalError(PepskitError):
    """An underlying numerical routine failed to converge (exit 3)."""

    code = "numerical"


class DegenerateFitError(PepskitError):
    """A decay fit was requested on data with no signal (all zeros)."""

    code = "degenerate_fit"
