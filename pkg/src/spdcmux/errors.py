"""Exception types shared across the package."""

from __future__ import annotations


class ParameterError(ValueError):
    """Raised when an argument is outside its physical or structural domain."""


class ConvergenceError(RuntimeError):
    """Raised when an iterative solve fails to reach its tolerance."""
