"""Exception types shared across the package.

The CLI maps these onto process exit codes, so raising the right type
matters more than the message text: BoundViolation -> 2,
NumericalFailure -> 3, ConfigError -> 4.
"""
from __future__ import annotations


class BoundViolation(Exception):
    """An asserted spectral inequality failed where it was required to hold."""


class NumericalFailure(Exception):
    """A computation finished but failed its own accuracy cross-check."""


class ConfigError(Exception):
    """Invalid experiment configuration (bad shape, grid, or parameter)."""
