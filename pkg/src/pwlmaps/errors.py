"""Exception types raised across the package."""

from __future__ import annotations


class PwlError(Exception):
    """Base class for all package errors."""


class DomainError(PwlError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ValidityError(PwlError):
    """An orbit used to build a reduction left the half-plane it must stay in."""


class NoFixedPoint(PwlError):
    """A branch has slope one, so its fixed-point equation has no unique solution."""


class NoConvergence(PwlError):
    """An iterative solver exhausted its iteration budget."""


class PreconditionError(PwlError, ValueError):
    """The parameters do not satisfy the regime an estimator is built for."""


class ConfigError(PwlError, ValueError):
    """A scan configuration or CLI argument is malformed."""


class NotReturned(PwlError):
    """An orbit started in the third quadrant did not come back to it.

    ``reason`` is ``"diverged"`` when the orbit escapes (for instance when it starts
    on or below the stable line of the saddle) and ``"budget"`` when the step budget
    ran out first.
    """

    def __init__(self, reason: str, steps: int) -> None:
        super().__init__(f"orbit did not return to Q3 ({reason} after {steps} steps)")
        self.reason = reason
        self.steps = steps
