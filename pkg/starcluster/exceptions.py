"""Exceptions raised by the starcluster package."""
from __future__ import annotations


class StarClusterError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(StarClusterError, ValueError):
    """An argument is outside its documented domain."""


class CircuitConstructionError(InvalidArgumentError):
    """A circuit violates one of its structural invariants."""

    def __init__(self, message: str, event_index: int | None = None) -> None:
        """Initialize with the offending event index, if known."""
        if event_index is not None:
            message = f"event {event_index}: {message}"
        super().__init__(message)
        self.event_index = event_index


class InfeasibleThresholdError(StarClusterError):
    """No error rate inside the bracket reaches the requested target."""


class ResourceLimitError(StarClusterError):
    """A configured cap (leaf count, oracle qubits) would be exceeded."""


class ResourceRangeError(StarClusterError, OverflowError):
    """A count is not representable as a float; its log10 is still known."""

    def __init__(self, message: str, log10: float) -> None:
        """Initialize with the log10 of the unrepresentable value."""
        super().__init__(f"{message} (log10 = {log10:.6g})")
        self.log10 = log10


class VerificationError(StarClusterError):
    """Frame propagation disagreed with the stabilizer oracle."""


class OutputWriteError(StarClusterError, OSError):
    """Results could not be written to the requested destination."""
