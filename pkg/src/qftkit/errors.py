"""Exception types shared across the package."""

from __future__ import annotations


class QftkitError(Exception):
    """Base class for all package errors."""


class StructuralError(QftkitError):
    """A circuit or gate violates a structural rule (bad wires, overlap)."""


class CapacityError(QftkitError):
    """The requested computation exceeds a hard resource cap."""


class NonInvertibleError(QftkitError):
    """Inversion was requested for a circuit containing measurements."""


class SimulationError(QftkitError):
    """A simulator was asked to do something outside its contract."""


class NetlistError(QftkitError, ValueError):
    """Netlist text could not be parsed.

    Carries the 1-based line number when the failure is tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")
