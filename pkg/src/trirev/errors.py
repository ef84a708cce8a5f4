"""Exception hierarchy shared by every module."""


class TrirevError(Exception):
    """Base class for all library errors."""


class ContractViolation(TrirevError, ValueError):
    """Malformed input: wrong dimension, non-finite entries, bad parameters."""


class UnsupportedStructure(TrirevError):
    """The requested structure (inner product, sip, ...) does not exist on this space."""


class HypothesisViolation(TrirevError):
    """A theorem's standing hypothesis fails on the supplied data."""


class DegenerateInstance(TrirevError):
    """An instance that makes a ratio-form bound meaningless (e.g. zero sum)."""


class ConstructionFailure(TrirevError):
    """A generator or equality constructor cannot produce an instance."""

    def __init__(self, message, diagnosis=None):
        super().__init__(message)
        self.diagnosis = diagnosis


class ConvergenceFailure(TrirevError):
    """Quadrature refinement did not settle within the doubling budget."""


class ConfigError(TrirevError):
    """Bad suite or CLI configuration."""
