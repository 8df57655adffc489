"""Exception types shared across the simulator."""


class MacsimError(Exception):
    """Base class for simulator errors."""


class ActivationBoundViolated(MacsimError):
    """An adversary activated more passive stations in one round than allowed."""


class IncompatibleAlgorithm(MacsimError):
    """Algorithm requested on a channel that lacks a required capability."""


class TraceExhausted(MacsimError):
    """A trace-driven adversary was asked for a round past the end of its file."""


class OutOfRange(MacsimError):
    """Bound formula evaluated outside its applicability region."""


class ConfigError(MacsimError):
    """Invalid run configuration (CLI exit code 2)."""
