"""Exception types shared across the package."""


class WaistlabError(Exception):
    """Base class for all library errors."""


class DomainError(WaistlabError, ValueError):
    """Arguments outside an operation's mathematical domain."""


class SpecError(WaistlabError, ValueError):
    """Invalid declarative body description; message names the offending field."""


class EvaluationError(WaistlabError, RuntimeError):
    """A body lacks the evaluator needed for the requested computation,
    or an iterative evaluator failed to reach its tolerance."""


class ContainmentError(WaistlabError):
    """A required set containment failed; carries a witness direction."""

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = direction


class HypothesisError(WaistlabError):
    """A sampled hypothesis check failed; carries the witness sample."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class EmptyFiberError(WaistlabError):
    """No point of the body projects onto the requested target."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NetConstructionError(WaistlabError):
    """Covering-net construction could not be certified within its caps."""


class InfeasibleScheduleError(WaistlabError):
    """Parameter schedule violates its feasibility constraints."""


class ConfigError(WaistlabError, ValueError):
    """Malformed or schema-violating experiment configuration."""
