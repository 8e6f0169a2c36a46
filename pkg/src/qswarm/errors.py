"""Exception hierarchy for the swarm engine."""


class SwarmError(Exception):
    """Base class for all engine errors."""


class OutOfDomainError(SwarmError):
    """A position fell outside the grid extent; names the offending axis."""

    def __init__(self, message, axis=None):
        super().__init__(message)
        self.axis = axis


class ContractViolationError(SwarmError):
    """An input broke a documented precondition (unnormalized state, empty ensemble, ...)."""


class AnnihilationError(SwarmError):
    """Amplitude-grain reduction would delete the whole state (grain too coarse)."""


class ConfigError(SwarmError):
    """Invalid parameter combination (e.g. friction factor >= 1 per step)."""


class SchemaError(ConfigError):
    """Scenario file violates the key/value schema; carries the field path."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericsError(SwarmError):
    """Non-finite force or state encountered; carries the cortege id when known."""

    def __init__(self, message, cortege_id=None):
        super().__init__(message)
        self.cortege_id = cortege_id


class SelectionCollapseError(SwarmError):
    """Selection produced an empty right-group prefix; carries the iteration index."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class SolverInstabilityError(SwarmError):
    """Reference propagator norm drift exceeded its per-step bound."""


class GridMismatchError(SwarmError):
    """Two fields were combined that do not live on the same grid."""


class UnsupportedScenarioError(SwarmError):
    """Operation requested for a particle count it does not support."""
