"""Exception hierarchy for faas_rightsizer."""


class RightsizerError(Exception):
    """Base exception for all faas_rightsizer errors."""
    pass


class ConfigError(RightsizerError):
    """Invalid or unreadable run configuration."""
    pass


class CatalogError(RightsizerError):
    """Catalog file is missing, malformed or violates its schema."""
    pass


class TraceFormatError(RightsizerError):
    """Invocation trace file does not follow the expected CSV layout."""

    def __init__(self, message: str, line_number: int = 0):
        self.line_number = line_number
        if line_number:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class WorkloadError(RightsizerError):
    """A schedule cannot be generated or replayed."""
    pass


class LearnerError(RightsizerError, ValueError):
    """Invalid learner construction or update input."""
    pass


class DimensionMismatchError(LearnerError):
    """Feature vector dimension differs from the model dimension."""
    pass


class FeatureSchemaError(RightsizerError, ValueError):
    """Input descriptor attributes do not match the schema of its type."""
    pass


class UnknownFunctionError(RightsizerError, KeyError):
    """Function is not registered with the allocator or catalog."""

    def __str__(self) -> str:
        return f"Unknown function: {self.args[0]}" if self.args else "Unknown function"


class SchedulingError(RightsizerError):
    """General scheduler failure."""
    pass


class CapacityExceededError(SchedulingError):
    """Allocation is larger than the total capacity of every worker."""
    pass


class ContainerStateError(SchedulingError):
    """Container is not in the state an operation requires."""
    pass


class SimulationError(RightsizerError):
    """Event loop failure."""
    pass


class InvariantViolation(SimulationError):
    """A cluster invariant (capacity, load accounting, clock) was broken."""
    pass
