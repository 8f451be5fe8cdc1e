"""Exception types shared across the simulator."""


class AmphiboriError(Exception):
    """Base class for all simulator errors."""


class GeometryError(AmphiboriError):
    """Raised when a fold configuration is geometrically infeasible."""


class MeshError(AmphiboriError):
    """Raised when a surface mesh is open or inconsistently oriented."""


class ScenarioParseError(AmphiboriError):
    """Scenario DSL error carrying a source location.

    ``line`` and ``column`` are 1-based; ``key_path`` is set for semantic
    errors (e.g. ``world.obstacle.wall.height``).
    """

    def __init__(self, message, line=None, column=None, key_path=None):
        self.line = line
        self.column = column
        self.key_path = key_path
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", col {column}"
            loc = f" ({loc})"
        path = f" [{key_path}]" if key_path else ""
        super().__init__(f"{message}{loc}{path}")


class SimulationAbort(AmphiboriError):
    """Raised when the stepper produces a non-finite state.

    Carries the name of the offending term and, when available, the partial
    trace recorded up to the failure.
    """

    def __init__(self, message, term=None, partial_trace=None):
        self.term = term
        self.partial_trace = partial_trace
        super().__init__(message)


class MissionFailed(AmphiboriError):
    """Mission event sequence broke; names the first missing event."""

    def __init__(self, missing_event, observed_events):
        self.missing_event = missing_event
        self.observed_events = list(observed_events)
        super().__init__(
            f"mission failed at '{missing_event}' (observed: {', '.join(self.observed_events) or 'none'})"
        )
