"""Exception types shared across the package."""


class RoverNavError(Exception):
    """Base class for all package errors."""


class ValidationError(RoverNavError, ValueError):
    """Input violates a documented precondition or invariant."""


class EmptyPatchError(RoverNavError):
    """Requested sensing window lies entirely outside the terrain."""


class InsufficientDataError(RoverNavError):
    """Not enough known cells to evaluate the requested metric."""


class NoPathError(RoverNavError):
    """Planner exhausted the search space without reaching the goal."""


class InvalidStartError(RoverNavError):
    """Planning start cell is blocked or outside the grid."""


class MissionConfigError(RoverNavError):
    """Mission configuration file is missing, malformed, or inconsistent."""


class VlmError(RoverNavError):
    """Base class for vision-language-model client failures."""


class VlmTimeoutError(VlmError):
    """The classification endpoint did not answer within the timeout."""


class VlmTransportError(VlmError):
    """The classification endpoint was unreachable or returned an HTTP error."""


class VlmSchemaError(VlmError):
    """The endpoint response violates the strict JSON contract."""
