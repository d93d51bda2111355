"""Error types raised by the library.

Every error derives from ValueError as well, so callers that only guard
against bad input keep working.
"""
from typing import Optional


class NomaVlcError(Exception):
    """Base class for all library errors"""


class DomainError(NomaVlcError, ValueError):
    """Argument outside a function's mathematical domain"""


class GeometryError(NomaVlcError, ValueError):
    """Degenerate LED/receiver geometry"""


class ScenarioError(NomaVlcError, ValueError):
    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field

    def __str__(self):
        message = super().__str__()
        if self.field:
            return f"{self.field}: {message}"
        return message


class ConfigError(ScenarioError):
    """Malformed solver or experiment configuration"""


class SolverDivergenceError(NomaVlcError, ValueError):
    """Iterate left the region where the back-transform is meaningful"""


class GenerationError(NomaVlcError, ValueError):
    """Scenario generator could not place a user inside the receiver FOV"""


class GridError(NomaVlcError, ValueError):
    """Oracle grid request is too large or has no feasible point"""
