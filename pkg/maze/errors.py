"""
Exception types raised across the maze benchmark toolkit.
"""


class MazeBenchError(Exception):
    """Base class for all toolkit errors."""


class OutOfBounds(MazeBenchError, IndexError):
    """A move or position left the grid."""


class MalformedGrid(MazeBenchError, ValueError):
    """A text grid or cell matrix violates the grid invariants."""


class TooLarge(MazeBenchError, ValueError):
    """A grid exceeds the brute-force oracle's cell limit."""


class InvalidSpec(MazeBenchError, ValueError):
    """Generation parameters out of range."""


class PlacementImpossible(MazeBenchError, RuntimeError):
    """No start/goal pair satisfies the placement constraints."""


class GenerationFailed(MazeBenchError, RuntimeError):
    """A maze could not be generated to its spec."""


class CannotSeal(GenerationFailed):
    """The goal cannot be walled off without touching start or goal."""


class AssemblyFailed(MazeBenchError, RuntimeError):
    """A benchmark group could not satisfy its constraints."""


class ManifestCorrupt(MazeBenchError, ValueError):
    """Manifest schema mismatch or failed annotation revalidation."""


class ParseFailure(MazeBenchError, ValueError):
    """A solver reply holds no usable JSON answer."""


class UnsupportedCombination(MazeBenchError, ValueError):
    """A reasoning setting the adapter cannot express."""


class ConfigError(MazeBenchError, ValueError):
    """Invalid or incomplete providers configuration."""


class TransportError(MazeBenchError, RuntimeError):
    """Network or HTTP failure after bounded retries."""


class AuthError(TransportError):
    """Missing or rejected credentials."""


class InconsistentReport(MazeBenchError, ValueError):
    """A run report references mazes the manifest does not hold."""
