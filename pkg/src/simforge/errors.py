"""Exception types shared across the package."""


class ForgeError(Exception):
    """Base class for all package errors."""


class DSLError(ForgeError, ValueError):
    """Invalid scene document or scene definition.

    ``line``/``column`` are 1-based and set when the error can be traced to a
    position in the source text.
    """

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class GenerationError(ForgeError):
    """Scene generation exhausted its retry budget."""


class CompileError(ForgeError):
    """A scene could not be turned into a dynamical model."""


class SimulationError(ForgeError):
    """Integration failed outright (as opposed to a truncated trace)."""


class ProbeError(ForgeError, LookupError):
    """A trace lookup asked for an unknown target, quantity or time."""


class QAError(ForgeError):
    """A question could not be generated for the requested inputs."""


class IdentifiabilityError(QAError):
    """A masked parameter cannot be recovered from the chosen observation."""


class PruneError(ForgeError):
    """A trace has no usable stable prefix."""
