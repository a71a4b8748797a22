"""Exception hierarchy shared across the package."""


class ReswalkError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ReswalkError):
    """Malformed text input; carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(ReswalkError):
    """Input violates a documented precondition (negative weight, bad id, ...)."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(ReswalkError):
    """Binary file is not in the expected format (magic/truncation/checksum)."""


class CapacityError(ReswalkError):
    """A caller-provided scratch buffer is too small."""


class ConfigError(ReswalkError):
    """Inconsistent or impossible run configuration."""


class RejectionExhausted(ReswalkError):
    """Rejection sampling gave up after its round budget (diagnostic outcome)."""

    def __init__(self, rounds):
        self.rounds = rounds
        super().__init__(f"no acceptance after {rounds} rejection rounds")
