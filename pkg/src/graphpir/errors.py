"""Exception types shared across the package."""


class ParseError(ValueError):
    """Malformed edge-list input. Carries the 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ProtocolError(RuntimeError):
    """A query or response violates the protocol contract."""


class SizeLimitError(RuntimeError):
    """An exhaustive computation was refused because it exceeds its size guard."""


class DecodeError(RuntimeError):
    """Responses are missing or inconsistent with the query bundle."""
