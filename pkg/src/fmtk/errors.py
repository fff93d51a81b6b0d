"""Shared exception types."""


class FormulaSyntaxError(ValueError):
    """Raised by the formula parser; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"at position {position}: {message}")
        self.position = position


class StructureFormatError(ValueError):
    """Malformed structure / tree / expression text input."""


class GuardExceeded(RuntimeError):
    """A desk-scale size guard was hit; raise the guard explicitly to proceed."""


class VerificationFailed(RuntimeError):
    """A machine-checked postcondition did not hold."""
