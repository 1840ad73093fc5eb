"""Exception types shared across the package."""


class EdgewalkError(Exception):
    """Base class for all errors raised by edgewalk."""


class ParseError(EdgewalkError):
    """A malformed input line; the message carries the line number."""


class ValidationError(EdgewalkError):
    """Input that parses but violates a structural requirement."""


class ConfigError(EdgewalkError):
    """An invalid or inconsistent configuration value."""


class NumericsError(EdgewalkError):
    """Non-finite values encountered during training.

    ``report`` holds the partial training report when the failure happens
    mid-run, so callers can still persist what was computed.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
