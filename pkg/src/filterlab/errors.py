"""Exception hierarchy shared by every filterlab module."""


class FilterLabError(Exception):
    """Base class for all errors raised by filterlab."""


class InvalidModulusError(FilterLabError, ValueError):
    """A modulus evaluator produced a non-finite or negative value."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class UnknownModulusError(FilterLabError, KeyError):
    def __init__(self, name, available):
        self.name = name
        self.available = tuple(available)
        super().__init__(f"unknown modulus {name!r}; available: {', '.join(self.available)}")

    def __str__(self):
        return self.args[0]


class BoundedModulusError(FilterLabError, ValueError):
    """f-density needs an unbounded modulus."""


class HorizonExceededError(FilterLabError, ValueError):
    """A count or scan was requested past the supported horizon."""


class DimensionMismatchError(FilterLabError, ValueError):
    pass


class UnknownLabelError(FilterLabError, KeyError):
    def __str__(self):
        return self.args[0]


class DSLParseError(FilterLabError, ValueError):
    """Malformed set, filter, map, sequence or vector expression."""


class BaseNotFilterError(FilterLabError, ValueError):
    """A family of sets failed the filter-base axioms."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NotCauchyFilterError(FilterLabError, ValueError):
    """Base elements are too large for the supplied neighborhood schedule."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class AuditSkipped(FilterLabError):
    """Raised when an audit's preconditions did not hold."""

    def __init__(self, message, preconditions=None):
        super().__init__(message)
        self.preconditions = preconditions or {}


class ConfigError(FilterLabError, ValueError):
    """Configuration text failed to parse or validate.

    ``errors`` holds ``(line, message)`` pairs; ``line`` is ``None`` when the
    position could not be recovered.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        lines = [f"line {ln}: {msg}" if ln is not None else msg for ln, msg in self.errors]
        super().__init__("; ".join(lines))


class ReportWriteError(FilterLabError, OSError):
    """A report could not be written to the requested path."""
