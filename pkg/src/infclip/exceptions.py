"""Error types raised across the package."""


class InfClipError(Exception):
    """Base class for all package errors."""


class NonConvergence(InfClipError):
    """A quadrature or iterative routine failed to reach its tolerance."""


class DegenerateProbability(InfClipError):
    """An arm probability fell below the numeric floor."""


class RootBracketFailure(InfClipError):
    """The normalization root could not be located; indicates a bug."""


class InvalidDimension(InfClipError):
    """Dimension outside the domain of a formula (e.g. n = 1 sphere constant)."""


class DegenerateAlpha(InfClipError):
    """Moment exponent at or beyond the value where a closed form blows up."""


class OutOfDomain(InfClipError):
    """A query point lies outside the enlarged feasible set."""


class ProjectionFailure(InfClipError):
    """A Bregman projection missed its residual tolerance."""


class ConfigError(InfClipError):
    """Experiment configuration is malformed; carries field/line diagnostics."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        loc = ""
        if field is not None:
            loc += f" (key: {field}"
            loc += f", line {line})" if line is not None else ")"
        super().__init__(message + loc)
