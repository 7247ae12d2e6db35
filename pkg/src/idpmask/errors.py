"""Exception types shared across the package."""


class IdpmaskError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(IdpmaskError):
    """A parameter is outside its documented range."""


class SchemaError(IdpmaskError):
    """A required column is missing or the header is malformed."""


class ParseError(IdpmaskError):
    """A cell failed to parse as a finite number."""


class AlignmentError(IdpmaskError):
    """Two datasets that must align row-for-row do not."""


class DomainError(IdpmaskError):
    """A value lies outside its attribute domain, or the domain is unusable."""


class InsufficientDataError(IdpmaskError):
    """Not enough rows to compute the requested statistic."""


class DegenerateVarianceError(IdpmaskError):
    """A zero-variance attribute makes a normalized distance undefined."""
