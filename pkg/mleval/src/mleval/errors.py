"""Error taxonomy; the CLI maps these onto exit codes."""


class MlevalError(Exception):
    """Base class for everything this package raises on purpose."""


class UsageError(MlevalError):
    """Bad parameters, configs, or incompatible inputs (exit code 2)."""


class ColumnMismatchError(UsageError):
    """Train and test tables disagree on their columns."""


class ManifestError(UsageError):
    """Batch manifest is malformed or empty."""


class DataError(MlevalError):
    """A data file exists but cannot be used (exit code 3)."""


class ParseError(DataError):
    """A cell failed to parse as a finite number."""


class SingleClassError(DataError):
    """Training data contains only one class; nothing to learn."""
