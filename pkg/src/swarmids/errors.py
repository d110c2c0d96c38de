"""Exception hierarchy shared across the package."""


class SwarmidsError(Exception):
    """Base class for all package errors."""


class ConfigError(SwarmidsError):
    """Invalid configuration value, flag, or config-file key."""


class DataError(SwarmidsError):
    """Problem with input data (I/O, shape, unexpected content)."""


class ParseError(DataError):
    """Malformed input line; carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class UnknownLabelError(DataError):
    """Attack name not present in the shipped category table."""

    def __init__(self, label: str):
        super().__init__(f"unknown attack label: {label!r}")
        self.label = label


class TrainingError(SwarmidsError):
    """Classifier training cannot proceed (e.g. single-class input)."""


class ObjectiveError(SwarmidsError):
    """Fitness callback failed; carries the offending mask bitstring."""

    def __init__(self, mask_bits: str, cause: BaseException):
        super().__init__(f"objective failed for mask {mask_bits}: {cause}")
        self.mask_bits = mask_bits


class DataWarning(UserWarning):
    """Non-fatal data condition (e.g. a class with fewer rows than folds)."""
