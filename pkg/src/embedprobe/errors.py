"""Exception hierarchy shared across the toolkit."""


class EmbedprobeError(Exception):
    """Base class for all toolkit errors."""


class EmbeddingFormatError(EmbedprobeError):
    """Raised for malformed or inconsistent embedding text files."""


class TaskFormatError(EmbedprobeError):
    """Raised for malformed task files or label mismatches."""


class DatasetError(EmbedprobeError):
    """Raised when a feature matrix / fold assignment cannot be built."""


class TrainingError(EmbedprobeError):
    """Raised when a classifier cannot be trained on the given data."""


class SmoConvergenceError(TrainingError):
    """Raised when the SMO solver exhausts its pass budget before the
    KKT stopping criterion is met."""


class ReductionError(EmbedprobeError):
    """Raised for invalid reduction specs or inapplicable transforms."""


class ConfigError(EmbedprobeError):
    """Raised for invalid experiment configuration files."""
