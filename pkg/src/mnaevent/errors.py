"""Exception hierarchy shared by every module."""


class DataError(ValueError):
    """Base class for data and validation failures (CLI exit code 1)."""


class MalformedRowError(DataError):
    def __init__(self, path, line, message):
        self.path = str(path)
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class DuplicateIdError(DataError):
    pass


class MissingDataError(DataError):
    """A required price or covariate could not be found."""


class InsufficientDataError(DataError):
    pass


class DegenerateDataError(DataError):
    """Zero variance or another degenerate configuration."""


class RankDeficiencyError(DataError):
    def __init__(self, column, message=None):
        self.column = column
        super().__init__(message or f"design matrix is rank deficient at column {column!r}")
