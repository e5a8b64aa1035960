"""Shared exception types."""


class DiskError(Exception):
    pass


class EmptyInputError(DiskError):
    pass


class UnknownKindError(DiskError):
    def __init__(self, surfaces):
        self.surfaces = list(surfaces)
        super().__init__(f"cannot classify equation token(s): {self.surfaces}")


class ConfigError(DiskError):
    pass


class CorpusParseError(DiskError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(DiskError):
    pass


class TreeParseError(DiskError):
    pass


class NumericError(DiskError):
    pass
