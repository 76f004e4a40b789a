from typing import List, Optional, Sequence, Tuple


class DoeError(Exception):
    """Base class for every error raised by the toolkit.

    `exit_code` is what the command line returns when the error escapes a command.
    """

    exit_code = 1

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InvalidArgumentError(DoeError, ValueError):
    exit_code = 2


class ConfigError(DoeError):
    exit_code = 2


class InvalidDataError(DoeError, ValueError):
    exit_code = 3


class CsvParseError(InvalidDataError):
    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        location = ""
        if path:
            location = f"{path}"
        if line is not None:
            location = f"{location}:{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)
        self.path = path
        self.line = line


class DuplicatePointError(InvalidDataError):
    """Two design points coincide (closer than the duplicate tolerance)."""

    def __init__(self, pairs: Sequence[Tuple[int, int]], message: Optional[str] = None):
        self.pairs: List[Tuple[int, int]] = [(int(i), int(j)) for i, j in pairs]
        shown = ", ".join(f"({i}, {j})" for i, j in self.pairs[:10])
        if len(self.pairs) > 10:
            shown += f", ... ({len(self.pairs)} pairs)"
        super().__init__(message or f"duplicate design points at row pairs {shown}")


class NumericalFailureError(DoeError):
    exit_code = 4
