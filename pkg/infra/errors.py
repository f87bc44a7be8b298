from typing import Any, Optional


class HeightError(Exception):
    """
    Base error; carries the process exit code and a human readable detail
    """
    exit_code = 3

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class PropertyFailure(HeightError):
    exit_code = 1


class UsageError(HeightError):
    exit_code = 2


class ParseError(UsageError):
    def __init__(self, message: str, line: int = 1, column: int = 1, source: str = "<expr>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UnsupportedError(HeightError):
    exit_code = 3


class PreconditionError(HeightError):
    exit_code = 3


class ResourceError(HeightError):
    exit_code = 4


class UndefinedGcdError(HeightError):
    pass


class PoleError(HeightError):
    def __init__(self, place: Any):
        super().__init__(f"pole at {place}")
        self.place = place


class SingularCurveError(HeightError):
    pass


class ContractViolation(HeightError):
    pass


class BasePointError(HeightError):
    pass


class BadFiberError(HeightError):
    def __init__(self, place: Any):
        super().__init__(f"bad fiber at t = {place}")
        self.place = place


class InconsistencyError(HeightError):
    """Two independent criteria disagree; usually means precision is too low"""
