# app/core/exceptions.py
from datetime import datetime
from typing import Optional
import logging

logger = logging.getLogger(__name__)


class NilgeoException(Exception):
    """Base exception for all nilmanifold geometry errors"""
    exit_code = 1

    def __init__(self, message: str, error_code: str = None):
        self.message = message
        self.error_code = error_code
        super().__init__(self.message)

    def to_dict(self) -> dict:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "error_code": self.error_code,
            "timestamp": str(datetime.utcnow()),
        }


class ParseException(NilgeoException):
    """Syntax error in the manifold DSL, positioned at line/column"""

    def __init__(self, message: str, line: int, column: int, error_code: str = "SYNTAX"):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}", error_code)

    def to_dict(self) -> dict:
        payload = super().to_dict()
        payload.update({"line": self.line, "column": self.column})
        return payload


class ValidationException(NilgeoException):
    """Structure equations rejected by validation (D2_NONZERO, NOT_INTEGRABLE, ...)"""
    pass


class StructureException(NilgeoException):
    """Operation needs a structural property the manifold lacks"""
    pass


class EvaluationException(NilgeoException):
    """Polynomial evaluation failed (unbound or symbolic value)"""
    pass


class FormException(NilgeoException):
    """Invalid differential-form operation"""
    pass


class KuranishiException(NilgeoException):
    """Maurer-Cartan solver failure"""
    pass


class DeformationException(NilgeoException):
    """Deformed structure could not be built at the requested point"""

    def __init__(self, message: str, error_code: str = None):
        super().__init__(message, error_code)
        if error_code == "INTEGRABILITY_BROKEN":
            self.exit_code = 2


class RegistryException(NilgeoException):
    """Unknown builtin example"""
    pass


class InconsistencyException(NilgeoException):
    """Two independent computations disagree; always an implementation bug"""
    exit_code = 2


def exit_code_for(exc: Optional[BaseException]) -> int:
    """Map an exception to the CLI exit code (0 success, 1 bad input, 2 internal)"""
    if exc is None:
        return 0
    if isinstance(exc, NilgeoException):
        return exc.exit_code
    return 2


def http_status_for(exc: NilgeoException) -> int:
    return 500 if exc.exit_code == 2 else 422
