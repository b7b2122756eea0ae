import json
import sys
from typing import Any, Dict, TextIO

from src.utils.exceptions import (
    BaseAppException,
    GenerationError,
    InfeasibleError,
    InstanceParseError,
    InstanceSchemaError,
    InstanceValidationError,
    InvariantViolation,
    UsageError,
)


class ExitCode:
    """Коды завершения процесса"""
    OK = 0
    USAGE = 2
    GENERATION_FAILED = 3
    INSTANCE_ERROR = 4
    INVARIANT_VIOLATION = 5


# Соответствие семейств исключений кодам завершения
EXIT_CODES = [
    (UsageError, ExitCode.USAGE),
    (GenerationError, ExitCode.GENERATION_FAILED),
    (InstanceParseError, ExitCode.INSTANCE_ERROR),
    (InstanceSchemaError, ExitCode.INSTANCE_ERROR),
    (InstanceValidationError, ExitCode.INSTANCE_ERROR),
    (InfeasibleError, ExitCode.INSTANCE_ERROR),
    (InvariantViolation, ExitCode.INVARIANT_VIOLATION),
]


def exit_code_for(exc: BaseException) -> int:
    """
    Определить код завершения для исключения
    """
    for exc_type, code in EXIT_CODES:
        if isinstance(exc, exc_type):
            return code
    return ExitCode.INVARIANT_VIOLATION


def error_document(exc: BaseException) -> Dict[str, Any]:
    """
    Сформировать документ ошибки для вывода
    """
    details = exc.details if isinstance(exc, BaseAppException) else {}
    message = exc.message if isinstance(exc, BaseAppException) and exc.message else str(exc)
    return {
        "error": {
            "code": exit_code_for(exc),
            "type": type(exc).__name__,
            "message": message,
            "details": details or None,
        }
    }


def report_error(exc: BaseException, stream: TextIO = sys.stderr) -> int:
    """
    Вывести ошибку в поток и вернуть код завершения
    """
    stream.write(json.dumps(error_document(exc), ensure_ascii=False) + "\n")
    return exit_code_for(exc)
