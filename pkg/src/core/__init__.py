from src.core.config import settings
from src.core.errors import (
    EXIT_CODES,
    ExitCode,
    error_document,
    exit_code_for,
    report_error,
)
