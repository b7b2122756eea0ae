from typing import Any, Dict, Optional


class BaseAppException(Exception):
    """Базовое исключение приложения"""

    def __init__(self, message: str = "", details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(message)


class InstanceParseError(BaseAppException):
    """Документ экземпляра не является корректным JSON"""
    pass


class InstanceSchemaError(BaseAppException):
    """Документ не соответствует схеме (нет поля, неверный тип)"""

    def __init__(self, message: str, path: str = "", details: Optional[Dict[str, Any]] = None):
        self.path = path
        super().__init__(message, {**(details or {}), "path": path})


class InstanceValidationError(BaseAppException):
    """Нарушен инвариант экземпляра"""

    def __init__(
        self,
        message: str,
        code: str = "invalid_instance",
        day_id: Optional[int] = None,
        request_id: Optional[int] = None,
    ):
        self.code = code
        self.day_id = day_id
        self.request_id = request_id
        super().__init__(
            message, {"code": code, "day_id": day_id, "request_id": request_id}
        )


class GenerationError(BaseAppException):
    """Ошибка генерации синтетического горизонта"""
    pass


class InfeasibleError(BaseAppException):
    """Задача не имеет допустимого решения"""

    def __init__(self, message: str, reason: str = "infeasible", day_id: Optional[int] = None):
        self.reason = reason
        self.day_id = day_id
        super().__init__(message, {"reason": reason, "day_id": day_id})


class SizeGuardError(BaseAppException):
    """Размер задачи превышает предел точного оракула"""
    pass


class DimensionError(BaseAppException):
    """Несогласованные размерности данных"""
    pass


class InvariantViolation(BaseAppException):
    """Нарушен внутренний инвариант алгоритма"""
    pass


class BranchingError(BaseAppException):
    """Некорректное ветвление"""
    pass


class UsageError(BaseAppException):
    """Некорректные аргументы командной строки"""
    pass
