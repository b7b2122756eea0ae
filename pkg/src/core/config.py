import os
from typing import Literal, Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Настройки планировщика, загружаемые из переменных окружения и .env
    """
    # Основные настройки
    APP_NAME: str = "Fleet Horizon Planner"
    FLEET_LOG: Literal["error", "info", "debug"] = "info"

    # Допуски
    FEASIBILITY_TOL: float = 1e-7
    OBJECTIVE_TOL: float = 1e-6
    INTEGRALITY_TOL: float = 1e-6
    REDUCED_COST_TOL: float = 1e-6
    SCHEDULE_TOL: float = 1e-6

    # Эвристика LNS для однодневной задачи FSM
    LNS_MAX_ITERATIONS: int = 1500
    LNS_MAX_SECONDS: float = 2.0
    LNS_RESTART_AFTER: int = 200
    LNS_DESTROY_SHARE: float = 0.3
    LNS_MIN_DESTROY: int = 2
    LNS_CONSTRUCTION_ATTEMPTS: int = 10

    # Генерация столбцов
    CG_MAX_ITERATIONS: int = 200
    CG_MAX_SECONDS: float = 600.0
    CG_STAGNATION_LIMIT: int = 3
    CG_GAP_EPS: float = 1e-3
    CG_SCORE_MODE: Literal["total", "min", "max_dual"] = "total"
    CG_DUAL_MODE: Literal["primal", "direct"] = "primal"
    QUICK_CG_ENABLED: bool = True
    QUICK_CG_NODE_LIMIT: int = 500

    # Параллелизм (None - по числу ядер)
    PARALLELISM: Optional[int] = None
    EXECUTOR: Literal["thread", "process"] = "thread"

    # Branch & price
    BAP_BRANCHING: Literal["most_fractional", "first_fractional"] = "most_fractional"
    BAP_MAX_NODES: int = 1000
    BAP_EXHAUSTIVE: Optional[bool] = None  # None - только при точном прайсинге

    # LP / MIP ядро
    MIP_NODE_LIMIT: int = 20000
    SIMPLEX_DEGENERATE_LIMIT: int = 1000
    SIMPLEX_REFACTOR_EVERY: int = 50
    SIMPLEX_MAX_PIVOTS: int = 200000

    # Базовые методы и генератор
    SA_RERUNS: int = 3
    GENERATOR_MAX_RETRIES: int = 100

    # Ограничения точных оракулов
    EXACT_VRP_MAX_REQUESTS: int = 9
    EXACT_FSM_MAX_REQUESTS: int = 8

    # Проверка инвариантов во время расчета
    STRICT_INVARIANTS: bool = True

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @property
    def workers(self) -> int:
        """Число параллельных подзадач"""
        return self.PARALLELISM or os.cpu_count() or 1


# Создаем глобальный экземпляр настроек для импорта в других модулях
settings = Settings()
