from enum import Enum
from typing import Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from src.schemas.routing import Route


ColumnOrigin = Literal["init", "pricing", "quick_cg"]


class ColumnOutcome(str, Enum):
    """Результат вставки столбца в хранилище"""
    ADDED = "added"
    REPLACED = "replaced"
    DISCARDED = "discarded"


class Column(BaseModel):
    """Столбец мастер-задачи: опция дня с парком F_ij и стоимостью r_ij"""
    id: Optional[int] = Field(None, description="Назначается хранилищем")
    day_id: int
    fleet: List[int]
    routing_cost: float = Field(..., ge=0)
    routes: List[Route] = Field(default_factory=list)
    origin: ColumnOrigin = "pricing"
    duals_at_creation: List[float] = Field(default_factory=list, description="q_ti^j при нахождении")

    @model_validator(mode="after")
    def validate_no_idle(self):
        if any(count < 0 for count in self.fleet):
            raise ValueError("Отрицательное число ТС в опции")
        if self.routes:
            counts = [0] * len(self.fleet)
            for route in self.routes:
                counts[route.vehicle_type] += 1
            if counts != list(self.fleet):
                raise ValueError(f"Парк {self.fleet} не совпадает с маршрутами {counts}")
        return self

    @property
    def key(self) -> tuple:
        return (self.day_id, tuple(self.fleet))

    @property
    def size(self) -> int:
        """|F_ij|"""
        return sum(self.fleet)


class Duals(BaseModel):
    """Двойственные переменные ограниченной мастер-задачи"""
    p: Dict[int, float] = Field(..., description="p_i по ID дня")
    q: Dict[int, List[float]] = Field(..., description="q_ti по ID дня, по типам")

    def has_positive(self, day_id: int, tol: float = 0.0) -> bool:
        return any(value > tol for value in self.q[day_id])


class FleetBounds(BaseModel):
    """Границы узла на число ТС каждого типа"""
    lower: List[int]
    upper: List[Optional[int]]

    @classmethod
    def unbounded(cls, n_types: int) -> "FleetBounds":
        return cls(lower=[0] * n_types, upper=[None] * n_types)

    def admits_column(self, fleet: List[int]) -> bool:
        """Столбец скрывается, только если превышает верхнюю границу"""
        return all(hi is None or count <= hi for count, hi in zip(fleet, self.upper))

    def admits_fleet(self, fleet: List[int]) -> bool:
        return all(
            lo <= count and (hi is None or count <= hi)
            for count, lo, hi in zip(fleet, self.lower, self.upper)
        )


class PooledRoute(BaseModel):
    """Маршрут из пула дня"""
    day_id: int
    vehicle_type: int
    stops: List[int]
    cost: float
    route: Route


class QuickCgResult(BaseModel):
    """Итог быстрой генерации столбца по пулу маршрутов"""
    column: Optional[Column] = None
    objective: Optional[float] = None
    infeasible: bool = False


class MasterResult(BaseModel):
    """Решение ограниченной мастер-задачи в LP-релаксации"""
    objective: float
    duals: Duals
    fleet: List[float] = Field(..., description="Значения F_t")
    selection: Dict[int, float] = Field(..., description="d_ij по ID столбца")
    iterations: int = 0
