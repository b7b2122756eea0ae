import math
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_serializer

from src.schemas.routing import Route


class PlanMethod(str, Enum):
    """Метод, построивший план"""
    UF = "UF"
    SA = "SA"
    RMH = "RMH"
    BAP = "BAP"
    LB = "LB"


class DayAssignment(BaseModel):
    """Выбранная опция дня"""
    day_id: int
    fleet: List[int]
    routing_cost: float
    idle: int = Field(..., ge=0)
    column_id: Optional[int] = None
    infeasible: bool = False
    routes: List[Route] = Field(default_factory=list)

    @field_serializer("routing_cost")
    def serialize_cost(self, value: float):
        return value if math.isfinite(value) else None


class FleetPlan(BaseModel):
    """Решение задачи на горизонте: парк, опции по дням, стоимости"""
    method: PlanMethod
    fleet: List[int]
    per_day: List[DayAssignment]
    fixed_cost: float
    operational_cost: float
    total_cost: float
    idle_per_day: List[int]
    gap: Optional[float] = Field(None, description="Разрыв с приближенной нижней оценкой, %")
    wall_time: Optional[float] = None
    seed: int
    infeasible: bool = False
    m: Optional[int] = Field(None, description="Число дней совместной задачи (SA)")
    stats: Dict[str, Any] = Field(default_factory=dict)

    @field_serializer("fixed_cost", "operational_cost", "total_cost")
    def serialize_money(self, value: float):
        return value if math.isfinite(value) else None

    @property
    def vehicles(self) -> int:
        return sum(self.fleet)

    @property
    def mean_idle(self) -> float:
        return sum(self.idle_per_day) / len(self.idle_per_day) if self.idle_per_day else 0.0


class LowerBound(BaseModel):
    """Приближенная нижняя оценка"""
    operational_lb: float
    fixed_lb: float
    total_lb: float
    fixed_fleet: List[int] = Field(default_factory=list, description="Парк, дающий fixed_lb")
    per_day: Dict[int, float] = Field(default_factory=dict, description="Лучшая операционная стоимость дня")
    runs: int = 1
