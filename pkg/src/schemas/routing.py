from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


InfeasibilityReason = Literal["compatibility", "capacity", "window", "shift"]


class Infeasibility(BaseModel):
    """Причина недопустимости маршрута (первое нарушенное ограничение)"""
    model_config = ConfigDict(frozen=True)

    reason: InfeasibilityReason
    request_id: Optional[int] = Field(None, description="Заявка, на которой обнаружено нарушение")


class Route(BaseModel):
    """Маршрут одного ТС на один день"""
    model_config = ConfigDict(frozen=True)

    vehicle_type: int = Field(..., description="ID типа ТС")
    stops: List[int] = Field(..., min_length=1, description="Последовательность ID заявок")
    departure: float = Field(..., description="Время выезда из депо")
    arrivals: List[float] = Field(..., description="Время прибытия к каждой остановке")
    starts: List[float] = Field(..., description="Время начала обслуживания")
    return_time: float = Field(..., description="Время возвращения в депо")
    distance: float = Field(..., ge=0)
    duration: float = Field(..., ge=0, description="От выезда до возвращения, минуты")
    cost: float = Field(..., ge=0, description="Операционная стоимость маршрута")

    @property
    def stop_key(self) -> tuple:
        return (self.vehicle_type, tuple(sorted(self.stops)))


class DaySolution(BaseModel):
    """Решение VRP на один день"""
    day_id: int
    routes: List[Route]
    fleet_used: List[int]
    operational_cost: float
