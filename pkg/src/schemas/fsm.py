from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.schemas.routing import Route


class PricedFleetProblem(BaseModel):
    """Однодневная задача FSM с ценами ТС вместо фиксированных стоимостей"""
    model_config = ConfigDict(frozen=True)

    day_id: int
    prices: List[float] = Field(..., description="Цена ТС каждого типа на этот день (q_ti)")
    lower_bounds: List[int] = Field(..., description="m_t")
    upper_bounds: List[Optional[int]] = Field(..., description="M_t, None - без ограничения")

    @model_validator(mode="after")
    def validate_bounds(self):
        if not (len(self.prices) == len(self.lower_bounds) == len(self.upper_bounds)):
            raise ValueError("Размерности prices и границ не совпадают")
        if any(price < 0 for price in self.prices):
            raise ValueError("Цены ТС не могут быть отрицательными")
        for lo, hi in zip(self.lower_bounds, self.upper_bounds):
            if lo < 0 or (hi is not None and hi < lo):
                raise ValueError(f"Некорректные границы [{lo}, {hi}]")
        return self

    @classmethod
    def unbounded(cls, day_id: int, prices: List[float]) -> "PricedFleetProblem":
        return cls(
            day_id=day_id,
            prices=list(prices),
            lower_bounds=[0] * len(prices),
            upper_bounds=[None] * len(prices),
        )

    def upper(self, t: int, n_requests: int) -> int:
        """M_t, ограниченная числом заявок"""
        hi = self.upper_bounds[t]
        return n_requests if hi is None else min(hi, n_requests)


class FleetOption(BaseModel):
    """Опция дня: вектор парка без простаивающих ТС и его маршруты"""
    day_id: int
    fleet: List[int]
    routes: List[Route]
    routing_cost: float
    priced_cost: float
