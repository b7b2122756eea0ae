import math
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, model_validator

from src.schemas.master import FleetBounds

NodeStatus = Literal["open", "solved", "infeasible", "terminated", "pruned"]


class BapNode(BaseModel):
    """Узел дерева: определяется границами m_t <= F_t <= M_t"""
    id: int
    lower: List[int]
    upper: List[Optional[int]]
    parent: Optional[int] = None
    depth: int = 0
    status: NodeStatus = "open"
    z: Optional[float] = Field(None, description="Значение LP в узле")
    z_int: float = Field(math.inf, description="Значение ограниченной целочисленной задачи в узле")
    bound: Optional[float] = Field(None, description="Доказанная нижняя граница (точный прайсинг)")
    fractional: List[float] = Field(default_factory=list, description="F_t решения LP")

    @model_validator(mode="after")
    def validate_bounds(self):
        for lo, hi in zip(self.lower, self.upper):
            if hi is not None and lo > hi:
                raise ValueError(f"Узел {self.id}: m_t = {lo} > M_t = {hi}")
        return self

    @property
    def bounds(self) -> FleetBounds:
        return FleetBounds(lower=list(self.lower), upper=list(self.upper))

    def forbids(self, fleet: List[int]) -> bool:
        return not self.bounds.admits_fleet(fleet)
