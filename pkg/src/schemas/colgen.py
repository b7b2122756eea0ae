import math
from typing import Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field

from src.schemas.master import Duals

CgStatus = Literal["running", "converged", "stagnation", "gap", "budget", "no_candidates"]


class DayScoreRecord(BaseModel):
    """
    История опций дня для оценки разброса двойственных: для каждой найденной
    опции j - вектор q^j на момент нахождения и парк F_ij
    """
    day_id: int
    duals: List[List[float]] = Field(default_factory=list)
    fleets: List[List[int]] = Field(default_factory=list)

    @property
    def n_options(self) -> int:
        """Ñ_i"""
        return len(self.fleets)

    def add(self, q: List[float], fleet: List[int]) -> None:
        if sum(fleet) < 1:
            raise ValueError(f"День {self.day_id}: опция без ТС")
        self.duals.append(list(q))
        self.fleets.append(list(fleet))


class CgState(BaseModel):
    """Состояние генерации столбцов в одном узле"""
    iteration: int = 0
    duals: Optional[Duals] = None
    z_rmp: Optional[float] = Field(None, description="Значение ограниченной LP-задачи")
    z_int: Optional[float] = Field(None, description="Значение ограниченной целочисленной задачи")
    best_bound: float = -math.inf
    fleet: List[float] = Field(default_factory=list, description="F_t последнего решения LP")
    selection: Dict[int, float] = Field(default_factory=dict, description="d_ij последнего решения LP")
    priced: List[int] = Field(default_factory=list, description="Дни, решенные прайсингом на итерации")
    rc: Dict[int, float] = Field(default_factory=dict, description="Оценки приведенной стоимости по дням")
    stagnation: int = 0
    elapsed: float = 0.0
    status: CgStatus = "running"
    converged: bool = Field(False, description="Отсутствие отрицательных столбцов доказано точным прайсингом")
    z_history: List[float] = Field(default_factory=list)
    bound_history: List[float] = Field(default_factory=list)
    inserted: List[List[Tuple[int, List[int]]]] = Field(
        default_factory=list, description="(день, парк) вставленных столбцов по итерациям"
    )
    quick_cg_columns: int = 0
    pricing_failures: int = 0
