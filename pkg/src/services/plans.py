import math
from typing import Dict, List, Optional, Sequence

from src.schemas.instance import HorizonInstance
from src.schemas.plan import DayAssignment, FleetPlan, PlanMethod
from src.schemas.routing import Route
from src.utils.exceptions import InvariantViolation


class DayChoice:
    """Опция, выбранная для дня; routing_cost = inf означает недопустимый день"""

    def __init__(
        self,
        fleet: Sequence[int],
        routing_cost: float,
        routes: Sequence[Route] = (),
        column_id: Optional[int] = None,
    ):
        self.fleet = list(fleet)
        self.routing_cost = routing_cost
        self.routes = list(routes)
        self.column_id = column_id

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.routing_cost)


def union_fleet(fleets: Sequence[Sequence[int]], n_types: int) -> List[int]:
    """Покомпонентный максимум векторов парка"""
    fleet = [0] * n_types
    for day_fleet in fleets:
        fleet = [max(a, b) for a, b in zip(fleet, day_fleet)]
    return fleet


def build_plan(
    instance: HorizonInstance,
    method: PlanMethod,
    choices: Dict[int, DayChoice],
    seed: int,
    fleet: Optional[Sequence[int]] = None,
    day_ids: Optional[Sequence[int]] = None,
    **extra,
) -> FleetPlan:
    """
    Собрать план: парк по умолчанию - объединение опций дней,
    постоянные затраты считаются по исходным b_t
    """
    day_ids = list(day_ids) if day_ids is not None else [day.id for day in instance.days]
    if fleet is None:
        fleet = union_fleet([choices[d].fleet for d in day_ids if choices[d].feasible], instance.n_types)
    fleet = list(fleet)

    per_day = []
    for day_id in day_ids:
        choice = choices[day_id]
        if choice.feasible and any(used > available for used, available in zip(choice.fleet, fleet)):
            raise InvariantViolation(f"День {day_id}: опция {choice.fleet} превышает парк {fleet}")
        per_day.append(
            DayAssignment(
                day_id=day_id,
                fleet=choice.fleet,
                routing_cost=choice.routing_cost,
                idle=sum(fleet) - sum(choice.fleet),
                column_id=choice.column_id,
                infeasible=not choice.feasible,
                routes=choice.routes,
            )
        )

    fixed = float(sum(b * count for b, count in zip(instance.fixed_costs, fleet)))
    operational = float(sum(choices[d].routing_cost for d in day_ids))
    return FleetPlan(
        method=method,
        fleet=fleet,
        per_day=per_day,
        fixed_cost=fixed,
        operational_cost=operational,
        total_cost=fixed + operational,
        idle_per_day=[assignment.idle for assignment in per_day],
        seed=seed,
        infeasible=not math.isfinite(operational),
        **extra,
    )


def compute_gap(plan_cost: float, total_lb: float) -> float:
    """Разрыв (стоимость - оценка) / оценка в процентах"""
    if total_lb <= 0:
        raise ValueError(f"Нижняя оценка должна быть положительной: {total_lb}")
    return (plan_cost - total_lb) / total_lb * 100.0
