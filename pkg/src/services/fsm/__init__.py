from typing import Optional

from src.schemas.budget import LnsBudget
from src.schemas.fsm import FleetOption, PricedFleetProblem
from src.services.fsm.exact import solve_exact
from src.services.fsm.heuristic import LnsSolver, solve_heuristic
from src.services.routing import DayContext

PRICING_MODES = ("heuristic", "exact")


def solve_fsm(
    ctx: DayContext,
    problem: PricedFleetProblem,
    pricing: str = "heuristic",
    budget: Optional[LnsBudget] = None,
    seed: int = 0,
) -> FleetOption:
    """Решить однодневную FSM выбранным способом"""
    if pricing == "exact":
        return solve_exact(ctx, problem)
    if pricing == "heuristic":
        return solve_heuristic(ctx, problem, budget, seed)
    raise ValueError(f"Неизвестный режим прайсинга: {pricing}")


def best_routing_option(
    ctx: DayContext,
    pricing: str = "heuristic",
    budget: Optional[LnsBudget] = None,
    seed: int = 0,
) -> FleetOption:
    """
    Опция минимальной операционной стоимости: все типы без ограничений,
    стоимость приобретения нулевая
    """
    problem = PricedFleetProblem.unbounded(ctx.day.id, [0.0] * ctx.n_types)
    return solve_fsm(ctx, problem, pricing, budget, seed)


__all__ = [
    "PRICING_MODES",
    "LnsSolver",
    "best_routing_option",
    "solve_exact",
    "solve_fsm",
    "solve_heuristic",
]
