import logging

from src.core.config import settings
from src.schemas.fsm import FleetOption, PricedFleetProblem
from src.services.routing import DayContext
from src.utils.exceptions import InfeasibleError, SizeGuardError

logger = logging.getLogger(__name__)


def solve_exact(ctx: DayContext, problem: PricedFleetProblem) -> FleetOption:
    """
    Точная однодневная FSM перебором векторов парка.

    Для каждого вектора в границах с суммой не больше числа заявок берется
    точное разбиение на маршруты, использующее все ТС вектора. При равной
    стоимости выигрывает лексикографически меньший вектор.
    """
    if ctx.n > settings.EXACT_FSM_MAX_REQUESTS:
        raise SizeGuardError(
            f"solve_exact ограничен {settings.EXACT_FSM_MAX_REQUESTS} заявками, в дне {ctx.n}"
        )
    upper = [problem.upper(t, ctx.n) for t in range(ctx.n_types)]
    lower = problem.lower_bounds

    best = None
    for vec, (cost, pieces) in sorted(ctx.fleet_partitions().items()):
        if sum(vec) > ctx.n:
            continue
        if not all(lower[t] <= vec[t] <= upper[t] for t in range(ctx.n_types)):
            continue
        priced = cost + sum(p * f for p, f in zip(problem.prices, vec))
        if best is None or priced < best[0] - 1e-9:
            best = (priced, vec, cost, pieces)

    if best is None:
        raise InfeasibleError(
            f"День {ctx.day.id}: нет парка в границах [{list(lower)}, {upper}]",
            reason="bounds",
            day_id=ctx.day.id,
        )
    priced, vec, cost, pieces = best
    routes = sorted(
        (ctx.catalog_route(t, mask) for t, mask in pieces),
        key=lambda r: (r.vehicle_type, r.stops),
    )
    return FleetOption(
        day_id=ctx.day.id,
        fleet=list(vec),
        routes=routes,
        routing_cost=sum(route.cost for route in routes),
        priced_cost=priced,
    )
