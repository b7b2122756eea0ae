import logging
import math
import time
from typing import Dict, List, Optional, Sequence

from src.core.config import settings
from src.schemas.budget import SolveBudget
from src.schemas.fsm import PricedFleetProblem
from src.schemas.instance import DayInstance, HorizonInstance
from src.schemas.plan import FleetPlan, LowerBound, PlanMethod
from src.services.colgen import run_rmh
from src.services.covering import solve_covering
from src.services.fsm import solve_fsm
from src.services.instance_service import total_load
from src.services.plans import DayChoice, build_plan, compute_gap
from src.services.routing import DayContext, build_contexts
from src.utils.exceptions import InfeasibleError
from src.utils.parallel import derive_seed, run_tasks

logger = logging.getLogger(__name__)

# Метки потоков seed для разных методов
UF_STREAM = 1
SA_STREAM = 2
LB_STREAM = 3


def _choices(day_ids: Sequence[int], results: List) -> Dict[int, DayChoice]:
    choices = {}
    for day_id, result in zip(day_ids, results):
        if isinstance(result, InfeasibleError):
            logger.warning(f"День {day_id}: нет допустимой маршрутизации при заданном парке")
            choices[day_id] = DayChoice([], math.inf)
            continue
        if isinstance(result, Exception):
            raise result
        choices[day_id] = DayChoice(result.fleet, result.routing_cost, result.routes)
    return choices


def run_uf(
    instance: HorizonInstance,
    budget: Optional[SolveBudget] = None,
    seed: int = 0,
    lb: Optional[LowerBound] = None,
    contexts: Optional[Dict[int, DayContext]] = None,
) -> FleetPlan:
    """
    Union Fleet: каждый день решается отдельно с ценами b_t/|I|,
    парк - покомпонентный максимум парков дней
    """
    started = time.monotonic()
    budget = budget or SolveBudget()
    contexts = contexts or build_contexts(instance)
    day_ids = [day.id for day in instance.days]
    prices = [b / len(day_ids) for b in instance.fixed_costs]
    tasks = [
        (
            contexts[day_id],
            PricedFleetProblem.unbounded(day_id, prices),
            budget.pricing,
            budget.lns,
            derive_seed(seed, UF_STREAM, day_id),
        )
        for day_id in day_ids
    ]
    choices = _choices(day_ids, run_tasks(solve_fsm, tasks, budget.parallelism))
    if any(not choice.feasible for choice in choices.values()):
        raise InfeasibleError("UF: день без допустимого решения", reason="uf")

    plan = build_plan(instance, PlanMethod.UF, choices, seed)
    plan.wall_time = time.monotonic() - started
    if lb is not None:
        plan.gap = compute_gap(plan.total_cost, lb.total_lb)
    logger.info(f"UF: стоимость {plan.total_cost:.2f}, парк {plan.fleet}")
    return plan


def adjust_for_compatibilities(fleet: Sequence[int], day: DayInstance, instance: HorizonInstance) -> List[int]:
    """
    Добавить минимум ТС, чтобы у каждой заявки дня был хотя бы один совместимый тип.
    Добавляется допустимый тип с наибольшей вместимостью по основному товару заявки
    """
    adjusted = list(fleet)
    for request in sorted(day.requests, key=lambda r: r.id):
        allowed = [t for t in range(instance.n_types) if request.allows(t)]
        if any(adjusted[t] > 0 for t in allowed):
            continue
        dominant = max(instance.commodities, key=lambda c: (request.demand.get(c, 0.0), -instance.commodities.index(c)))
        chosen = max(allowed, key=lambda t: (instance.vehicle_types[t].capacity_of(dominant), -t))
        adjusted[chosen] += 1
        logger.debug(f"День {day.id}, заявка {request.id}: добавлен ТС типа {chosen}")
    return adjusted


def rank_days(instance: HorizonInstance) -> List[int]:
    """Дни по убыванию суммарного спроса, при равенстве - меньший ID"""
    return [day.id for day in sorted(instance.days, key=lambda day: (-total_load(day), day.id))]


def run_sa(
    instance: HorizonInstance,
    m: int,
    budget: Optional[SolveBudget] = None,
    seed: int = 0,
    lb: Optional[LowerBound] = None,
    contexts: Optional[Dict[int, DayContext]] = None,
) -> FleetPlan:
    """
    Subset Algorithm: совместная задача на m самых загруженных днях
    с постоянными затратами b_t·m/|I|, затем остальные дни на полученном парке
    """
    n_days = len(instance.days)
    if not 1 <= m <= n_days:
        raise ValueError(f"m должно быть от 1 до {n_days}")
    started = time.monotonic()
    budget = budget or SolveBudget()
    contexts = contexts or build_contexts(instance)
    ranking = rank_days(instance)
    top, rest = ranking[:m], ranking[m:]
    scaled = [b * m / n_days for b in instance.fixed_costs]

    plan = None
    for attempt in range(settings.SA_RERUNS + 1):
        attempt_seed = seed if attempt == 0 else derive_seed(seed, SA_STREAM, attempt)
        joint = run_rmh(instance, budget, attempt_seed, contexts=contexts, day_ids=top, fixed_costs=scaled)
        choices = {
            assignment.day_id: DayChoice(
                assignment.fleet, assignment.routing_cost, assignment.routes, assignment.column_id
            )
            for assignment in joint.per_day
        }
        fleet = list(joint.fleet)
        for day_id in rest:
            fleet = adjust_for_compatibilities(fleet, instance.day(day_id), instance)

        tasks = [
            (
                contexts[day_id],
                PricedFleetProblem(
                    day_id=day_id,
                    prices=[0.0] * instance.n_types,
                    lower_bounds=[0] * instance.n_types,
                    upper_bounds=list(fleet),
                ),
                budget.pricing,
                budget.lns,
                derive_seed(attempt_seed, SA_STREAM, day_id),
            )
            for day_id in rest
        ]
        choices.update(_choices(rest, run_tasks(solve_fsm, tasks, budget.parallelism)))
        plan = build_plan(instance, PlanMethod.SA, choices, seed, fleet=fleet, m=m)
        if not plan.infeasible:
            break
        logger.warning(f"SA (m={m}): парк {fleet} недопустим для части дней, попытка {attempt + 1}")

    plan.wall_time = time.monotonic() - started
    if lb is not None and not plan.infeasible:
        plan.gap = compute_gap(plan.total_cost, lb.total_lb)
    logger.info(f"SA (m={m}): стоимость {plan.total_cost:.2f}, парк {plan.fleet}")
    return plan


def run_sa_best(
    instance: HorizonInstance,
    m_values: Sequence[int],
    budget: Optional[SolveBudget] = None,
    seed: int = 0,
    lb: Optional[LowerBound] = None,
    contexts: Optional[Dict[int, DayContext]] = None,
) -> FleetPlan:
    """SA для нескольких m, лучший план (при равенстве - меньшее m)"""
    contexts = contexts or build_contexts(instance)
    plans = [run_sa(instance, m, budget, seed, lb, contexts) for m in sorted(set(m_values))]
    return min(plans, key=lambda plan: (plan.total_cost, plan.m))


def approximate_lower_bound(
    instance: HorizonInstance,
    budget: Optional[SolveBudget] = None,
    runs: int = 5,
    seed: int = 0,
    contexts: Optional[Dict[int, DayContext]] = None,
) -> LowerBound:
    """
    Операционная часть - лучшая из runs маршрутизаций каждого дня без
    постоянных затрат (точный оракул на малых днях), постоянная часть -
    покрытие максимального по дням спроса каждого товара
    """
    if runs < 1:
        raise ValueError("runs должно быть >= 1")
    budget = budget or SolveBudget()
    contexts = contexts or build_contexts(instance)

    tasks, owners = [], []
    for day in instance.days:
        ctx = contexts[day.id]
        problem = PricedFleetProblem.unbounded(day.id, [0.0] * instance.n_types)
        if budget.pricing == "exact" or ctx.n <= settings.EXACT_FSM_MAX_REQUESTS:
            tasks.append((ctx, problem, "exact", budget.lns, 0))
            owners.append(day.id)
            continue
        for run in range(runs):
            tasks.append((ctx, problem, "heuristic", budget.lns, derive_seed(seed, LB_STREAM, day.id, run)))
            owners.append(day.id)

    per_day: Dict[int, float] = {}
    for day_id, result in zip(owners, run_tasks(solve_fsm, tasks, budget.parallelism)):
        if isinstance(result, Exception):
            raise result
        per_day[day_id] = min(per_day.get(day_id, math.inf), result.routing_cost)

    capacity = [[vt.capacity_of(c) for c in instance.commodities] for vt in instance.vehicle_types]
    peak = [max(contexts[day.id].total_demand[c] for day in instance.days) for c in range(len(instance.commodities))]
    fixed_lb, fixed_fleet = solve_covering(instance.fixed_costs, capacity, peak)

    operational = float(sum(per_day.values()))
    logger.info(f"Нижняя оценка: операционная {operational:.2f}, постоянная {fixed_lb:.2f}")
    return LowerBound(
        operational_lb=operational,
        fixed_lb=float(fixed_lb),
        total_lb=operational + float(fixed_lb),
        fixed_fleet=fixed_fleet,
        per_day=per_day,
        runs=runs,
    )


__all__ = [
    "adjust_for_compatibilities",
    "approximate_lower_bound",
    "compute_gap",
    "rank_days",
    "run_sa",
    "run_sa_best",
    "run_uf",
]
