import logging
import math
import time
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from src.core.config import settings
from src.lp import LpStatus
from src.repositories.column_store import ColumnStore
from src.schemas.budget import CgBudget, LnsBudget, SolveBudget
from src.schemas.colgen import CgState, DayScoreRecord
from src.schemas.fsm import PricedFleetProblem
from src.schemas.instance import HorizonInstance
from src.schemas.master import Column, ColumnOutcome, Duals, FleetBounds, MasterResult
from src.schemas.plan import FleetPlan, LowerBound, PlanMethod
from src.services.covering import covering_bound
from src.services.fsm import solve_fsm
from src.services.master import dual_violations, quick_cg, reduced_cost, solve_integer_master, solve_master
from src.services.plans import DayChoice, build_plan, compute_gap
from src.services.routing import DayContext, build_contexts
from src.utils.exceptions import InfeasibleError, InvariantViolation
from src.utils.parallel import derive_seed, run_tasks

logger = logging.getLogger(__name__)

POSITIVE_DUAL = 1e-9


def score_day(day_id: int, duals: Duals, record: DayScoreRecord, mode: Optional[str] = None) -> float:
    """
    Взвешенный разброс текущих цен дня относительно цен, при которых были
    найдены его опции. День без положительных q получает -1
    """
    mode = mode or settings.CG_SCORE_MODE
    q = duals.q[day_id]
    if all(value <= POSITIVE_DUAL for value in q):
        return -1.0
    if mode == "max_dual":
        return float(sum(q))
    if record.n_options == 0:
        return math.inf

    terms = []
    for q_j, fleet in zip(record.duals, record.fleets):
        size = sum(fleet)
        terms.append(sum((q[t] - q_j[t]) ** 2 * fleet[t] / size for t in range(len(q))))
    if mode == "min":
        return min(terms)
    return sum(terms) / record.n_options


def select_subproblems(scores: Mapping[int, float], k: int) -> List[int]:
    """k дней с наибольшей положительной оценкой, при равенстве - меньший ID"""
    if k < 1:
        raise ValueError("k должно быть >= 1")
    ranked = sorted((day_id for day_id, score in scores.items() if score > 0), key=lambda d: (-scores[d], d))
    return ranked[:k]


def lagrangian_bound(state: CgState) -> float:
    """z_RMP + сумма оценок приведенной стоимости по всем дням"""
    if state.z_rmp is None:
        raise ValueError("Ограниченная задача еще не решена")
    return state.z_rmp + sum(state.rc.values())


class ColumnGeneration:
    """
    Генерация столбцов для [LM]: одно хранилище на весь поиск,
    узлы отличаются только границами на парк
    """

    def __init__(
        self,
        instance: HorizonInstance,
        contexts: Optional[Dict[int, DayContext]] = None,
        pricing: str = "heuristic",
        lns_budget: Optional[LnsBudget] = None,
        seed: int = 0,
        parallelism: Optional[int] = None,
        day_ids: Optional[Sequence[int]] = None,
        fixed_costs: Optional[Sequence[float]] = None,
        score_mode: Optional[str] = None,
        dual_mode: Optional[str] = None,
    ):
        self.instance = instance
        self.contexts = contexts or build_contexts(instance)
        self.day_ids = sorted(day_ids) if day_ids is not None else [day.id for day in instance.days]
        self.fixed_costs = list(fixed_costs) if fixed_costs is not None else instance.fixed_costs
        self.n_types = instance.n_types
        self.pricing = pricing
        self.lns_budget = lns_budget or LnsBudget()
        self.seed = seed
        self.workers = parallelism or settings.workers
        self.score_mode = score_mode or settings.CG_SCORE_MODE
        self.dual_mode = dual_mode or settings.CG_DUAL_MODE
        self.store = ColumnStore()
        self.records = {day_id: DayScoreRecord(day_id=day_id) for day_id in self.day_ids}
        self.best_routing: Dict[int, float] = {}

    def _insert(self, column: Column) -> ColumnOutcome:
        outcome = self.store.add_or_replace(column)
        if outcome != ColumnOutcome.DISCARDED:
            self.records[column.day_id].add(column.duals_at_creation, column.fleet)
        return outcome

    def initialize(self) -> ColumnStore:
        """Одна опция минимальной операционной стоимости на каждый день"""
        tasks = [
            (
                self.contexts[day_id],
                PricedFleetProblem.unbounded(day_id, [0.0] * self.n_types),
                self.pricing,
                self.lns_budget,
                derive_seed(self.seed, 0, 0, day_id),
            )
            for day_id in self.day_ids
        ]
        for day_id, result in zip(self.day_ids, run_tasks(solve_fsm, tasks, self.workers)):
            if isinstance(result, InfeasibleError):
                raise InfeasibleError(
                    f"День {day_id}: нет допустимой маршрутизации при неограниченном парке",
                    reason="initialization",
                    day_id=day_id,
                )
            if isinstance(result, Exception):
                raise result
            self._insert(
                Column(
                    day_id=day_id,
                    fleet=result.fleet,
                    routing_cost=result.routing_cost,
                    routes=result.routes,
                    origin="init",
                    duals_at_creation=[0.0] * self.n_types,
                )
            )
            self.best_routing[day_id] = result.routing_cost
        logger.info(f"Инициализация: {len(self.store)} столбцов, r_i0 = {self.best_routing}")
        return self.store

    def _solve_master(self, bounds: FleetBounds, state: CgState) -> MasterResult:
        result = solve_master(self.day_ids, self.fixed_costs, self.store, bounds, self.dual_mode)
        if state.z_rmp is not None:
            allowed = state.z_rmp + settings.OBJECTIVE_TOL * (1.0 + abs(state.z_rmp))
            if result.objective > allowed:
                message = f"z_RMP выросло: {state.z_rmp:.6f} -> {result.objective:.6f}"
                if settings.STRICT_INVARIANTS:
                    raise InvariantViolation(message)
                logger.warning(message)
        if settings.STRICT_INVARIANTS:
            problems = dual_violations(self.store, result.duals, self.fixed_costs, bounds)
            if problems:
                raise InvariantViolation("Двойственные не допустимы для [D]: " + "; ".join(problems[:5]))

        state.z_rmp = result.objective
        state.z_history.append(result.objective)
        state.duals = result.duals
        state.fleet = result.fleet
        state.selection = result.selection
        return result

    def _candidates(self, duals: Duals) -> List[int]:
        """
        Дни, где возможен отрицательный столбец: есть положительная q,
        либо p_i выше r_i0 (дешевая опция дня скрыта границами узла)
        """
        return [
            day_id
            for day_id in self.day_ids
            if duals.has_positive(day_id, POSITIVE_DUAL)
            or duals.p[day_id] - self.best_routing[day_id] > settings.REDUCED_COST_TOL
        ]

    def _score(self, day_id: int, duals: Duals) -> float:
        score = score_day(day_id, duals, self.records[day_id], self.score_mode)
        if score < 0:
            return duals.p[day_id] - self.best_routing[day_id]
        return score

    def _day_bound(self, day_id: int, duals: Duals, found: Dict[int, float]) -> float:
        q, p = duals.q[day_id], duals.p[day_id]
        r0 = self.best_routing[day_id]
        if any(value > POSITIVE_DUAL for value in q):
            ctx = self.contexts[day_id]
            cover = covering_bound(q, ctx.capacity, ctx.total_demand, r0, p)
        else:
            cover = min(0.0, r0 - p)
        if day_id in found:
            return max(found[day_id], cover)
        return cover

    def _price(
        self,
        days: List[int],
        duals: Duals,
        bounds: FleetBounds,
        state: CgState,
        node_id: int,
        found: Dict[int, float],
        inserted: List[Tuple[int, List[int]]],
    ) -> bool:
        """Решить подзадачи дней параллельно, вставить столбцы в порядке дней"""
        if not days:
            return False
        tasks = [
            (
                self.contexts[day_id],
                PricedFleetProblem(
                    day_id=day_id,
                    prices=list(duals.q[day_id]),
                    lower_bounds=[0] * self.n_types,
                    upper_bounds=list(bounds.upper),
                ),
                self.pricing,
                self.lns_budget,
                derive_seed(self.seed, node_id, state.iteration, day_id),
            )
            for day_id in days
        ]
        negative = False
        for day_id, result in zip(days, run_tasks(solve_fsm, tasks, self.workers)):
            if isinstance(result, InfeasibleError):
                state.pricing_failures += 1
                logger.warning(f"День {day_id}: прайсинг не нашел решения в границах узла")
                continue
            if isinstance(result, Exception):
                raise result
            column = Column(
                day_id=day_id,
                fleet=result.fleet,
                routing_cost=result.routing_cost,
                routes=result.routes,
                origin="pricing",
                duals_at_creation=list(duals.q[day_id]),
            )
            rc = reduced_cost(column, duals)
            found[day_id] = min(found.get(day_id, math.inf), rc)
            if self._insert(column) != ColumnOutcome.DISCARDED:
                inserted.append((day_id, list(column.fleet)))
            if rc < -settings.REDUCED_COST_TOL:
                negative = True
        return negative

    def _quick_cg(self, days: List[int], duals: Duals, bounds: FleetBounds, state: CgState, inserted) -> bool:
        negative = False
        for day_id in days:
            result = quick_cg(day_id, self.store, duals, self.contexts[day_id].request_ids, self.n_types, bounds)
            if result.infeasible:
                logger.debug(f"День {day_id}: пул маршрутов не покрывает все заявки")
                continue
            if result.column is None:
                continue
            if self._insert(result.column) != ColumnOutcome.DISCARDED:
                state.quick_cg_columns += 1
                inserted.append((day_id, list(result.column.fleet)))
            if reduced_cost(result.column, duals) < -settings.REDUCED_COST_TOL:
                negative = True
        return negative

    def _gap_closed(self, bounds: FleetBounds, state: CgState, budget: CgBudget) -> bool:
        scale = max(1.0, abs(state.best_bound))
        if (state.z_rmp - state.best_bound) / scale >= budget.gap_eps:
            return False
        solution, _ = solve_integer_master(
            self.day_ids, self.fixed_costs, self.store, bounds, settings.MIP_NODE_LIMIT
        )
        if solution.status != LpStatus.OPTIMAL:
            return False
        state.z_int = solution.objective
        return (state.z_int - state.best_bound) / scale < budget.gap_eps

    def run_cg(
        self,
        bounds: Optional[FleetBounds] = None,
        budget: Optional[CgBudget] = None,
        node_id: int = 0,
    ) -> CgState:
        """
        Цикл генерации столбцов в узле с границами bounds.
        InfeasibleError, если какой-то день не имеет видимых столбцов
        """
        bounds = bounds or FleetBounds.unbounded(self.n_types)
        budget = budget or CgBudget()
        state = CgState()
        started = time.monotonic()
        dirty = True

        while True:
            if dirty:
                self._solve_master(bounds, state)
                dirty = False
            state.elapsed = time.monotonic() - started
            if state.iteration >= budget.max_iterations or state.elapsed >= budget.max_seconds:
                state.status = "budget"
                break

            state.iteration += 1
            duals = state.duals
            candidates = self._candidates(duals)
            found: Dict[int, float] = {}
            inserted: List[Tuple[int, List[int]]] = []

            negative = False
            if settings.QUICK_CG_ENABLED:
                negative = self._quick_cg(candidates, duals, bounds, state, inserted)
            selected = select_subproblems({d: self._score(d, duals) for d in candidates}, self.workers)
            negative = self._price(selected, duals, bounds, state, node_id, found, inserted) or negative
            if self.pricing == "exact" and not negative:
                rest = [day_id for day_id in candidates if day_id not in found]
                negative = self._price(rest, duals, bounds, state, node_id, found, inserted)

            state.priced = sorted(found)
            state.rc = {day_id: self._day_bound(day_id, duals, found) for day_id in self.day_ids}
            bound = lagrangian_bound(state)
            state.bound_history.append(bound)
            state.best_bound = max(state.best_bound, bound)
            state.inserted.append(inserted)
            state.stagnation = 0 if negative else state.stagnation + 1
            dirty = bool(inserted)
            logger.debug(
                f"CG узел {node_id}, итерация {state.iteration}: z_RMP={state.z_rmp:.4f}, "
                f"оценка={bound:.4f}, дни={selected}, новых столбцов={len(inserted)}"
            )

            if self.pricing == "exact" and not negative:
                state.status = "converged"
                state.converged = True
                break
            if not inserted and not selected:
                state.status = "no_candidates"
                break
            if state.stagnation >= budget.stagnation_limit:
                state.status = "stagnation"
                break
            if self._gap_closed(bounds, state, budget):
                state.status = "gap"
                break

        if dirty:
            self._solve_master(bounds, state)
        state.elapsed = time.monotonic() - started
        logger.info(
            f"CG узел {node_id}: {state.status} за {state.iteration} итераций, "
            f"z_RMP={state.z_rmp:.4f}, оценка={state.best_bound:.4f}, столбцов={len(self.store)}"
        )
        return state

    def integer_choices(
        self, bounds: Optional[FleetBounds] = None
    ) -> Optional[Tuple[float, List[int], Dict[int, DayChoice]]]:
        """
        Решить ограниченную [M] по имеющимся столбцам: (значение, F, выбор по дням)
        или None, если целочисленное решение не найдено
        """
        solution, layout = solve_integer_master(
            self.day_ids, self.fixed_costs, self.store, bounds, settings.MIP_NODE_LIMIT
        )
        if solution.status != LpStatus.OPTIMAL:
            return None
        if solution.node_limit_hit:
            logger.warning("Целочисленная мастер-задача остановлена по лимиту узлов")
        choices: Dict[int, DayChoice] = {}
        for column_id, var in layout.column_vars.items():
            if solution.x[var] > 0.5:
                column = self.store.get(column_id)
                choices[column.day_id] = DayChoice(column.fleet, column.routing_cost, column.routes, column.id)
        fleet = [int(round(solution.x[var])) for var in layout.fleet_vars]
        return solution.objective, fleet, choices


def initialize(
    instance: HorizonInstance,
    pricing: str = "heuristic",
    lns_budget: Optional[LnsBudget] = None,
    seed: int = 0,
    **options,
) -> ColumnGeneration:
    """Создать движок генерации столбцов и заполнить хранилище начальными опциями"""
    engine = ColumnGeneration(instance, pricing=pricing, lns_budget=lns_budget, seed=seed, **options)
    engine.initialize()
    return engine


def run_rmh(
    instance: HorizonInstance,
    budget: Optional[SolveBudget] = None,
    seed: int = 0,
    lb: Optional[LowerBound] = None,
    contexts: Optional[Dict[int, DayContext]] = None,
    day_ids: Optional[Sequence[int]] = None,
    fixed_costs: Optional[Sequence[float]] = None,
    hook: Optional[Callable[[ColumnGeneration], None]] = None,
) -> FleetPlan:
    """
    Эвристика ограниченной мастер-задачи: CG в корне без границ,
    затем целочисленное решение [M] на найденных столбцах
    """
    started = time.monotonic()
    budget = budget or SolveBudget()
    engine = initialize(
        instance,
        pricing=budget.pricing,
        lns_budget=budget.lns,
        seed=seed,
        contexts=contexts,
        parallelism=budget.parallelism,
        day_ids=day_ids,
        fixed_costs=fixed_costs,
    )
    state = engine.run_cg(budget=budget.cg)
    if hook is not None:
        hook(engine)
    outcome = engine.integer_choices()
    if outcome is None:
        raise InfeasibleError("Целочисленная мастер-задача не решена", reason="master")
    _, _, choices = outcome

    plan = build_plan(
        instance,
        PlanMethod.RMH,
        choices,
        seed,
        day_ids=engine.day_ids,
        stats={
            "cg_iterations": state.iteration,
            "cg_status": state.status,
            "lp_bound": state.z_rmp,
            "columns": len(engine.store),
        },
    )
    plan.wall_time = time.monotonic() - started
    if lb is not None:
        plan.gap = compute_gap(plan.total_cost, lb.total_lb)
    logger.info(f"RMH: стоимость {plan.total_cost:.2f}, парк {plan.fleet}, {plan.wall_time:.2f} c")
    return plan
