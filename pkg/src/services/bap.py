import logging
import math
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from src.core.config import settings
from src.schemas.bap import BapNode
from src.schemas.budget import SolveBudget
from src.schemas.colgen import CgState
from src.schemas.fsm import PricedFleetProblem
from src.schemas.instance import HorizonInstance
from src.schemas.master import Column
from src.schemas.plan import FleetPlan, LowerBound, PlanMethod
from src.services.colgen import ColumnGeneration, initialize
from src.services.fsm import solve_fsm
from src.services.plans import build_plan, compute_gap
from src.services.routing import DayContext
from src.utils.exceptions import BranchingError, InfeasibleError
from src.utils.parallel import derive_seed

logger = logging.getLogger(__name__)


def branch(node: BapNode, t: int, value: float, next_id: int) -> Tuple[BapNode, BapNode]:
    """Дочерние узлы F_t <= floor(v) и F_t >= floor(v) + 1"""
    if abs(value - round(value)) <= settings.INTEGRALITY_TOL:
        raise BranchingError(f"Ветвление по целому значению F_{t} = {value}")
    floor = math.floor(value)
    upper = node.upper[t]
    if floor < node.lower[t] or (upper is not None and floor + 1 > upper):
        raise BranchingError(f"Значение F_{t} = {value} вне границ узла {node.id}")

    left_upper = list(node.upper)
    left_upper[t] = floor if upper is None else min(upper, floor)
    right_lower = list(node.lower)
    right_lower[t] = max(node.lower[t], floor + 1)
    left = BapNode(
        id=next_id, lower=list(node.lower), upper=left_upper, parent=node.id, depth=node.depth + 1, bound=node.bound
    )
    right = BapNode(
        id=next_id + 1, lower=right_lower, upper=list(node.upper), parent=node.id, depth=node.depth + 1, bound=node.bound
    )
    return left, right


def select_node(open_nodes: Sequence[BapNode], incumbent_fleet: Optional[List[int]]) -> Optional[BapNode]:
    """
    Открытый узел с наименьшим z̄ среди запрещающих парк рекордного решения
    (без рекорда - среди всех); при равенстве - меньший ID
    """
    eligible = [
        node for node in open_nodes if incumbent_fleet is None or node.forbids(incumbent_fleet)
    ]
    if not eligible:
        return None
    return min(eligible, key=lambda node: (node.z_int, node.id))


def branching_candidate(
    state: CgState, engine: ColumnGeneration, rule: Optional[str] = None
) -> Optional[Tuple[int, float]]:
    """
    Тип и значение для ветвления. Сначала дробные F_t; если все F_t целые,
    но день смешивает опции с F_ij^t > F_t, ветвление по v + 0.5
    """
    rule = rule or settings.BAP_BRANCHING
    tol = settings.INTEGRALITY_TOL
    fractional = [
        (t, value) for t, value in enumerate(state.fleet) if abs(value - round(value)) > tol
    ]
    if fractional:
        if rule == "first_fractional":
            return fractional[0]
        return max(fractional, key=lambda item: (min(item[1] % 1.0, 1.0 - item[1] % 1.0), -item[0]))

    by_day: Dict[int, List[Column]] = {}
    for column_id, value in state.selection.items():
        if value > tol:
            column = engine.store.get(column_id)
            by_day.setdefault(column.day_id, []).append(column)
    for t, value in enumerate(state.fleet):
        level = int(round(value))
        for day_id in sorted(by_day):
            columns = by_day[day_id]
            if len(columns) > 1 and any(column.fleet[t] > level for column in columns):
                return t, level + 0.5
    return None


class BranchAndPrice:
    """Поиск по дереву границ на парк с генерацией столбцов в каждом узле"""

    def __init__(
        self,
        instance: HorizonInstance,
        budget: Optional[SolveBudget] = None,
        seed: int = 0,
        contexts: Optional[Dict[int, DayContext]] = None,
        exhaustive: Optional[bool] = None,
    ):
        self.instance = instance
        self.budget = budget or SolveBudget()
        self.seed = seed
        self.engine = initialize(
            instance,
            pricing=self.budget.pricing,
            lns_budget=self.budget.lns,
            seed=seed,
            contexts=contexts,
            parallelism=self.budget.parallelism,
        )
        if exhaustive is None:
            exhaustive = settings.BAP_EXHAUSTIVE
        self.exhaustive = self.budget.pricing == "exact" if exhaustive is None else exhaustive
        self.cg_budget = self.budget.cg
        if self.exhaustive and self.budget.pricing == "exact" and self.cg_budget.gap_eps > 0:
            # узел закрывается только доказанной границей
            logger.debug(f"Полный точный поиск: gap_eps {self.cg_budget.gap_eps} заменен на 0")
            self.cg_budget = self.cg_budget.model_copy(update={"gap_eps": 0.0})
        self.incumbent: Optional[FleetPlan] = None
        self.nodes: List[BapNode] = []
        self.lp_bound: Optional[float] = None

    def _prune_tolerance(self) -> float:
        return settings.OBJECTIVE_TOL * (1.0 + abs(self.incumbent.total_cost))

    def _cover_days(self, node: BapNode) -> None:
        """Дню без видимых столбцов ищется опция в границах узла при нулевых ценах"""
        bounds = node.bounds
        for day_id in self.engine.day_ids:
            if self.engine.store.admitted(bounds, day_id):
                continue
            problem = PricedFleetProblem(
                day_id=day_id,
                prices=[0.0] * self.instance.n_types,
                lower_bounds=[0] * self.instance.n_types,
                upper_bounds=list(node.upper),
            )
            option = solve_fsm(
                self.engine.contexts[day_id],
                problem,
                self.budget.pricing,
                self.budget.lns,
                derive_seed(self.seed, node.id, 0, day_id),
            )
            self.engine.store.add_or_replace(
                Column(
                    day_id=day_id,
                    fleet=option.fleet,
                    routing_cost=option.routing_cost,
                    routes=option.routes,
                    origin="pricing",
                    duals_at_creation=[0.0] * self.instance.n_types,
                )
            )
            self.engine.records[day_id].add([0.0] * self.instance.n_types, option.fleet)

    def _update_incumbent(self, node: BapNode) -> None:
        try:
            outcome = self.engine.integer_choices(node.bounds)
        except InfeasibleError:
            return
        if outcome is None:
            return
        node.z_int = outcome[0]
        plan = build_plan(self.instance, PlanMethod.BAP, outcome[2], self.seed)
        if self.incumbent is None or plan.total_cost < self.incumbent.total_cost - 1e-9:
            logger.info(
                f"Узел {node.id}: новое рекордное решение {plan.total_cost:.4f}, парк {plan.fleet}"
            )
            self.incumbent = plan

    def _solve_node(self, node: BapNode) -> Optional[CgState]:
        try:
            self._cover_days(node)
            state = self.engine.run_cg(node.bounds, self.cg_budget, node_id=node.id)
        except InfeasibleError as e:
            node.status = "infeasible"
            logger.warning(f"Узел {node.id} закрыт как недопустимый: {e.message}")
            return None

        node.status = "solved"
        node.z = state.z_rmp
        node.fractional = list(state.fleet)
        if self.budget.pricing == "exact" and state.converged:
            node.bound = state.z_rmp if node.bound is None else max(node.bound, state.z_rmp)
        if self.lp_bound is None:
            self.lp_bound = state.z_rmp
        elif state.z_rmp < self.lp_bound - settings.OBJECTIVE_TOL:
            logger.debug(f"Узел {node.id}: значение LP {state.z_rmp:.4f} ниже корневого {self.lp_bound:.4f}")
            self.lp_bound = state.z_rmp
        self._update_incumbent(node)
        return state

    def _child_estimate(self, child: BapNode) -> None:
        try:
            outcome = self.engine.integer_choices(child.bounds)
        except InfeasibleError:
            return
        if outcome is not None:
            child.z_int = outcome[0]

    def _fathomed(self, node: BapNode) -> bool:
        if not self.exhaustive or node.bound is None or self.incumbent is None:
            return False
        return node.bound >= self.incumbent.total_cost - self._prune_tolerance()

    def run(self) -> FleetPlan:
        started = time.monotonic()
        tree = self.budget.tree
        root = BapNode(id=0, lower=[0] * self.instance.n_types, upper=[None] * self.instance.n_types)
        self.nodes.append(root)
        open_nodes: List[BapNode] = [root]
        processed = 0
        stop_reason = "exhausted"

        while open_nodes:
            if processed > 0 and (time.monotonic() - started >= tree.max_seconds or processed >= tree.max_nodes):
                stop_reason = "budget"
                break
            fleet = None if self.incumbent is None else self.incumbent.fleet
            node = select_node(open_nodes, fleet)
            if node is None:
                if not self.exhaustive:
                    logger.info(f"Все {len(open_nodes)} открытых узлов допускают рекордный парк, поиск завершен")
                    stop_reason = "no_forbidding_nodes"
                    break
                node = min(
                    open_nodes,
                    key=lambda n: (-math.inf if n.bound is None else n.bound, n.id),
                )
            open_nodes.remove(node)
            if self._fathomed(node):
                node.status = "pruned"
                continue

            processed += 1
            state = self._solve_node(node)
            if state is None or self._fathomed(node):
                if state is not None:
                    node.status = "pruned"
                continue

            candidate = branching_candidate(state, self.engine)
            if candidate is None:
                logger.debug(f"Узел {node.id}: решение LP целочисленное по F")
                continue
            t, value = candidate
            left, right = branch(node, t, value, len(self.nodes))
            for child in (left, right):
                self._child_estimate(child)
                self.nodes.append(child)
                open_nodes.append(child)
            logger.debug(f"Узел {node.id}: ветвление по F_{t} = {value:.4f}")

        for node in open_nodes:
            node.status = "terminated"
        if self.incumbent is None:
            raise InfeasibleError("Branch & price не нашел целочисленного решения", reason="bap")

        plan = self.incumbent.model_copy(
            update={
                "wall_time": time.monotonic() - started,
                "stats": {
                    "nodes": processed,
                    "created": len(self.nodes),
                    "stop": stop_reason,
                    "lp_bound": self.lp_bound,
                    "columns": len(self.engine.store),
                    "exhaustive": self.exhaustive,
                },
            }
        )
        logger.info(
            f"BAP: стоимость {plan.total_cost:.2f}, парк {plan.fleet}, узлов {processed}, причина: {stop_reason}"
        )
        return plan


def run_bap(
    instance: HorizonInstance,
    budget: Optional[SolveBudget] = None,
    seed: int = 0,
    lb: Optional[LowerBound] = None,
    contexts: Optional[Dict[int, DayContext]] = None,
    exhaustive: Optional[bool] = None,
    hook: Optional[Callable[[ColumnGeneration], None]] = None,
) -> FleetPlan:
    """Branch & price: CG в корне, затем дерево по дробным F_t"""
    search = BranchAndPrice(instance, budget, seed, contexts, exhaustive)
    plan = search.run()
    if hook is not None:
        hook(search.engine)
    if lb is not None:
        plan.gap = compute_gap(plan.total_cost, lb.total_lb)
    return plan
