import json
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from src.core.config import settings
from src.lp import INF, LinearProgram, LpSolution, LpStatus, Sense, solve_lp, solve_mip
from src.repositories.column_store import ColumnStore
from src.schemas.master import Column, Duals, FleetBounds, MasterResult, QuickCgResult
from src.schemas.routing import Route
from src.utils.exceptions import InfeasibleError, InvariantViolation

logger = logging.getLogger(__name__)


class MasterLayout:
    """Соответствие переменных и строк LP столбцам, дням и типам"""

    def __init__(self, day_ids: Sequence[int], n_types: int):
        self.day_ids = list(day_ids)
        self.n_types = n_types
        self.fleet_vars: List[int] = []
        self.column_vars: Dict[int, int] = {}
        self.convexity_rows: Dict[int, int] = {}
        self.linking_rows: Dict[Tuple[int, int], int] = {}


def build_restricted(
    day_ids: Sequence[int],
    fixed_costs: Sequence[float],
    store: ColumnStore,
    bounds: Optional[FleetBounds] = None,
    integer: bool = False,
) -> Tuple[LinearProgram, MasterLayout]:
    """
    Ограниченная мастер-задача [M]/[LM] по столбцам хранилища, не скрытым
    границами узла. F_t в [m_t, M_t], d_ij >= 0 (d_ij <= 1 следует из строки выпуклости)
    """
    n_types = len(fixed_costs)
    bounds = bounds or FleetBounds.unbounded(n_types)
    layout = MasterLayout(day_ids, n_types)
    lp = LinearProgram("integer_master" if integer else "master")

    for t in range(n_types):
        upper = INF if bounds.upper[t] is None else float(bounds.upper[t])
        layout.fleet_vars.append(
            lp.add_variable(f"F{t}", fixed_costs[t], float(bounds.lower[t]), upper, integer)
        )

    per_day: Dict[int, List[Column]] = {}
    for day_id in layout.day_ids:
        columns = store.admitted(bounds, day_id)
        if not columns:
            raise InfeasibleError(
                f"День {day_id}: нет ни одного допустимого столбца в узле",
                reason="coverage",
                day_id=day_id,
            )
        per_day[day_id] = columns
        for column in columns:
            layout.column_vars[column.id] = lp.add_variable(
                f"d{column.id}", column.routing_cost, 0.0, INF, integer
            )

    for day_id in layout.day_ids:
        layout.convexity_rows[day_id] = lp.add_constraint(
            [(layout.column_vars[c.id], 1.0) for c in per_day[day_id]], Sense.EQ, 1.0, f"conv{day_id}"
        )
    for day_id in layout.day_ids:
        for t in range(n_types):
            coefficients = [
                (layout.column_vars[c.id], float(c.fleet[t])) for c in per_day[day_id] if c.fleet[t]
            ]
            coefficients.append((layout.fleet_vars[t], -1.0))
            layout.linking_rows[(day_id, t)] = lp.add_constraint(
                coefficients, Sense.LE, 0.0, f"link{day_id}_{t}"
            )
    return lp, layout


def extract_duals(solution: LpSolution, layout: MasterLayout) -> Duals:
    """
    p_i - двойственные строк выпуклости, q_ti = -y строк связи (y <= 0 у строки <=).
    Значения q в пределах -1e-9 обнуляются
    """
    p = {day_id: solution.duals[row] for day_id, row in layout.convexity_rows.items()}
    q: Dict[int, List[float]] = {}
    for day_id in layout.day_ids:
        values = []
        for t in range(layout.n_types):
            value = -solution.duals[layout.linking_rows[(day_id, t)]]
            if value < -1e-9:
                raise InvariantViolation(f"Отрицательная двойственная q[{day_id}][{t}] = {value}")
            values.append(max(0.0, value))
        q[day_id] = values
    return Duals(p=p, q=q)


def build_direct_dual(
    day_ids: Sequence[int],
    fixed_costs: Sequence[float],
    store: ColumnStore,
    bounds: Optional[FleetBounds] = None,
) -> Tuple[LinearProgram, Dict[str, Dict]]:
    """
    Двойственная задача [D] (в форме минимизации минус целевой функции):
    max sum p_i + sum m_t a_t - sum M_t b_t
    при p_i - sum_t F_ij^t q_ti <= r_ij для каждого столбца
    и sum_i q_ti + a_t - b_t = b_t для каждого типа
    """
    n_types = len(fixed_costs)
    bounds = bounds or FleetBounds.unbounded(n_types)
    lp = LinearProgram("direct_dual")
    index: Dict[str, Dict] = {"p": {}, "q": {}, "column_rows": {}, "type_rows": {}}

    for day_id in day_ids:
        index["p"][day_id] = lp.add_variable(f"p{day_id}", -1.0, -INF, INF)
    for day_id in day_ids:
        for t in range(n_types):
            index["q"][(day_id, t)] = lp.add_variable(f"q{day_id}_{t}", 0.0, 0.0, INF)
    alpha = {t: lp.add_variable(f"a{t}", -float(bounds.lower[t]), 0.0, INF) for t in range(n_types)}
    beta = {
        t: lp.add_variable(f"b{t}", float(bounds.upper[t]), 0.0, INF)
        for t in range(n_types)
        if bounds.upper[t] is not None
    }

    for day_id in day_ids:
        columns = store.admitted(bounds, day_id)
        if not columns:
            raise InfeasibleError(
                f"День {day_id}: нет ни одного допустимого столбца в узле",
                reason="coverage",
                day_id=day_id,
            )
        for column in columns:
            coefficients = [(index["p"][day_id], 1.0)]
            coefficients += [
                (index["q"][(day_id, t)], -float(column.fleet[t])) for t in range(n_types) if column.fleet[t]
            ]
            index["column_rows"][column.id] = lp.add_constraint(
                coefficients, Sense.LE, column.routing_cost, f"col{column.id}"
            )
    for t in range(n_types):
        coefficients = [(index["q"][(day_id, t)], 1.0) for day_id in day_ids]
        coefficients.append((alpha[t], 1.0))
        if t in beta:
            coefficients.append((beta[t], -1.0))
        index["type_rows"][t] = lp.add_constraint(coefficients, Sense.EQ, fixed_costs[t], f"type{t}")
    return lp, index


def solve_master(
    day_ids: Sequence[int],
    fixed_costs: Sequence[float],
    store: ColumnStore,
    bounds: Optional[FleetBounds] = None,
    dual_mode: Optional[str] = None,
) -> MasterResult:
    """
    Решить [LM] и получить двойственные: из базиса прямой задачи (primal)
    или прямым решением [D] (direct)
    """
    dual_mode = dual_mode or settings.CG_DUAL_MODE
    n_types = len(fixed_costs)

    if dual_mode == "direct":
        lp, index = build_direct_dual(day_ids, fixed_costs, store, bounds)
        solution = solve_lp(lp)
        if solution.status != LpStatus.OPTIMAL:
            raise InfeasibleError(f"Задача [D] не решена: {solution.status.value}", reason="master")
        p = {day_id: solution.x[var] for day_id, var in index["p"].items()}
        q = {
            day_id: [max(0.0, solution.x[index["q"][(day_id, t)]]) for t in range(n_types)]
            for day_id in day_ids
        }
        selection = {cid: max(0.0, -solution.duals[row]) for cid, row in index["column_rows"].items()}
        fleet = [-solution.duals[index["type_rows"][t]] for t in range(n_types)]
        return MasterResult(
            objective=-solution.objective,
            duals=Duals(p=p, q=q),
            fleet=fleet,
            selection=selection,
            iterations=solution.iterations,
        )

    lp, layout = build_restricted(day_ids, fixed_costs, store, bounds)
    solution = solve_lp(lp)
    if solution.status != LpStatus.OPTIMAL:
        raise InfeasibleError(f"Ограниченная мастер-задача не решена: {solution.status.value}", reason="master")
    return MasterResult(
        objective=solution.objective,
        duals=extract_duals(solution, layout),
        fleet=[solution.x[var] for var in layout.fleet_vars],
        selection={cid: solution.x[var] for cid, var in layout.column_vars.items()},
        iterations=solution.iterations,
    )


def solve_integer_master(
    day_ids: Sequence[int],
    fixed_costs: Sequence[float],
    store: ColumnStore,
    bounds: Optional[FleetBounds] = None,
    node_limit: Optional[int] = None,
) -> Tuple[LpSolution, MasterLayout]:
    """Целочисленная ограниченная мастер-задача [M] по имеющимся столбцам"""
    lp, layout = build_restricted(day_ids, fixed_costs, store, bounds, integer=True)
    return solve_mip(lp, node_limit), layout


def reduced_cost(column: Column, duals: Duals) -> float:
    """r_ij + sum_t F_ij^t q_ti - p_i"""
    q = duals.q[column.day_id]
    if len(q) != len(column.fleet):
        raise ValueError("Размерность двойственных не совпадает с вектором парка")
    return column.routing_cost + sum(f * v for f, v in zip(column.fleet, q)) - duals.p[column.day_id]


def dual_violations(
    store: ColumnStore,
    duals: Duals,
    fixed_costs: Sequence[float],
    bounds: Optional[FleetBounds] = None,
    tol: float = 1e-6,
) -> List[str]:
    """
    Нарушения ограничений [D]: p_i - sum_t F_ij^t q_ti <= r_ij для видимых
    столбцов и sum_i q_ti <= b_t для типов без верхней границы
    """
    bounds = bounds or FleetBounds.unbounded(len(fixed_costs))
    problems = []
    for column in store.admitted(bounds):
        if column.day_id not in duals.p:
            continue
        rc = reduced_cost(column, duals)
        if rc < -tol * (1.0 + abs(column.routing_cost)):
            problems.append(f"столбец {column.id}: приведенная стоимость {rc:.3e}")
    for t, b in enumerate(fixed_costs):
        if bounds.upper[t] is not None:
            continue
        total = sum(values[t] for values in duals.q.values())
        if total > b + tol * (1.0 + abs(b)):
            problems.append(f"тип {t}: sum q = {total:.6f} > b = {b}")
    return problems


def quick_cg(
    day_id: int,
    store: ColumnStore,
    duals: Duals,
    request_ids: Sequence[int],
    n_types: int,
    bounds: Optional[FleetBounds] = None,
) -> QuickCgResult:
    """
    Разбиение множества заявок дня маршрутами пула с ценами c_r + q_ti.
    Если оптимум меньше p_i - 1e-6, выбранные маршруты образуют новый столбец
    """
    bounds = bounds or FleetBounds.unbounded(n_types)
    q = duals.q[day_id]
    pooled = [
        item for item in store.pool.routes(day_id)
        if bounds.upper[item.vehicle_type] is None or bounds.upper[item.vehicle_type] > 0
    ]
    covered = {stop for item in pooled for stop in item.stops}
    if not pooled or any(request_id not in covered for request_id in request_ids):
        return QuickCgResult(infeasible=True)

    lp = LinearProgram(f"partition{day_id}")
    variables = [
        lp.add_variable(f"r{k}", item.cost + q[item.vehicle_type], 0.0, 1.0, True)
        for k, item in enumerate(pooled)
    ]
    for request_id in request_ids:
        lp.add_constraint(
            [(variables[k], 1.0) for k, item in enumerate(pooled) if request_id in item.stops],
            Sense.EQ,
            1.0,
            f"c{request_id}",
        )
    for t in range(n_types):
        if bounds.upper[t] is None:
            continue
        members = [(variables[k], 1.0) for k, item in enumerate(pooled) if item.vehicle_type == t]
        if members:
            lp.add_constraint(members, Sense.LE, float(bounds.upper[t]), f"max{t}")

    solution = solve_mip(lp, settings.QUICK_CG_NODE_LIMIT)
    if solution.status != LpStatus.OPTIMAL:
        return QuickCgResult(infeasible=True)
    if solution.objective >= duals.p[day_id] - settings.REDUCED_COST_TOL:
        return QuickCgResult(objective=solution.objective)

    routes: List[Route] = [
        pooled[k].route for k in range(len(pooled)) if solution.x[variables[k]] > 0.5
    ]
    routes.sort(key=lambda r: (r.vehicle_type, r.stops))
    fleet = [0] * n_types
    for route in routes:
        fleet[route.vehicle_type] += 1
    column = Column(
        day_id=day_id,
        fleet=fleet,
        routing_cost=sum(route.cost for route in routes),
        routes=routes,
        origin="quick_cg",
        duals_at_creation=list(q),
    )
    return QuickCgResult(column=column, objective=solution.objective)


def dump_store(store: ColumnStore) -> str:
    """JSON-выгрузка хранилища столбцов"""
    return json.dumps(store.dump(), ensure_ascii=False, indent=2)
