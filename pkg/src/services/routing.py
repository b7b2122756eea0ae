import logging
import math
import threading
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.config import settings
from src.schemas.instance import DayInstance, HorizonInstance, VehicleType
from src.schemas.routing import DaySolution, Infeasibility, Route
from src.utils.exceptions import InfeasibleError, SizeGuardError

logger = logging.getLogger(__name__)

FleetKey = Tuple[int, ...]


class DayContext:
    """
    Предрасчет для одного дня: матрица расстояний, спрос, вместимости,
    совместимости и кэш точных маршрутов по типам ТС.

    Внутри контекста заявки адресуются позицией в списке дня (0..n-1),
    в матрицах узел 0 - депо, узел k+1 - заявка на позиции k.
    """

    def __init__(self, day: DayInstance, vehicle_types: Sequence[VehicleType], commodities: Sequence[str]):
        self.day = day
        self.vehicle_types = tuple(vehicle_types)
        self.commodities = tuple(commodities)
        self.request_ids = tuple(request.id for request in day.requests)
        self.index = {request_id: pos for pos, request_id in enumerate(self.request_ids)}
        self.n = len(self.request_ids)
        self.shift = (float(day.shift[0]), float(day.shift[1]))

        points = np.array(
            [[day.depot.x, day.depot.y]] + [[r.x, r.y] for r in day.requests],
            dtype=float,
        )
        delta = points[:, None, :] - points[None, :, :]
        matrix = np.hypot(delta[..., 0], delta[..., 1])
        self.distance = matrix.tolist()
        self.travel = [(matrix / vt.speed).tolist() for vt in self.vehicle_types]

        self.demand = tuple(
            tuple(float(r.demand.get(c, 0.0)) for c in self.commodities) for r in day.requests
        )
        self.capacity = tuple(
            tuple(float(vt.capacity_of(c)) for c in self.commodities) for vt in self.vehicle_types
        )
        self.earliest = tuple(float(r.tw[0]) for r in day.requests)
        self.latest = tuple(float(r.tw[1]) for r in day.requests)
        self.service = tuple(float(r.service_time) for r in day.requests)
        self.compatible = tuple(
            tuple(r.allows(vt.id) for r in day.requests) for vt in self.vehicle_types
        )
        self.total_demand = tuple(
            float(sum(self.demand[pos][c] for pos in range(self.n))) for c in range(len(self.commodities))
        )

        self._lock = threading.Lock()
        self._catalogs: Dict[int, Dict[int, Tuple[float, Tuple[int, ...]]]] = {}
        self._partitions: Optional[Dict[FleetKey, Tuple[float, Tuple[Tuple[int, int], ...]]]] = None

    def __getstate__(self):
        state = self.__dict__.copy()
        state.pop("_lock", None)
        state["_catalogs"] = {}
        state["_partitions"] = None
        return state

    def __setstate__(self, state):
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def n_types(self) -> int:
        return len(self.vehicle_types)

    def positions(self, stops: Sequence[int]) -> List[int]:
        return [self.index[request_id] for request_id in stops]

    def fits(self, load: Sequence[float], pos: int, type_id: int) -> bool:
        """Помещается ли заявка pos в ТС с текущей загрузкой load"""
        cap = self.capacity[type_id]
        demand = self.demand[pos]
        tol = settings.FEASIBILITY_TOL
        return all(load[c] + demand[c] <= cap[c] + tol for c in range(len(cap)))

    def _walk(self, positions: Sequence[int], type_id: int):
        """
        Проход по последовательности с выездом в начале смены.
        Возвращает Infeasibility либо (distance, return_time, delay), где delay -
        допустимая задержка выезда, не сдвигающая время возвращения.
        """
        tol = settings.SCHEDULE_TOL
        compatible = self.compatible[type_id]
        for pos in positions:
            if not compatible[pos]:
                return Infeasibility(reason="compatibility", request_id=self.request_ids[pos])

        cap = self.capacity[type_id]
        load = [0.0] * len(cap)
        for pos in positions:
            for c, qty in enumerate(self.demand[pos]):
                load[c] += qty
                if load[c] > cap[c] + settings.FEASIBILITY_TOL:
                    return Infeasibility(reason="capacity", request_id=self.request_ids[pos])

        travel = self.travel[type_id]
        time = self.shift[0]
        prev = 0
        dist = 0.0
        waited = 0.0
        slack = math.inf
        for pos in positions:
            node = pos + 1
            arrival = time + travel[prev][node]
            if arrival > self.latest[pos] + tol:
                return Infeasibility(reason="window", request_id=self.request_ids[pos])
            slack = min(slack, waited + self.latest[pos] - arrival)
            start = max(arrival, self.earliest[pos])
            waited += start - arrival
            time = start + self.service[pos]
            dist += self.distance[prev][node]
            prev = node
        return_time = time + travel[prev][0]
        dist += self.distance[prev][0]
        if return_time > self.shift[1] + tol:
            return Infeasibility(reason="shift", request_id=self.request_ids[positions[-1]])
        return dist, return_time, max(0.0, min(waited, slack))

    def evaluate(self, positions: Sequence[int], type_id: int) -> Optional[float]:
        """Стоимость последовательности или None, если она недопустима"""
        if not positions:
            return 0.0
        walked = self._walk(positions, type_id)
        if isinstance(walked, Infeasibility):
            return None
        dist, return_time, delay = walked
        vt = self.vehicle_types[type_id]
        duration = return_time - self.shift[0] - delay
        return vt.cost_per_distance * dist + vt.cost_per_time * duration

    def route_catalog(self, type_id: int) -> Dict[int, Tuple[float, Tuple[int, ...]]]:
        """
        Лучшая допустимая последовательность для каждого подмножества заявок
        (битовая маска позиций) для типа ТС. Полный перебор с отсечениями.
        """
        with self._lock:
            cached = self._catalogs.get(type_id)
        if cached is not None:
            return cached
        if self.n > settings.EXACT_VRP_MAX_REQUESTS:
            raise SizeGuardError(
                f"Точный каталог маршрутов ограничен {settings.EXACT_VRP_MAX_REQUESTS} заявками, в дне {self.n}"
            )

        vt = self.vehicle_types[type_id]
        travel = self.travel[type_id]
        cap = self.capacity[type_id]
        candidates = [pos for pos in range(self.n) if self.compatible[type_id][pos]]
        tol = settings.SCHEDULE_TOL
        shift_start, shift_end = self.shift
        best: Dict[int, Tuple[float, Tuple[int, ...]]] = {}

        def extend(mask, seq, prev, time, dist, waited, slack, load):
            for pos in candidates:
                bit = 1 << pos
                if mask & bit:
                    continue
                new_load = tuple(load[c] + self.demand[pos][c] for c in range(len(cap)))
                if any(new_load[c] > cap[c] + settings.FEASIBILITY_TOL for c in range(len(cap))):
                    continue
                node = pos + 1
                arrival = time + travel[prev][node]
                if arrival > self.latest[pos] + tol:
                    continue
                new_slack = min(slack, waited + self.latest[pos] - arrival)
                start = max(arrival, self.earliest[pos])
                new_waited = waited + start - arrival
                leave = start + self.service[pos]
                new_dist = dist + self.distance[prev][node]
                new_seq = seq + (pos,)
                new_mask = mask | bit
                return_time = leave + travel[node][0]
                if return_time <= shift_end + tol:
                    delay = max(0.0, min(new_waited, new_slack))
                    duration = return_time - shift_start - delay
                    cost = vt.cost_per_distance * (new_dist + self.distance[node][0]) + vt.cost_per_time * duration
                    known = best.get(new_mask)
                    if known is None or cost < known[0] - 1e-12:
                        best[new_mask] = (cost, new_seq)
                extend(new_mask, new_seq, node, leave, new_dist, new_waited, new_slack, new_load)

        extend(0, (), 0, shift_start, 0.0, 0.0, math.inf, tuple(0.0 for _ in cap))
        logger.debug(f"День {self.day.id}, тип {type_id}: каталог из {len(best)} подмножеств")
        with self._lock:
            self._catalogs[type_id] = best
        return best

    def fleet_partitions(self) -> Dict[FleetKey, Tuple[float, Tuple[Tuple[int, int], ...]]]:
        """
        Для каждого вектора парка - минимальная стоимость покрытия всех заявок
        ровно таким числом маршрутов каждого типа и сами маршруты (тип, маска).
        """
        with self._lock:
            cached = self._partitions
        if cached is not None:
            return cached

        catalogs = [self.route_catalog(t) for t in range(self.n_types)]
        zero = tuple(0 for _ in range(self.n_types))
        full = (1 << self.n) - 1
        table: List[Dict[FleetKey, Tuple[float, int, int]]] = [dict() for _ in range(full + 1)]
        table[0][zero] = (0.0, -1, 0)

        for mask in range(1, full + 1):
            low = mask & -mask
            rest = mask ^ low
            entries = table[mask]
            sub_rest = rest
            while True:
                sub = sub_rest | low
                remainder = table[mask ^ sub]
                if remainder:
                    for t, catalog in enumerate(catalogs):
                        route = catalog.get(sub)
                        if route is None:
                            continue
                        for vec, (cost, _, _) in remainder.items():
                            new_vec = vec[:t] + (vec[t] + 1,) + vec[t + 1:]
                            total = cost + route[0]
                            known = entries.get(new_vec)
                            if known is None or total < known[0] - 1e-12:
                                entries[new_vec] = (total, t, sub)
                if sub_rest == 0:
                    break
                sub_rest = (sub_rest - 1) & rest

        partitions: Dict[FleetKey, Tuple[float, Tuple[Tuple[int, int], ...]]] = {}
        for vec, (cost, _, _) in table[full].items():
            pieces = []
            mask, cur = full, vec
            while mask:
                _, t, sub = table[mask][cur]
                pieces.append((t, sub))
                cur = cur[:t] + (cur[t] - 1,) + cur[t + 1:]
                mask ^= sub
            partitions[vec] = (cost, tuple(pieces))

        with self._lock:
            self._partitions = partitions
        return partitions

    def catalog_route(self, type_id: int, mask: int) -> Route:
        """Маршрут из каталога по маске"""
        _, seq = self.route_catalog(type_id)[mask]
        route = build_schedule([self.request_ids[pos] for pos in seq], self.vehicle_types[type_id], self)
        assert isinstance(route, Route)
        return route


def build_contexts(instance: HorizonInstance) -> Dict[int, DayContext]:
    """Контексты всех дней горизонта"""
    return {
        day.id: DayContext(day, instance.vehicle_types, instance.commodities)
        for day in instance.days
    }


def build_schedule(
    stops: Sequence[int],
    vehicle_type: VehicleType,
    ctx: DayContext,
) -> Union[Route, Infeasibility]:
    """
    Построить расписание маршрута: выезд в начале смены или позже (на величину
    ожидания, которую можно убрать без сдвига возвращения), ожидание до начала окна.
    Проверки по порядку: совместимость, вместимость, окно, смена.
    """
    if not stops:
        raise ValueError("Маршрут должен содержать хотя бы одну остановку")
    if len(set(stops)) != len(stops):
        raise ValueError(f"Повторяющиеся остановки в маршруте: {list(stops)}")
    positions = ctx.positions(stops)
    type_id = vehicle_type.id

    walked = ctx._walk(positions, type_id)
    if isinstance(walked, Infeasibility):
        return walked
    dist, return_time, delay = walked

    travel = ctx.travel[type_id]
    departure = ctx.shift[0] + delay
    time = departure
    prev = 0
    arrivals, starts = [], []
    for pos in positions:
        node = pos + 1
        arrival = time + travel[prev][node]
        start = max(arrival, ctx.earliest[pos])
        arrivals.append(arrival)
        starts.append(start)
        time = start + ctx.service[pos]
        prev = node
    final_return = time + travel[prev][0]
    duration = final_return - departure

    return Route(
        vehicle_type=type_id,
        stops=list(stops),
        departure=departure,
        arrivals=arrivals,
        starts=starts,
        return_time=final_return,
        distance=dist,
        duration=duration,
        cost=vehicle_type.cost_per_distance * dist + vehicle_type.cost_per_time * duration,
    )


def route_cost(route: Route, vehicle_type: VehicleType) -> float:
    """Операционная стоимость маршрута без фиксированной стоимости"""
    return vehicle_type.cost_per_distance * route.distance + vehicle_type.cost_per_time * route.duration


def day_solution(ctx: DayContext, routes: Sequence[Route]) -> DaySolution:
    fleet = [0] * ctx.n_types
    for route in routes:
        fleet[route.vehicle_type] += 1
    return DaySolution(
        day_id=ctx.day.id,
        routes=list(routes),
        fleet_used=fleet,
        operational_cost=sum(route.cost for route in routes),
    )


def singleton_routes(ctx: DayContext) -> Union[List[Route], Infeasibility]:
    """
    По одному маршруту на заявку самым дешевым допустимым типом.
    Возвращает причину для первой заявки, которую не может обслужить ни один тип.
    """
    routes = []
    for request_id in ctx.request_ids:
        best: Optional[Route] = None
        last_reason: Optional[Infeasibility] = None
        for vt in ctx.vehicle_types:
            candidate = build_schedule([request_id], vt, ctx)
            if isinstance(candidate, Infeasibility):
                last_reason = candidate
                continue
            if best is None or candidate.cost < best.cost:
                best = candidate
        if best is None:
            return last_reason or Infeasibility(reason="compatibility", request_id=request_id)
        routes.append(best)
    return routes


def exact_vrp(
    ctx: DayContext,
    fleet: Sequence[int],
    limits: Optional[Sequence[int]] = None,
) -> DaySolution:
    """
    Точное решение VRP дня при заданном парке: минимальная стоимость разбиения
    заявок на маршруты, не более fleet[t] маршрутов типа t и не менее limits[t].
    """
    if ctx.n > settings.EXACT_VRP_MAX_REQUESTS:
        raise SizeGuardError(
            f"exact_vrp ограничен {settings.EXACT_VRP_MAX_REQUESTS} заявками, в дне {ctx.n}"
        )
    if len(fleet) != ctx.n_types:
        raise ValueError("Длина вектора парка не совпадает с числом типов")
    lower = list(limits) if limits is not None else [0] * ctx.n_types

    best_vec = None
    best_cost = math.inf
    for vec, (cost, _) in sorted(ctx.fleet_partitions().items()):
        if all(lower[t] <= vec[t] <= fleet[t] for t in range(ctx.n_types)):
            if cost < best_cost - 1e-12:
                best_vec, best_cost = vec, cost
    if best_vec is None:
        raise InfeasibleError(
            f"День {ctx.day.id}: нет допустимого решения для парка {list(fleet)}",
            reason="fleet",
            day_id=ctx.day.id,
        )
    _, pieces = ctx.fleet_partitions()[best_vec]
    routes = [ctx.catalog_route(t, mask) for t, mask in pieces]
    routes.sort(key=lambda r: (r.vehicle_type, r.stops))
    return day_solution(ctx, routes)
