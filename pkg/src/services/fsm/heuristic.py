import itertools
import logging
import math
import random
import time
from typing import Dict, List, Optional, Tuple

from src.core.config import settings
from src.schemas.budget import LnsBudget
from src.schemas.fsm import FleetOption, PricedFleetProblem
from src.schemas.routing import Route
from src.services.routing import DayContext, build_schedule
from src.utils.exceptions import InfeasibleError, InvariantViolation

logger = logging.getLogger(__name__)

EPS = 1e-9


class _Tour:
    """Изменяемый маршрут внутри поиска"""
    __slots__ = ("type_id", "seq", "cost", "load", "mandatory", "uid")

    def __init__(self, type_id: int, seq: List[int], cost: float, load: List[float], mandatory: bool, uid: int):
        self.type_id = type_id
        self.seq = seq
        self.cost = cost
        self.load = load
        self.mandatory = mandatory
        self.uid = uid

    def copy(self) -> "_Tour":
        return _Tour(self.type_id, list(self.seq), self.cost, list(self.load), self.mandatory, self.uid)


class LnsSolver:
    """
    Эвристика LNS для однодневной задачи FSM с ценами ТС.

    Построение - жадная вставка в случайном порядке, открытие ТС по цене
    плюс стоимости маршрута. Улучшение - разрушение (случайные заявки или
    целый маршрут) и восстановление regret-2. Принимаются только строго
    улучшающие решения, после LNS_RESTART_AFTER неудачных итераций - рестарт.
    ТС обязательного минимума m_t заведены как пустые маршруты, их цена
    учитывается в итоговой стоимости и не участвует в сравнении решений.
    """

    def __init__(
        self,
        ctx: DayContext,
        problem: PricedFleetProblem,
        budget: Optional[LnsBudget] = None,
        seed: int = 0,
    ):
        if problem.day_id != ctx.day.id:
            raise ValueError(f"Задача для дня {problem.day_id}, контекст дня {ctx.day.id}")
        self.ctx = ctx
        self.problem = problem
        self.budget = budget or LnsBudget()
        self.rng = random.Random(seed)
        self.n = ctx.n
        self.n_types = ctx.n_types
        self.prices = list(problem.prices)
        self.lower = list(problem.lower_bounds)
        self.upper = [problem.upper(t, self.n) for t in range(self.n_types)]
        self.singleton = [
            [ctx.evaluate([pos], t) for pos in range(self.n)] for t in range(self.n_types)
        ]
        self.history: List[float] = []
        self.iterations = 0
        self._uids = itertools.count()
        self._cache: Dict[Tuple[int, int], Optional[Tuple[float, int]]] = {}

    # Работа с маршрутами

    def _new_tour(self, type_id: int, seq: List[int], mandatory: bool) -> _Tour:
        cost = self.ctx.evaluate(seq, type_id)
        load = [0.0] * len(self.ctx.commodities)
        for pos in seq:
            for c, qty in enumerate(self.ctx.demand[pos]):
                load[c] += qty
        return _Tour(type_id, seq, cost, load, mandatory, next(self._uids))

    def _objective(self, tours: List[_Tour]) -> float:
        return sum(tour.cost for tour in tours) + sum(
            self.prices[tour.type_id] for tour in tours if not tour.mandatory
        )

    def _counts(self, tours: List[_Tour]) -> List[int]:
        counts = [0] * self.n_types
        for tour in tours:
            counts[tour.type_id] += 1
        return counts

    def _best_insertion(self, pos: int, tour: _Tour) -> Optional[Tuple[float, int]]:
        key = (pos, tour.uid)
        if key in self._cache:
            return self._cache[key]
        result = None
        t = tour.type_id
        if self.ctx.compatible[t][pos] and self.ctx.fits(tour.load, pos, t):
            for index in range(len(tour.seq) + 1):
                cost = self.ctx.evaluate(tour.seq[:index] + [pos] + tour.seq[index:], t)
                if cost is None:
                    continue
                delta = cost - tour.cost
                if result is None or delta < result[0] - EPS:
                    result = (delta, index)
        self._cache[key] = result
        return result

    def _options(self, pos: int, tours: List[_Tour], counts: List[int]):
        """Варианты вставки заявки: (приращение, индекс маршрута или -1, позиция, тип)"""
        options = []
        for k, tour in enumerate(tours):
            insertion = self._best_insertion(pos, tour)
            if insertion is not None:
                options.append((insertion[0], k, insertion[1], tour.type_id))
        for t in range(self.n_types):
            single = self.singleton[t][pos]
            if single is not None and counts[t] < self.upper[t]:
                options.append((self.prices[t] + single, -1, 0, t))
        options.sort(key=lambda option: option[0])
        return options

    def _apply(self, pos: int, option, tours: List[_Tour], counts: List[int]) -> None:
        _, k, index, t = option
        if k >= 0:
            tour = tours[k]
            tours[k] = self._new_tour(t, tour.seq[:index] + [pos] + tour.seq[index:], tour.mandatory)
        else:
            tours.append(self._new_tour(t, [pos], False))
            counts[t] += 1

    def _fill_mandatory(self, tours: List[_Tour]) -> bool:
        """Перенести заявки в пустые обязательные маршруты (нет простаивающих ТС)"""
        for target_index, target in enumerate(tours):
            if target.seq or not target.mandatory:
                continue
            t = target.type_id
            best = None
            for k, source in enumerate(tours):
                if k == target_index or not source.seq:
                    continue
                if source.mandatory and len(source.seq) == 1:
                    continue
                for pos in source.seq:
                    single = self.singleton[t][pos]
                    if single is None:
                        continue
                    rest = [p for p in source.seq if p != pos]
                    rest_cost = self.ctx.evaluate(rest, source.type_id)
                    if rest_cost is None:
                        continue
                    delta = rest_cost - source.cost + single
                    if not rest and not source.mandatory:
                        delta -= self.prices[source.type_id]
                    if best is None or delta < best[0] - EPS:
                        best = (delta, k, pos, rest)
            if best is None:
                return False
            _, k, pos, rest = best
            source = tours[k]
            tours[k] = self._new_tour(source.type_id, rest, source.mandatory)
            tours[target_index] = self._new_tour(t, [pos], True)
        tours[:] = [tour for tour in tours if tour.seq or tour.mandatory]
        return all(tour.seq for tour in tours)

    # Построение, разрушение, восстановление

    def _mandatory_tours(self) -> List[_Tour]:
        return [
            self._new_tour(t, [], True)
            for t in range(self.n_types)
            for _ in range(self.lower[t])
        ]

    def _construct(self) -> Optional[List[_Tour]]:
        tours = self._mandatory_tours()
        counts = self._counts(tours)
        order = list(range(self.n))
        self.rng.shuffle(order)
        for pos in order:
            options = self._options(pos, tours, counts)
            if not options:
                return None
            self._apply(pos, options[0], tours, counts)
        if not self._fill_mandatory(tours):
            return None
        return tours

    def _initial(self) -> Optional[List[_Tour]]:
        if sum(self.lower) > self.n or any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            return None
        for _ in range(settings.LNS_CONSTRUCTION_ATTEMPTS):
            tours = self._construct()
            if tours is not None:
                return tours
        return None

    def _destroy(self, tours: List[_Tour]) -> Tuple[List[_Tour], List[int]]:
        tours = [tour.copy() for tour in tours]
        loaded = [k for k, tour in enumerate(tours) if tour.seq]
        removed: List[int] = []
        if loaded and self.rng.random() < 0.5:
            k = self.rng.choice(loaded)
            removed = list(tours[k].seq)
        else:
            cap = max(settings.LNS_MIN_DESTROY, int(settings.LNS_DESTROY_SHARE * self.n))
            size = min(self.n, self.rng.randint(settings.LNS_MIN_DESTROY, cap))
            removed = self.rng.sample(range(self.n), size)

        gone = set(removed)
        rebuilt = []
        for tour in tours:
            if not gone.intersection(tour.seq):
                rebuilt.append(tour)
                continue
            rest = [pos for pos in tour.seq if pos not in gone]
            if not rest and not tour.mandatory:
                continue
            if self.ctx.evaluate(rest, tour.type_id) is None:
                removed.extend(rest)
                gone.update(rest)
                rest = []
                if not tour.mandatory:
                    continue
            rebuilt.append(self._new_tour(tour.type_id, rest, tour.mandatory))
        return rebuilt, removed

    def _repair(self, tours: List[_Tour], pending: List[int]) -> bool:
        """Восстановление regret-2"""
        counts = self._counts(tours)
        pending = sorted(pending)
        while pending:
            choice = None
            for pos in pending:
                options = self._options(pos, tours, counts)
                if not options:
                    return False
                regret = options[1][0] - options[0][0] if len(options) > 1 else math.inf
                key = (-regret, options[0][0], pos)
                if choice is None or key < choice[0]:
                    choice = (key, pos, options[0])
            _, pos, option = choice
            self._apply(pos, option, tours, counts)
            pending.remove(pos)
        return self._fill_mandatory(tours)

    # Основной цикл

    def solve(self) -> FleetOption:
        """
        Найти лучшую опцию в пределах бюджета
        """
        started = time.monotonic()
        budget = self.budget
        current = self._initial()
        if current is None:
            raise InfeasibleError(
                f"День {self.ctx.day.id}: не удалось построить решение в границах "
                f"[{self.lower}, {self.upper}]",
                reason="bounds",
                day_id=self.ctx.day.id,
            )
        current_obj = self._objective(current)
        best, best_obj = current, current_obj
        self.history = [best_obj]
        solutions = 1
        idle = 0

        for iteration in range(budget.max_iterations):
            if budget.max_solutions is not None and solutions >= budget.max_solutions:
                break
            if time.monotonic() - started > budget.max_seconds:
                logger.debug(f"День {self.ctx.day.id}: LNS остановлен по времени на итерации {iteration}")
                break
            self.iterations = iteration + 1

            if idle >= settings.LNS_RESTART_AFTER:
                idle = 0
                self._cache.clear()
                fresh = self._initial()
                if fresh is None:
                    continue
                current, current_obj = fresh, self._objective(fresh)
            else:
                candidate, removed = self._destroy(current)
                if not self._repair(candidate, removed):
                    idle += 1
                    continue
                candidate_obj = self._objective(candidate)
                if candidate_obj < current_obj - EPS:
                    current, current_obj = candidate, candidate_obj
                    idle = 0
                else:
                    idle += 1

            if current_obj < best_obj - EPS:
                best, best_obj = current, current_obj
                self.history.append(best_obj)
                solutions += 1

        return self._to_option(best)

    def _to_option(self, tours: List[_Tour]) -> FleetOption:
        routes: List[Route] = []
        for tour in tours:
            vt = self.ctx.vehicle_types[tour.type_id]
            route = build_schedule([self.ctx.request_ids[pos] for pos in tour.seq], vt, self.ctx)
            if not isinstance(route, Route):
                raise InvariantViolation(
                    f"День {self.ctx.day.id}: LNS вернул недопустимый маршрут ({route.reason})"
                )
            routes.append(route)
        routes.sort(key=lambda r: (r.vehicle_type, r.stops))
        fleet = self._counts(tours)
        routing_cost = sum(route.cost for route in routes)
        return FleetOption(
            day_id=self.ctx.day.id,
            fleet=fleet,
            routes=routes,
            routing_cost=routing_cost,
            priced_cost=routing_cost + sum(p * f for p, f in zip(self.prices, fleet)),
        )


def solve_heuristic(
    ctx: DayContext,
    problem: PricedFleetProblem,
    budget: Optional[LnsBudget] = None,
    seed: int = 0,
) -> FleetOption:
    """Решить однодневную FSM эвристикой LNS"""
    return LnsSolver(ctx, problem, budget, seed).solve()
