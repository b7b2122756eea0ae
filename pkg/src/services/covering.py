import math
from typing import List, Optional, Sequence, Tuple

from src.utils.exceptions import InfeasibleError

COVER_TOL = 1e-9


def type_limits(capacity: Sequence[Sequence[float]], demand: Sequence[float]) -> List[int]:
    """
    Верхняя граница перебора для каждого типа: max по перевозимым товарам
    ceil(TD_c / cap_tc). Большее число ТС типа ничего не добавляет к покрытию
    """
    limits = []
    for cap in capacity:
        need = 0
        for c, total in enumerate(demand):
            if total > COVER_TOL and cap[c] > 0:
                need = max(need, math.ceil(total / cap[c] - COVER_TOL))
        limits.append(need)
    return limits


def solve_covering(
    weights: Sequence[float],
    capacity: Sequence[Sequence[float]],
    demand: Sequence[float],
) -> Tuple[float, List[int]]:
    """
    min sum_t w_t F_t при sum_t cap_tc F_t >= TD_c для каждого товара c, F_t >= 0 целые.
    Перебор по типам с отсечением по оценке LP-отношения для оставшихся типов
    """
    n_types = len(weights)
    limits = type_limits(capacity, demand)
    for c, total in enumerate(demand):
        if total > COVER_TOL and not any(capacity[t][c] > 0 for t in range(n_types)):
            raise InfeasibleError(f"Товар {c} не перевозит ни один тип ТС", reason="coverage")

    order = sorted(range(n_types), key=lambda t: (weights[t], t))
    best_cost = math.inf
    best_fleet: Optional[List[int]] = None
    fleet = [0] * n_types

    def remaining_bound(level: int, residual: List[float]) -> float:
        bound = 0.0
        for c, need in enumerate(residual):
            if need <= COVER_TOL:
                continue
            ratios = [weights[t] / capacity[t][c] for t in order[level:] if capacity[t][c] > 0]
            if not ratios:
                return math.inf
            bound = max(bound, need * min(ratios))
        return bound

    def search(level: int, cost: float, residual: List[float]) -> None:
        nonlocal best_cost, best_fleet
        if all(need <= COVER_TOL for need in residual):
            if cost < best_cost - 1e-12:
                best_cost, best_fleet = cost, list(fleet)
            return
        if level == n_types:
            return
        if cost + remaining_bound(level, residual) >= best_cost - 1e-12:
            return
        t = order[level]
        for count in range(limits[t], -1, -1):
            fleet[t] = count
            search(
                level + 1,
                cost + weights[t] * count,
                [need - capacity[t][c] * count for c, need in enumerate(residual)],
            )
        fleet[t] = 0

    search(0, 0.0, [float(total) for total in demand])
    if best_fleet is None:
        raise InfeasibleError("Покрытие спроса невозможно", reason="coverage")
    return best_cost, best_fleet


def covering_bound(
    q: Sequence[float],
    capacity: Sequence[Sequence[float]],
    day_demand: Sequence[float],
    best_routing_cost: float,
    p: float,
) -> float:
    """
    Нижняя оценка приведенной стоимости дня: r_i0 + min покрытия с весами q - p_i.
    При q = 0 возвращается 0
    """
    if all(value <= 0.0 for value in q):
        return 0.0
    minimum, _ = solve_covering(q, capacity, day_demand)
    return best_routing_cost + minimum - p
