import logging
import threading
from typing import Dict, List, Optional, Tuple

from src.schemas.master import Column, ColumnOutcome, FleetBounds, PooledRoute
from src.schemas.routing import Route

logger = logging.getLogger(__name__)


class RoutePool:
    """Пул всех найденных маршрутов по дням: на каждый (тип, набор остановок) - самый дешевый"""

    def __init__(self):
        self._routes: Dict[int, Dict[Tuple[int, Tuple[int, ...]], PooledRoute]] = {}
        self._lock = threading.Lock()

    def add(self, day_id: int, route: Route) -> bool:
        """Добавить маршрут, вернуть True, если пул изменился"""
        key = route.stop_key
        with self._lock:
            day = self._routes.setdefault(day_id, {})
            known = day.get(key)
            if known is not None and known.cost <= route.cost + 1e-9:
                return False
            day[key] = PooledRoute(
                day_id=day_id,
                vehicle_type=route.vehicle_type,
                stops=list(route.stops),
                cost=route.cost,
                route=route,
            )
            return True

    def routes(self, day_id: int) -> List[PooledRoute]:
        """Маршруты дня в детерминированном порядке"""
        with self._lock:
            day = self._routes.get(day_id, {})
            return [day[key] for key in sorted(day)]

    def size(self, day_id: Optional[int] = None) -> int:
        with self._lock:
            if day_id is not None:
                return len(self._routes.get(day_id, {}))
            return sum(len(day) for day in self._routes.values())


class ColumnStore:
    """
    Хранилище столбцов. Ключ - (день, вектор парка); при повторе ключа
    более дешевый столбец заменяет старый, иначе отбрасывается.
    Маршруты любого пришедшего столбца попадают в пул.
    """

    def __init__(self):
        self._columns: List[Column] = []
        self._by_key: Dict[Tuple[int, Tuple[int, ...]], int] = {}
        self._by_day: Dict[int, List[int]] = {}
        self.pool = RoutePool()
        self._lock = threading.Lock()

    def add_or_replace(self, column: Column) -> ColumnOutcome:
        """Вставить столбец по правилу замены"""
        for route in column.routes:
            self.pool.add(column.day_id, route)

        with self._lock:
            index = self._by_key.get(column.key)
            if index is None:
                index = len(self._columns)
                self._columns.append(column.model_copy(update={"id": index}))
                self._by_key[column.key] = index
                self._by_day.setdefault(column.day_id, []).append(index)
                return ColumnOutcome.ADDED

            stored = self._columns[index]
            if column.routing_cost < stored.routing_cost - 1e-9:
                logger.debug(
                    f"День {column.day_id}, парк {column.fleet}: стоимость "
                    f"{stored.routing_cost:.4f} -> {column.routing_cost:.4f}"
                )
                self._columns[index] = column.model_copy(update={"id": index})
                return ColumnOutcome.REPLACED
            return ColumnOutcome.DISCARDED

    def get(self, column_id: int) -> Column:
        return self._columns[column_id]

    def find(self, day_id: int, fleet: List[int]) -> Optional[Column]:
        index = self._by_key.get((day_id, tuple(fleet)))
        return None if index is None else self._columns[index]

    def columns(self, day_id: Optional[int] = None) -> List[Column]:
        with self._lock:
            if day_id is None:
                return list(self._columns)
            return [self._columns[i] for i in self._by_day.get(day_id, [])]

    def admitted(self, bounds: FleetBounds, day_id: Optional[int] = None) -> List[Column]:
        """Столбцы, не скрытые границами узла"""
        return [column for column in self.columns(day_id) if bounds.admits_column(column.fleet)]

    def day_ids(self) -> List[int]:
        with self._lock:
            return sorted(self._by_day)

    def __len__(self) -> int:
        return len(self._columns)

    def dump(self) -> List[dict]:
        """Содержимое для разбора после расчета"""
        return [
            {
                "id": column.id,
                "day": column.day_id,
                "fleet": column.fleet,
                "r": column.routing_cost,
                "origin": column.origin,
            }
            for column in self.columns()
        ]
