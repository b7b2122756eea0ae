import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from src.core.config import settings
from src.schemas.instance import (
    DayInstance,
    DaySummary,
    HorizonInstance,
    PerturbationConfig,
    Request,
    VehicleType,
)
from src.services.instance_service import validate_instance
from src.utils.exceptions import GenerationError, InstanceValidationError

logger = logging.getLogger(__name__)


class SyntheticGenerator:
    """
    Генератор многодневного горизонта возмущением исторического дня:
    удаление и дублирование заявок, масштабирование спроса, пресеты окон
    """

    def __init__(
        self,
        base_day: DayInstance,
        vehicle_types: Sequence[VehicleType],
        commodities: Sequence[str],
        config: Optional[PerturbationConfig] = None,
        seed: int = 0,
    ):
        self.base_day = base_day
        self.vehicle_types = list(vehicle_types)
        self.commodities = list(commodities)
        self.config = config or PerturbationConfig()
        self.seed = seed
        self.summary: List[DaySummary] = []

    def _windows(self):
        start, end = self.base_day.shift
        middle = (start + end) // 2
        return [(start, middle), (middle, end), (start, end)]

    def _perturb(self, rng: np.random.Generator, day_id: int) -> DayInstance:
        cfg = self.config
        windows = self._windows()
        next_id = max((r.id for r in self.base_day.requests), default=-1) + 1
        requests: List[Request] = []

        def scaled(request: Request, x: float, y: float, request_id: int) -> Request:
            factor = float(rng.uniform(cfg.scale_lo, cfg.scale_hi))
            demand = {
                c: (qty if factor == 1.0 else round(qty * factor, 3))
                for c, qty in request.demand.items()
            }
            service = request.service_time
            if cfg.service_per_unit > 0:
                service += int(math.ceil(cfg.service_per_unit * sum(demand.values())))
            tw = request.tw
            if cfg.window_presets:
                tw = windows[int(rng.integers(len(windows)))]
            return request.model_copy(
                update={"id": request_id, "x": x, "y": y, "demand": demand, "service_time": service, "tw": tw}
            )

        for request in self.base_day.requests:
            if cfg.drop_prob > 0 and rng.random() < cfg.drop_prob:
                continue
            requests.append(scaled(request, request.x, request.y, request.id))
            if cfg.dup_prob > 0 and rng.random() < cfg.dup_prob:
                dx, dy = rng.uniform(-cfg.jitter, cfg.jitter, size=2) if cfg.jitter > 0 else (0.0, 0.0)
                requests.append(
                    scaled(request, round(request.x + float(dx), 3), round(request.y + float(dy), 3), next_id)
                )
                next_id += 1

        return self.base_day.model_copy(update={"id": day_id, "requests": requests})

    def _acceptable(self, day: DayInstance) -> bool:
        cfg = self.config
        count = len(day.requests)
        if count == 0:
            return False
        if cfg.min_requests is not None and count < cfg.min_requests:
            return False
        if cfg.max_requests is not None and count > cfg.max_requests:
            return False
        candidate = HorizonInstance(
            name="candidate", commodities=self.commodities, vehicle_types=self.vehicle_types, days=[day]
        )
        try:
            validate_instance(candidate)
        except InstanceValidationError as e:
            logger.debug(f"День {day.id} отклонен: {e.message}")
            return False
        return True

    def generate(self, n_days: int, name: str = "synthetic") -> HorizonInstance:
        """
        Сгенерировать горизонт из n_days дней. Детерминирован при фиксированном seed
        """
        if n_days < 1:
            raise GenerationError("Число дней должно быть не меньше 1")
        rng = np.random.default_rng(self.seed)
        self.summary = []
        days: List[DayInstance] = []

        for offset in range(n_days):
            day_id = self.base_day.id + offset
            for attempt in range(settings.GENERATOR_MAX_RETRIES):
                day = self._perturb(rng, day_id)
                if self._acceptable(day):
                    break
            else:
                raise GenerationError(
                    f"Не удалось сгенерировать день {day_id} за {settings.GENERATOR_MAX_RETRIES} попыток",
                    {"day_id": day_id},
                )
            totals = {c: 0.0 for c in self.commodities}
            for request in day.requests:
                for c, qty in request.demand.items():
                    totals[c] += qty
            self.summary.append(DaySummary(day_id=day_id, requests=len(day.requests), totals=totals))
            days.append(day)

        logger.info(
            f"Сгенерировано {n_days} дн.: от {min(s.requests for s in self.summary)} "
            f"до {max(s.requests for s in self.summary)} заявок в день"
        )
        return HorizonInstance(
            name=name, commodities=self.commodities, vehicle_types=self.vehicle_types, days=days
        )


def generate_synthetic(
    base_day: DayInstance,
    vehicle_types: Sequence[VehicleType],
    commodities: Sequence[str],
    n_days: int,
    perturbation: Optional[PerturbationConfig] = None,
    seed: int = 0,
    name: str = "synthetic",
) -> HorizonInstance:
    """Сгенерировать синтетический горизонт"""
    return SyntheticGenerator(base_day, vehicle_types, commodities, perturbation, seed).generate(n_days, name)
