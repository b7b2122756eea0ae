from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class VehicleType(BaseModel):
    """Тип транспортного средства"""
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., ge=0, description="Индекс типа в множестве T")
    fixed_cost: float = Field(..., ge=0, description="Фиксированная стоимость за горизонт (b_t)")
    capacity: Dict[str, float] = Field(..., description="Вместимость по каждому товару (c_t)")
    cost_per_distance: float = Field(..., ge=0, description="Стоимость единицы расстояния")
    cost_per_time: float = Field(..., ge=0, description="Стоимость минуты работы")
    speed: float = Field(..., gt=0, description="Скорость, единиц расстояния в минуту")

    @field_validator("capacity")
    def validate_capacity(cls, v):
        if any(qty < 0 for qty in v.values()):
            raise ValueError("Вместимость не может быть отрицательной")
        if not any(qty > 0 for qty in v.values()):
            raise ValueError("Хотя бы одна вместимость должна быть положительной")
        return v

    def capacity_of(self, commodity: str) -> float:
        """Вместимость по товару (0, если товар не указан)"""
        return self.capacity.get(commodity, 0.0)


class Depot(BaseModel):
    """Координаты депо"""
    model_config = ConfigDict(frozen=True)

    x: float
    y: float


class Request(BaseModel):
    """Заявка клиента на один день"""
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., description="ID заявки, уникален в пределах дня")
    x: float = Field(..., description="Координата X")
    y: float = Field(..., description="Координата Y")
    demand: Dict[str, float] = Field(..., description="Спрос по товарам")
    tw: Tuple[int, int] = Field(..., description="Временное окно [earliest, latest], минуты")
    service_time: int = Field(..., ge=0, description="Время обслуживания, минуты")
    allowed_types: List[int] = Field(default_factory=list, description="Допустимые типы ТС (пусто - все)")

    @field_validator("demand")
    def validate_demand(cls, v):
        if any(qty < 0 for qty in v.values()):
            raise ValueError("Спрос не может быть отрицательным")
        if sum(v.values()) <= 0:
            raise ValueError("Суммарный спрос заявки должен быть положительным")
        return v

    @field_validator("tw")
    def validate_time_window(cls, v):
        if v[0] > v[1]:
            raise ValueError("Начало временного окна позже его конца")
        return v

    @property
    def total_demand(self) -> float:
        return sum(self.demand.values())

    def allows(self, type_id: int) -> bool:
        """Допускает ли заявка обслуживание типом ТС"""
        return not self.allowed_types or type_id in self.allowed_types


class DayInstance(BaseModel):
    """Один день горизонта - задача VRP(i)"""
    model_config = ConfigDict(frozen=True)

    id: int = Field(..., description="Индекс дня i")
    depot: Depot
    shift: Tuple[int, int] = Field(..., description="Смена [start, end], минуты")
    requests: List[Request] = Field(default_factory=list)

    @field_validator("shift")
    def validate_shift(cls, v):
        if v[0] > v[1]:
            raise ValueError("Начало смены позже ее конца")
        return v

    def request(self, request_id: int) -> Request:
        for request in self.requests:
            if request.id == request_id:
                return request
        raise KeyError(request_id)


class HorizonInstance(BaseModel):
    """Экземпляр задачи LHFSM: типы ТС и дни горизонта"""
    model_config = ConfigDict(frozen=True)

    name: str
    commodities: List[str]
    vehicle_types: List[VehicleType]
    days: List[DayInstance]

    @property
    def n_types(self) -> int:
        return len(self.vehicle_types)

    @property
    def fixed_costs(self) -> List[float]:
        return [vehicle_type.fixed_cost for vehicle_type in self.vehicle_types]

    def day(self, day_id: int) -> DayInstance:
        for day in self.days:
            if day.id == day_id:
                return day
        raise KeyError(day_id)


class PerturbationConfig(BaseModel):
    """Параметры возмущения истории при генерации дней"""
    scale_lo: float = Field(1.0, gt=0, description="Нижняя граница множителя спроса")
    scale_hi: float = Field(1.0, gt=0, description="Верхняя граница множителя спроса")
    drop_prob: float = Field(0.0, ge=0, le=1, description="Вероятность удалить заявку")
    dup_prob: float = Field(0.0, ge=0, le=1, description="Вероятность продублировать заявку")
    jitter: float = Field(0.0, ge=0, description="Сдвиг координат дубликатов")
    service_per_unit: float = Field(0.0, ge=0, description="Рост времени обслуживания на единицу груза")
    window_presets: bool = Field(False, description="Назначать окна утро/день/весь день")
    min_requests: Optional[int] = Field(None, ge=1)
    max_requests: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def validate_ranges(self):
        if self.scale_lo > self.scale_hi:
            raise ValueError("scale_lo не может превышать scale_hi")
        if (
            self.min_requests is not None
            and self.max_requests is not None
            and self.min_requests > self.max_requests
        ):
            raise ValueError("min_requests не может превышать max_requests")
        return self


class DaySummary(BaseModel):
    """Сводка по сгенерированному дню"""
    day_id: int
    requests: int
    totals: Dict[str, float]
