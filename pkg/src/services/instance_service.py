import json
import logging
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from src.schemas.instance import DayInstance, HorizonInstance
from src.schemas.routing import Infeasibility
from src.utils.exceptions import (
    InstanceParseError,
    InstanceSchemaError,
    InstanceValidationError,
)

logger = logging.getLogger(__name__)

# Ошибки pydantic, означающие несоответствие схеме (а не нарушение ограничения)
SCHEMA_ERROR_TYPES = {
    "missing",
    "extra_forbidden",
    "model_type",
    "model_attributes_type",
    "dict_type",
    "list_type",
    "tuple_type",
    "int_type",
    "int_parsing",
    "int_from_float",
    "float_type",
    "float_parsing",
    "string_type",
    "bool_type",
    "too_short",
    "too_long",
}


def _locate(data: Any, loc: tuple) -> Dict[str, Optional[int]]:
    """Найти ID дня и заявки по пути ошибки pydantic"""
    day_id = request_id = None
    try:
        if len(loc) >= 2 and loc[0] == "days":
            day = data["days"][loc[1]]
            day_id = day.get("id")
            if len(loc) >= 4 and loc[2] == "requests":
                request_id = day["requests"][loc[3]].get("id")
    except (KeyError, IndexError, TypeError, AttributeError):
        pass
    return {"day_id": day_id, "request_id": request_id}


def load_instance(text: str) -> HorizonInstance:
    """
    Загрузить и полностью проверить экземпляр из JSON
    """
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise InstanceParseError(f"Некорректный JSON: {e}")

    try:
        instance = HorizonInstance.model_validate(data)
    except ValidationError as e:
        error = e.errors()[0]
        path = ".".join(str(part) for part in error["loc"])
        if error["type"] in SCHEMA_ERROR_TYPES:
            raise InstanceSchemaError(f"Ошибка схемы в '{path}': {error['msg']}", path=path)
        where = _locate(data, error["loc"])
        raise InstanceValidationError(
            f"Недопустимое значение в '{path}': {error['msg']}",
            code="invalid_value",
            day_id=where["day_id"],
            request_id=where["request_id"],
        )

    validate_instance(instance)
    logger.info(
        f"Загружен экземпляр '{instance.name}': {len(instance.days)} дн., {instance.n_types} типов ТС"
    )
    return instance


def dump_instance(instance: HorizonInstance) -> str:
    """Сериализовать экземпляр в JSON"""
    return instance.model_dump_json(indent=2)


def validate_instance(instance: HorizonInstance) -> None:
    """
    Проверить инварианты экземпляра. Первое нарушение - InstanceValidationError
    """
    # Импорт здесь: routing зависит от схем, но не от сервиса экземпляров
    from src.services.routing import DayContext, singleton_routes

    if not instance.days:
        raise InstanceValidationError("Горизонт должен содержать хотя бы один день", code="no_days")
    if not instance.vehicle_types:
        raise InstanceValidationError("Должен быть хотя бы один тип ТС", code="no_vehicle_types")
    if len(set(instance.commodities)) != len(instance.commodities):
        raise InstanceValidationError("Повторяющиеся товары в commodities", code="duplicate_commodity")

    for position, vt in enumerate(instance.vehicle_types):
        if vt.id != position:
            raise InstanceValidationError(
                f"ID типов ТС должны идти подряд с 0, на позиции {position} найден {vt.id}",
                code="vehicle_type_ids",
            )
        for commodity in vt.capacity:
            if commodity not in instance.commodities:
                raise InstanceValidationError(
                    f"Тип ТС {vt.id}: товар '{commodity}' не объявлен в commodities",
                    code="unknown_commodity",
                )

    type_ids = {vt.id for vt in instance.vehicle_types}
    seen_days = set()
    for day in instance.days:
        if day.id in seen_days:
            raise InstanceValidationError(f"Повторяющийся ID дня {day.id}", code="duplicate_day", day_id=day.id)
        seen_days.add(day.id)
        if not day.requests:
            raise InstanceValidationError(f"День {day.id} не содержит заявок", code="empty_day", day_id=day.id)

        seen_requests = set()
        for request in day.requests:
            def fail(message: str, code: str):
                raise InstanceValidationError(message, code=code, day_id=day.id, request_id=request.id)

            if request.id in seen_requests:
                fail(f"День {day.id}: повторяющийся ID заявки {request.id}", "duplicate_request")
            seen_requests.add(request.id)

            if request.tw[0] < day.shift[0] or request.tw[1] > day.shift[1]:
                fail(f"День {day.id}, заявка {request.id}: окно {list(request.tw)} вне смены", "window_outside_shift")

            for commodity in request.demand:
                if commodity not in instance.commodities:
                    fail(
                        f"День {day.id}, заявка {request.id}: товар '{commodity}' не объявлен в commodities",
                        "unknown_commodity",
                    )

            unknown = [t for t in request.allowed_types if t not in type_ids]
            if unknown:
                fail(f"День {day.id}, заявка {request.id}: неизвестные типы ТС {unknown}", "unknown_vehicle_type")

            demanded = [c for c, qty in request.demand.items() if qty > 0]
            capable = [
                vt for vt in instance.vehicle_types
                if request.allows(vt.id) and all(vt.capacity_of(c) > 0 for c in demanded)
            ]
            if not capable:
                fail(
                    f"День {day.id}, заявка {request.id}: unservable request - "
                    f"ни один допустимый тип не перевозит {demanded}",
                    "unservable_request",
                )

        ctx = DayContext(day, instance.vehicle_types, instance.commodities)
        singleton = singleton_routes(ctx)
        if isinstance(singleton, Infeasibility):
            raise InstanceValidationError(
                f"День {day.id}, заявка {singleton.request_id}: unservable request - "
                f"отдельный маршрут недопустим ({singleton.reason})",
                code="unservable_request",
                day_id=day.id,
                request_id=singleton.request_id,
            )


def total_demand(instance: HorizonInstance, day: DayInstance, commodity: str) -> float:
    """
    Суммарный спрос дня по товару
    """
    if commodity not in instance.commodities:
        raise InstanceValidationError(
            f"Товар '{commodity}' не объявлен в commodities", code="unknown_commodity", day_id=day.id
        )
    return float(sum(request.demand.get(commodity, 0.0) for request in day.requests))


def total_load(day: DayInstance) -> float:
    """Суммарный спрос дня по всем товарам"""
    return float(sum(request.total_demand for request in day.requests))


def prefix_horizon(instance: HorizonInstance, n_days: int, prorate: bool = False) -> HorizonInstance:
    """
    Первые n_days дней горизонта, I(d). При prorate постоянные затраты
    пересчитываются на длину префикса: b_t·d/|I|
    """
    if not 1 <= n_days <= len(instance.days):
        raise ValueError(f"Число дней должно быть от 1 до {len(instance.days)}")
    update = {"name": f"{instance.name}-d{n_days}", "days": list(instance.days[:n_days])}
    if prorate and n_days < len(instance.days):
        share = n_days / len(instance.days)
        update["vehicle_types"] = [
            vt.model_copy(update={"fixed_cost": vt.fixed_cost * share}) for vt in instance.vehicle_types
        ]
    return instance.model_copy(update=update)


def split_horizon(instance: HorizonInstance, parts: int) -> List[HorizonInstance]:
    """Разбить горизонт на parts частей равной длины (остаток отбрасывается)"""
    if parts < 1 or parts > len(instance.days):
        raise ValueError(f"Число частей должно быть от 1 до {len(instance.days)}")
    size = len(instance.days) // parts
    return [
        instance.model_copy(
            update={
                "name": f"{instance.name}-part{k + 1}",
                "days": list(instance.days[k * size:(k + 1) * size]),
            }
        )
        for k in range(parts)
    ]


def drop_vehicle_types(instance: HorizonInstance, k: int) -> HorizonInstance:
    """
    Удалить k последних типов ТС. Экземпляр перепроверяется: заявка, которую
    больше некому обслужить, дает InstanceValidationError
    """
    if not 0 <= k < instance.n_types:
        raise ValueError(f"Можно удалить от 0 до {instance.n_types - 1} типов")
    kept = instance.vehicle_types[: instance.n_types - k]
    kept_ids = {vt.id for vt in kept}
    days = []
    for day in instance.days:
        requests = []
        for request in day.requests:
            allowed = [t for t in request.allowed_types if t in kept_ids]
            if request.allowed_types and not allowed:
                raise InstanceValidationError(
                    f"День {day.id}, заявка {request.id}: unservable request - "
                    f"все допустимые типы удалены",
                    code="unservable_request",
                    day_id=day.id,
                    request_id=request.id,
                )
            requests.append(request.model_copy(update={"allowed_types": allowed}))
        days.append(day.model_copy(update={"requests": requests}))
    reduced = instance.model_copy(
        update={"name": f"{instance.name}-t{len(kept)}", "vehicle_types": list(kept), "days": days}
    )
    validate_instance(reduced)
    return reduced
