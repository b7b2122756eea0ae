import os

import hypothesis
import numpy as np
import pytest

from src.core.config import settings
from src.services.routing import DayContext
from tests.factories import day, horizon, request, vehicle_type

np.seterr(all="warn")

hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=25, deadline=None)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, deadline=None)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))


@pytest.fixture(autouse=True)
def strict_settings(monkeypatch):
    """Проверки инвариантов включены, подзадачи решаются последовательно"""
    monkeypatch.setattr(settings, "STRICT_INVARIANTS", True)
    monkeypatch.setattr(settings, "PARALLELISM", 1)
    monkeypatch.setattr(settings, "EXECUTOR", "thread")
    monkeypatch.setattr(settings, "BAP_EXHAUSTIVE", None)


@pytest.fixture
def toy_type():
    """Тип ТС из примера: 2 за единицу пути, 1 за минуту, скорость 1"""
    return vehicle_type(0, fixed_cost=100.0, capacity=10.0, cost_per_distance=2.0, cost_per_time=1.0)


@pytest.fixture
def toy_instance(toy_type):
    return horizon([day(0, [request(1, 3.0, 4.0, 5.0)])], [toy_type])


@pytest.fixture
def toy_context(toy_instance):
    return DayContext(toy_instance.days[0], toy_instance.vehicle_types, toy_instance.commodities)


ALL_DAY = (0, 300)


@pytest.fixture
def two_type_instance():
    """
    Два дня по три заявки, крупный дорогой и малый дешевый тип;
    малый не везет самую большую заявку второго дня
    """
    types = [
        vehicle_type(0, fixed_cost=120.0, capacity=12.0, cost_per_distance=1.5, cost_per_time=0.2),
        vehicle_type(1, fixed_cost=60.0, capacity=5.0, cost_per_distance=1.0, cost_per_time=0.1),
    ]
    days = [
        day(
            0,
            [
                request(1, 4.0, 3.0, 3.0, ALL_DAY),
                request(2, -2.0, 6.0, 4.0, ALL_DAY),
                request(3, 5.0, -5.0, 2.0, ALL_DAY),
            ],
            shift=ALL_DAY,
        ),
        day(
            1,
            [
                request(1, -6.0, -1.0, 7.0, ALL_DAY),
                request(2, 3.0, 3.0, 2.0, ALL_DAY),
                request(3, 1.0, -7.0, 3.0, (20, 120)),
            ],
            shift=ALL_DAY,
        ),
    ]
    return horizon(days, types, name="two-type")
