import math

import pytest

from src.schemas.instance import PerturbationConfig
from src.services.generator import SyntheticGenerator, generate_synthetic
from src.services.instance_service import dump_instance
from src.utils.exceptions import GenerationError
from tests.factories import day, request, vehicle_type

BASE = day(
    7,
    [
        request(1, 3.0, 4.0, 2.0, tw=(0, 480)),
        request(2, -5.0, 1.0, 3.0, tw=(0, 480), service_time=5),
        request(3, 2.0, -6.0, 1.0, tw=(0, 480)),
    ],
    shift=(0, 480),
)
TYPES = [vehicle_type(0, capacity=20.0), vehicle_type(1, capacity=8.0)]


def generate(config=None, seed=0, n_days=4):
    return generate_synthetic(BASE, TYPES, ["goods"], n_days, config, seed)


def test_identity_config_repeats_base_day():
    instance = generate()
    assert [d.id for d in instance.days] == [7, 8, 9, 10]
    for generated in instance.days:
        assert generated.requests == BASE.requests


def test_same_seed_same_horizon():
    config = PerturbationConfig(scale_lo=0.5, scale_hi=1.5, drop_prob=0.3, dup_prob=0.3, jitter=1.0)
    assert dump_instance(generate(config, seed=3)) == dump_instance(generate(config, seed=3))
    assert dump_instance(generate(config, seed=3)) != dump_instance(generate(config, seed=4))


def test_duplicates_get_fresh_ids():
    instance = generate(PerturbationConfig(dup_prob=1.0, jitter=0.5), n_days=2)
    for generated in instance.days:
        ids = [r.id for r in generated.requests]
        assert len(ids) == 6
        assert len(set(ids)) == 6
        assert set(ids) >= {1, 2, 3}


def test_scaling_stays_in_range():
    instance = generate(PerturbationConfig(scale_lo=0.8, scale_hi=1.2), n_days=3)
    base = {r.id: r.demand["goods"] for r in BASE.requests}
    for generated in instance.days:
        for r in generated.requests:
            assert 0.8 * base[r.id] - 1e-3 <= r.demand["goods"] <= 1.2 * base[r.id] + 1e-3


def test_service_grows_with_demand():
    instance = generate(PerturbationConfig(service_per_unit=1.5), n_days=1)
    for r in instance.days[0].requests:
        original = BASE.request(r.id)
        assert r.service_time == original.service_time + math.ceil(1.5 * r.demand["goods"])


def test_window_presets_come_from_shift():
    instance = generate(PerturbationConfig(window_presets=True), n_days=3)
    allowed = {(0, 240), (240, 480), (0, 480)}
    assert all(tuple(r.tw) in allowed for d in instance.days for r in d.requests)


def test_summary_matches_days():
    generator = SyntheticGenerator(BASE, TYPES, ["goods"], PerturbationConfig(drop_prob=0.4), seed=5)
    instance = generator.generate(5)
    assert [s.day_id for s in generator.summary] == [d.id for d in instance.days]
    for item, generated in zip(generator.summary, instance.days):
        assert item.requests == len(generated.requests) >= 1
        assert item.totals["goods"] == pytest.approx(sum(r.demand["goods"] for r in generated.requests))


def test_unreachable_request_count_fails():
    with pytest.raises(GenerationError):
        generate(PerturbationConfig(min_requests=10), n_days=1)


def test_zero_days_rejected():
    with pytest.raises(GenerationError):
        generate(n_days=0)
