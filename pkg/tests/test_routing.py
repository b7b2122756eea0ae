import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from src.schemas.routing import Infeasibility, Route
from src.services.routing import DayContext, build_contexts, build_schedule, exact_vrp, singleton_routes
from src.utils.exceptions import InfeasibleError, SizeGuardError
from tests import oracles
from tests.factories import day, horizon, random_horizon, request, vehicle_type


def context_for(requests, types, shift=(0, 1000)):
    instance = horizon([day(0, requests, shift=shift)], types)
    return instance, DayContext(instance.days[0], instance.vehicle_types, instance.commodities)


def test_single_stop_route(toy_type, toy_context):
    route = build_schedule([1], toy_type, toy_context)
    assert isinstance(route, Route)
    assert route.distance == pytest.approx(10.0)
    assert route.duration == pytest.approx(10.0)
    assert route.cost == pytest.approx(30.0)
    assert route.arrivals == [pytest.approx(5.0)]


def test_departure_absorbs_waiting(toy_type):
    _, ctx = context_for([request(1, 3.0, 4.0, tw=(20, 30))], [toy_type])
    route = build_schedule([1], toy_type, ctx)
    assert route.departure == pytest.approx(15.0)
    assert route.starts == [pytest.approx(20.0)]
    assert route.duration == pytest.approx(10.0)
    assert route.cost == pytest.approx(30.0)


def test_departure_limited_by_later_window(toy_type):
    # ожидание у второй заявки нельзя убрать целиком: окно первой закрывается в 6
    _, ctx = context_for([request(1, 3.0, 4.0, tw=(0, 6)), request(2, 3.0, 8.0, tw=(40, 60))], [toy_type])
    route = build_schedule([1, 2], toy_type, ctx)
    assert route.departure == pytest.approx(1.0)
    assert route.return_time == pytest.approx(40.0 + np.hypot(3.0, 8.0))


@pytest.mark.parametrize(
    "requests, types, shift, stops, reason, culprit",
    [
        ([request(1, 3.0, 4.0, tw=(0, 2))], [vehicle_type(0)], (0, 1000), [1], "window", 1),
        ([request(1, 1.0, 0.0, 6.0), request(2, 2.0, 0.0, 6.0)], [vehicle_type(0)], (0, 1000), [1, 2], "capacity", 2),
        ([request(1, 1.0, 0.0, allowed_types=[1])], [vehicle_type(0), vehicle_type(1)], (0, 1000), [1], "compatibility", 1),
        ([request(1, 3.0, 4.0, tw=(0, 8))], [vehicle_type(0)], (0, 8), [1], "shift", 1),
        ([request(1, 3.0, 4.0, 20.0, tw=(0, 2), allowed_types=[1])], [vehicle_type(0), vehicle_type(1)], (0, 1000), [1], "compatibility", 1),
    ],
)
def test_infeasibility_reasons(requests, types, shift, stops, reason, culprit):
    _, ctx = context_for(requests, types, shift)
    result = build_schedule(stops, types[0], ctx)
    assert isinstance(result, Infeasibility)
    assert result.reason == reason
    assert result.request_id == culprit


def test_bad_stop_lists(toy_type, toy_context):
    with pytest.raises(ValueError):
        build_schedule([], toy_type, toy_context)
    with pytest.raises(ValueError):
        build_schedule([1, 1], toy_type, toy_context)


@given(seed=st.integers(0, 10_000), data=st.data())
def test_schedule_matches_direct_walk(seed, data):
    instance = random_horizon(seed, n_days=1, n_requests=5, windows=True, compatibilities=True)
    the_day = instance.days[0]
    ctx = DayContext(the_day, instance.vehicle_types, instance.commodities)
    ids = [r.id for r in the_day.requests]
    stops = data.draw(st.permutations(ids))[: data.draw(st.integers(1, len(ids)))]
    vt = instance.vehicle_types[data.draw(st.integers(0, instance.n_types - 1))]

    expected = oracles.route_cost(the_day, vt, stops, instance.commodities)
    result = build_schedule(stops, vt, ctx)
    if expected is None:
        assert isinstance(result, Infeasibility)
    else:
        assert isinstance(result, Route)
        assert result.cost == pytest.approx(expected, abs=1e-4)


def test_singleton_routes_pick_cheapest_type():
    types = [vehicle_type(0, cost_per_distance=2.0), vehicle_type(1, cost_per_distance=1.0)]
    _, ctx = context_for([request(1, 3.0, 4.0), request(2, 6.0, 8.0, allowed_types=[0])], types)
    routes = singleton_routes(ctx)
    assert [(r.stops, r.vehicle_type) for r in routes] == [([1], 1), ([2], 0)]
    assert routes[1].cost == pytest.approx(40.0)


def test_exact_vrp_needs_two_vehicles_for_opposite_windows():
    requests = [request(1, 10.0, 0.0, tw=(0, 10)), request(2, -10.0, 0.0, tw=(0, 10))]
    _, ctx = context_for(requests, [vehicle_type(0)])
    with pytest.raises(InfeasibleError):
        exact_vrp(ctx, [1])
    solution = exact_vrp(ctx, [2])
    assert solution.fleet_used == [2]
    assert solution.operational_cost == pytest.approx(40.0)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_exact_vrp_matches_enumeration(seed):
    instance = random_horizon(seed, n_days=1, n_requests=5, windows=True, compatibilities=True)
    ctx = build_contexts(instance)[0]
    options = oracles.day_options(instance.days[0], instance.vehicle_types, instance.commodities)
    for fleet in itertools.product(range(3), repeat=2):
        allowed = [cost for vec, cost in options.items() if all(v <= f for v, f in zip(vec, fleet))]
        if not allowed:
            with pytest.raises(InfeasibleError):
                exact_vrp(ctx, list(fleet))
            continue
        solution = exact_vrp(ctx, list(fleet))
        assert solution.operational_cost == pytest.approx(min(allowed), abs=1e-4)
        assert all(u <= f for u, f in zip(solution.fleet_used, fleet))
        assert sorted(stop for r in solution.routes for stop in r.stops) == [r.id for r in instance.days[0].requests]


def test_exact_vrp_size_guard():
    requests = [request(k, float(k), 0.0) for k in range(1, 11)]
    _, ctx = context_for(requests, [vehicle_type(0)])
    with pytest.raises(SizeGuardError):
        exact_vrp(ctx, [10])
