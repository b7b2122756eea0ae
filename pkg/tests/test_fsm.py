import pytest

from src.schemas.budget import LnsBudget
from src.schemas.fsm import PricedFleetProblem
from src.schemas.routing import Route
from src.services.fsm import LnsSolver, best_routing_option, solve_exact, solve_fsm, solve_heuristic
from src.services.routing import DayContext, build_contexts, build_schedule
from src.utils.exceptions import InfeasibleError, SizeGuardError
from tests import oracles
from tests.factories import day, horizon, random_horizon, request, vehicle_type

BUDGET = LnsBudget(max_iterations=150, max_seconds=600.0)


def random_day(seed, n_requests=5, restricted=True):
    instance = random_horizon(seed, n_days=1, n_requests=n_requests, windows=restricted, compatibilities=restricted)
    ctx = build_contexts(instance)[0]
    options = oracles.day_options(instance.days[0], instance.vehicle_types, instance.commodities)
    return instance, ctx, options


def assert_valid_option(ctx: DayContext, option):
    assert sorted(stop for r in option.routes for stop in r.stops) == sorted(ctx.request_ids)
    counts = [0] * ctx.n_types
    for route in option.routes:
        counts[route.vehicle_type] += 1
        rebuilt = build_schedule(route.stops, ctx.vehicle_types[route.vehicle_type], ctx)
        assert isinstance(rebuilt, Route)
        assert rebuilt.cost == pytest.approx(route.cost)
    assert counts == option.fleet
    assert option.routing_cost == pytest.approx(sum(r.cost for r in option.routes))


@pytest.mark.parametrize("seed", [11, 12, 13])
@pytest.mark.parametrize("prices", [(0.0, 0.0), (3.0, 7.0), (40.0, 5.0)])
def test_exact_matches_enumeration(seed, prices):
    _, ctx, options = random_day(seed)
    option = solve_exact(ctx, PricedFleetProblem.unbounded(0, list(prices)))
    expected, _ = oracles.priced_optimum(options, prices)
    assert option.priced_cost == pytest.approx(expected, abs=1e-4)
    assert_valid_option(ctx, option)


def test_exact_high_prices_minimize_vehicles():
    _, ctx, options = random_day(21)
    option = solve_exact(ctx, PricedFleetProblem.unbounded(0, [1e6, 1e6]))
    assert sum(option.fleet) == min(sum(vec) for vec in options)


def test_exact_respects_bounds():
    _, ctx, options = random_day(22, restricted=False)
    problem = PricedFleetProblem(day_id=0, prices=[2.0, 2.0], lower_bounds=[1, 1], upper_bounds=[None, 2])
    option = solve_exact(ctx, problem)
    expected, _ = oracles.priced_optimum(options, [2.0, 2.0], [1, 1], [None, 2])
    assert option.priced_cost == pytest.approx(expected, abs=1e-4)
    assert option.fleet[0] >= 1 and 1 <= option.fleet[1] <= 2


def test_exact_without_feasible_fleet():
    _, ctx, _ = random_day(23)
    problem = PricedFleetProblem(day_id=0, prices=[0.0, 0.0], lower_bounds=[0, 0], upper_bounds=[0, 0])
    with pytest.raises(InfeasibleError):
        solve_exact(ctx, problem)


def test_exact_size_guard():
    requests = [request(k, float(k), 1.0) for k in range(1, 10)]
    instance = horizon([day(0, requests)], [vehicle_type(0)])
    ctx = build_contexts(instance)[0]
    with pytest.raises(SizeGuardError):
        solve_exact(ctx, PricedFleetProblem.unbounded(0, [1.0]))


@pytest.mark.parametrize("seed", [31, 32, 33, 34])
def test_heuristic_is_feasible_and_not_below_optimum(seed):
    _, ctx, options = random_day(seed)
    prices = [15.0, 25.0]
    option = solve_heuristic(ctx, PricedFleetProblem.unbounded(0, prices), BUDGET, seed=seed)
    expected, _ = oracles.priced_optimum(options, prices)
    assert option.priced_cost >= expected - 1e-6
    assert_valid_option(ctx, option)


@pytest.mark.slow
def test_heuristic_finds_exact_optimum_in_most_runs():
    _, ctx, _ = random_day(35, n_requests=6)
    problem = PricedFleetProblem.unbounded(0, [10.0, 3.0])
    exact = solve_exact(ctx, problem)
    budget = LnsBudget(max_iterations=1500, max_seconds=2.0)
    matches = 0
    for seed in range(100):
        option = solve_heuristic(ctx, problem, budget, seed=seed)
        assert option.priced_cost >= exact.priced_cost - 1e-6
        matches += option.priced_cost <= exact.priced_cost + 1e-6
    assert matches >= 90


def test_heuristic_single_request(toy_context):
    option = solve_heuristic(toy_context, PricedFleetProblem.unbounded(0, [5.0]), BUDGET, seed=1)
    assert option.fleet == [1]
    assert option.routing_cost == pytest.approx(30.0)
    assert option.priced_cost == pytest.approx(35.0)


def test_heuristic_is_deterministic():
    _, ctx, _ = random_day(41, n_requests=7)
    problem = PricedFleetProblem.unbounded(0, [10.0, 4.0])
    first = solve_heuristic(ctx, problem, BUDGET, seed=9)
    second = solve_heuristic(ctx, problem, BUDGET, seed=9)
    assert first.fleet == second.fleet
    assert first.routing_cost == second.routing_cost


def test_heuristic_honours_bounds():
    _, ctx, _ = random_day(42, restricted=False)
    problem = PricedFleetProblem(day_id=0, prices=[0.0, 0.0], lower_bounds=[1, 1], upper_bounds=[3, 3])
    option = solve_heuristic(ctx, problem, BUDGET, seed=2)
    assert 1 <= option.fleet[0] <= 3
    assert 1 <= option.fleet[1] <= 3
    assert_valid_option(ctx, option)


def test_lns_history_improves():
    _, ctx, _ = random_day(43, n_requests=8)
    solver = LnsSolver(ctx, PricedFleetProblem.unbounded(0, [20.0, 20.0]), BUDGET, seed=4)
    option = solver.solve()
    assert solver.history[-1] == pytest.approx(option.priced_cost)
    assert all(b < a for a, b in zip(solver.history, solver.history[1:]))


def test_best_routing_option_exact_is_minimum():
    _, ctx, options = random_day(51)
    option = best_routing_option(ctx, "exact")
    assert option.routing_cost == pytest.approx(min(options.values()), abs=1e-4)


def test_unknown_pricing_mode(toy_context):
    with pytest.raises(ValueError):
        solve_fsm(toy_context, PricedFleetProblem.unbounded(0, [0.0]), pricing="magic")
