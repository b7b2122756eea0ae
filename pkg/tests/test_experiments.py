"""
Направленные проверки на синтетических горизонтах: порядок методов,
простой, влияние качества прайсинга и рост горизонта
"""
import numpy as np
import pytest

from src.schemas.instance import PerturbationConfig
from src.services.bap import run_bap
from src.services.baselines import run_sa_best, run_uf
from src.services.colgen import run_rmh
from src.services.generator import SyntheticGenerator
from src.services.instance_service import prefix_horizon
from src.services.routing import build_contexts
from tests.factories import GOODS, day, exact_budget, heuristic_budget, request, vehicle_type

pytestmark = pytest.mark.slow

# аренда за день: крупный и малый тип
DAILY_RATES = (40.0, 22.0)
BASE_REQUESTS = [
    (4.0, 3.0, 3.0),
    (-2.0, 6.0, 4.0),
    (5.0, -5.0, 6.0),
    (-6.0, -1.0, 2.0),
    (3.0, 7.0, 5.0),
    (-4.0, -6.0, 3.0),
]


def synthetic_horizon(seed, n_days):
    types = [
        vehicle_type(0, fixed_cost=DAILY_RATES[0] * n_days, capacity=10.0, cost_per_distance=1.0),
        vehicle_type(1, fixed_cost=DAILY_RATES[1] * n_days, capacity=5.0, cost_per_distance=0.7),
    ]
    base = day(0, [request(k + 1, x, y, qty, (0, 400)) for k, (x, y, qty) in enumerate(BASE_REQUESTS)], shift=(0, 400))
    config = PerturbationConfig(scale_lo=0.6, scale_hi=1.4, drop_prob=0.3, min_requests=2)
    return SyntheticGenerator(base, types, [GOODS], config, seed).generate(n_days, name=f"suite-{seed}")


@pytest.fixture(scope="module")
def suite():
    return [synthetic_horizon(seed, n_days=6) for seed in (1, 2, 3, 4)]


@pytest.fixture(scope="module")
def suite_plans(suite):
    budget = exact_budget()
    budget.tree.max_nodes = 20
    plans = {"uf": [], "sa": [], "rmh": [], "bap": []}
    for instance in suite:
        contexts = build_contexts(instance)
        plans["uf"].append(run_uf(instance, budget, seed=0, contexts=contexts))
        plans["sa"].append(run_sa_best(instance, [1, 2], budget, seed=0, contexts=contexts))
        plans["rmh"].append(run_rmh(instance, budget, seed=0, contexts=contexts))
        plans["bap"].append(run_bap(instance, budget, seed=0, contexts=contexts, exhaustive=False))
    return plans


def mean_of(plans, field):
    return float(np.mean([getattr(plan, field) for plan in plans]))


def test_method_ordering(suite_plans):
    for bap, rmh in zip(suite_plans["bap"], suite_plans["rmh"]):
        assert bap.total_cost <= rmh.total_cost + 1e-6
    cost = {method: mean_of(plans, "total_cost") for method, plans in suite_plans.items()}
    assert cost["bap"] <= cost["rmh"] + 1e-6
    assert cost["rmh"] <= cost["sa"] + 1e-6
    assert cost["rmh"] <= cost["uf"] + 1e-6


def test_coordinated_fleet_has_less_idle(suite_plans):
    uf_idle = mean_of(suite_plans["uf"], "mean_idle")
    rmh_idle = mean_of(suite_plans["rmh"], "mean_idle")
    assert uf_idle > 0
    assert rmh_idle <= 0.6 * uf_idle


def test_fixed_cost_falls_with_pricing_quality(suite):
    fixed = []
    for k in (1, 3, 6):
        budget = heuristic_budget()
        budget.lns.max_solutions = k
        fixed.append(float(np.mean([run_rmh(instance, budget, seed=0).fixed_cost for instance in suite])))
    assert all(later <= earlier + 1e-6 for earlier, later in zip(fixed, fixed[1:]))


def test_day_scaling():
    instance = synthetic_horizon(7, n_days=10)
    contexts = build_contexts(instance)
    budget = exact_budget()
    rmh_per_day, uf_fixed_per_day = [], []
    for d in (4, 6, 8, 10):
        sub = prefix_horizon(instance, d, prorate=True)
        sub_contexts = {item.id: contexts[item.id] for item in sub.days}
        rmh_per_day.append(run_rmh(sub, budget, seed=0, contexts=sub_contexts).total_cost / d)
        uf_fixed_per_day.append(run_uf(sub, budget, seed=0, contexts=sub_contexts).fixed_cost / d)

    assert (max(rmh_per_day) - min(rmh_per_day)) / min(rmh_per_day) <= 0.15
    # цены дня в UF не зависят от d, парк - объединение по дням
    assert all(later >= earlier - 1e-6 for earlier, later in zip(uf_fixed_per_day, uf_fixed_per_day[1:]))
    assert uf_fixed_per_day[-1] > uf_fixed_per_day[0]
