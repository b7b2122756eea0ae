import pytest

from src.schemas.bap import BapNode
from src.services.bap import BranchAndPrice, branch, run_bap, select_node
from src.services.colgen import run_rmh
from src.utils.exceptions import BranchingError
from tests import oracles
from tests.factories import exact_budget, heuristic_budget, random_horizon


def root(n_types=2):
    return BapNode(id=0, lower=[0] * n_types, upper=[None] * n_types)


def test_branch_on_fraction():
    left, right = branch(root(), 0, 2.4, 1)
    assert (left.id, right.id) == (1, 2)
    assert left.upper == [2, None] and left.lower == [0, 0]
    assert right.lower == [3, 0] and right.upper == [None, None]
    assert left.parent == right.parent == 0
    assert left.depth == right.depth == 1


def test_branch_below_one_bans_type():
    left, right = branch(root(), 1, 0.5, 7)
    assert left.upper == [None, 0]
    assert right.lower == [0, 1]
    assert left.forbids([0, 1]) and not right.forbids([0, 1])


def test_branch_keeps_inherited_bounds():
    node = BapNode(id=3, lower=[1, 0], upper=[4, 2], depth=2)
    left, right = branch(node, 0, 2.5, 10)
    assert left.upper == [2, 2] and left.lower == [1, 0]
    assert right.lower == [3, 0] and right.upper == [4, 2]


def test_branch_rejects_integral_value():
    with pytest.raises(BranchingError):
        branch(root(), 0, 2.0, 1)
    with pytest.raises(BranchingError):
        branch(BapNode(id=0, lower=[3], upper=[None]), 0, 1.5, 1)


def test_node_rejects_crossed_bounds():
    with pytest.raises(ValueError):
        BapNode(id=0, lower=[3], upper=[2])


def test_select_node_prefers_forbidding_nodes():
    a = BapNode(id=1, lower=[0], upper=[None], z_int=100.0)
    b = BapNode(id=2, lower=[0], upper=[1], z_int=110.0)
    assert select_node([a, b], [2]) is b
    assert select_node([a, b], None) is a
    assert select_node([a], [2]) is None


def test_select_node_tie_by_id():
    a = BapNode(id=4, lower=[0], upper=[None], z_int=100.0)
    b = BapNode(id=3, lower=[0], upper=[None], z_int=100.0)
    assert select_node([a, b], None) is b


@pytest.mark.slow
def test_exhaustive_exact_search_is_optimal(two_type_instance):
    plan = run_bap(two_type_instance, exact_budget(), seed=0, exhaustive=True)
    assert plan.total_cost == pytest.approx(oracles.brute_force_optimum(two_type_instance), abs=1e-4)
    assert plan.method.value == "BAP"
    assert plan.stats["exhaustive"] is True


def tiny_horizon(seed):
    """2-4 дня, 3-6 заявок, 2-3 типа; окна и совместимости через раз"""
    return random_horizon(
        seed,
        n_days=2 + seed % 3,
        n_requests=3 + (seed // 3) % 4,
        n_types=2 + (seed // 2) % 2,
        windows=seed % 2 == 0,
        compatibilities=seed % 4 < 2,
    )


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_exhaustive_search_on_random_horizons(seed):
    instance = tiny_horizon(seed)
    budget = exact_budget()
    budget.tree.max_nodes = 100_000
    search = BranchAndPrice(instance, budget, seed=seed, exhaustive=True)
    plan = search.run()
    assert plan.stats["stop"] == "exhausted"
    optimum = oracles.brute_force_optimum(instance)
    assert plan.total_cost == pytest.approx(optimum, abs=1e-6)


@pytest.mark.slow
def test_exhaustive_search_ignores_gap_tolerance(two_type_instance):
    budget = exact_budget()
    budget.cg.gap_eps = 0.05
    search = BranchAndPrice(two_type_instance, budget, seed=0, exhaustive=True)
    assert search.cg_budget.gap_eps == 0.0
    assert budget.cg.gap_eps == 0.05
    plan = search.run()
    assert plan.total_cost == pytest.approx(oracles.brute_force_optimum(two_type_instance), abs=1e-6)


def test_heuristic_search_keeps_gap_tolerance(two_type_instance):
    budget = heuristic_budget()
    budget.cg.gap_eps = 0.05
    assert BranchAndPrice(two_type_instance, budget, seed=0).cg_budget.gap_eps == 0.05


@pytest.mark.parametrize("max_nodes", [1, 2, 3])
def test_node_limit_is_respected(two_type_instance, max_nodes):
    budget = exact_budget()
    budget.tree.max_nodes = max_nodes
    plan = run_bap(two_type_instance, budget, seed=0, exhaustive=True)
    assert 1 <= plan.stats["nodes"] <= max_nodes


@pytest.mark.parametrize("seed", [1, 2])
def test_not_worse_than_rmh(two_type_instance, seed):
    budget = heuristic_budget()
    rmh = run_rmh(two_type_instance, budget, seed)
    bap = run_bap(two_type_instance, budget, seed)
    assert bap.total_cost <= rmh.total_cost + 1e-6
    assert bap.total_cost >= oracles.brute_force_optimum(two_type_instance) - 1e-4


def test_single_day_needs_no_branching():
    instance = random_horizon(9, n_days=1, n_requests=4)
    budget = exact_budget()
    bap = run_bap(instance, budget, seed=0)
    rmh = run_rmh(instance, budget, seed=0)
    assert bap.total_cost == pytest.approx(rmh.total_cost)
    assert bap.stats["created"] == 1


def test_search_records_nodes(two_type_instance):
    search = BranchAndPrice(two_type_instance, exact_budget(), seed=0, exhaustive=True)
    plan = search.run()
    assert search.nodes[0].status in ("solved", "pruned")
    assert all(node.status != "open" for node in search.nodes)
    assert search.lp_bound <= plan.total_cost + 1e-6
    for node in search.nodes[1:]:
        assert node.parent is not None and node.depth >= 1
