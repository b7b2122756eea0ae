import numpy as np
import pytest

from src.lp import INF, LinearProgram, LpStatus, Sense, solve_lp, to_mps
from src.utils.exceptions import DimensionError
from tests.oracles import tableau_minimize


def test_one_variable_lp():
    lp = LinearProgram()
    x = lp.add_variable("x", cost=1.0)
    lp.add_constraint([(x, 1.0)], Sense.GE, 1.0)
    solution = solve_lp(lp)
    assert solution.status == LpStatus.OPTIMAL
    assert solution.x == [pytest.approx(1.0)]
    assert solution.objective == pytest.approx(1.0)
    assert solution.duals == [pytest.approx(1.0)]


def test_infeasible_system():
    lp = LinearProgram()
    x = lp.add_variable("x", cost=1.0)
    lp.add_constraint([(x, 1.0)], Sense.LE, 0.0)
    lp.add_constraint([(x, 1.0)], Sense.GE, 1.0)
    assert solve_lp(lp).status == LpStatus.INFEASIBLE


def test_unbounded_direction():
    lp = LinearProgram()
    x = lp.add_variable("x", cost=-1.0)
    y = lp.add_variable("y", cost=0.0)
    lp.add_constraint([(x, 1.0), (y, -1.0)], Sense.LE, 1.0)
    assert solve_lp(lp).status == LpStatus.UNBOUNDED


def test_free_variable():
    lp = LinearProgram()
    x = lp.add_variable("x", cost=1.0, lower=-INF)
    lp.add_constraint([(x, 1.0)], Sense.GE, -3.0)
    solution = solve_lp(lp)
    assert solution.x[0] == pytest.approx(-3.0)


def test_equality_row():
    lp = LinearProgram()
    x = lp.add_variable("x", cost=1.0)
    y = lp.add_variable("y", cost=1.0)
    lp.add_constraint([(x, 1.0), (y, 2.0)], Sense.EQ, 4.0)
    solution = solve_lp(lp)
    assert solution.objective == pytest.approx(2.0)
    assert solution.x[1] == pytest.approx(2.0)


def test_bounds_override():
    lp = LinearProgram()
    x = lp.add_variable("x", cost=1.0, upper=10.0)
    lp.add_constraint([(x, 1.0)], Sense.GE, 0.5)
    assert solve_lp(lp, lower=[2.0], upper=[10.0]).objective == pytest.approx(2.0)
    assert solve_lp(lp, lower=[0.0], upper=[0.0]).status == LpStatus.INFEASIBLE


def test_empty_violated_row():
    lp = LinearProgram()
    lp.add_variable("x", cost=1.0)
    lp.add_constraint([], Sense.GE, 1.0)
    assert solve_lp(lp).status == LpStatus.INFEASIBLE


def test_entry_outside_dimensions():
    lp = LinearProgram()
    lp.add_variable("x")
    lp.add_constraint([(5, 1.0)], Sense.LE, 1.0)
    with pytest.raises(DimensionError):
        solve_lp(lp)


@pytest.mark.parametrize("seed", range(20))
def test_matches_dense_tableau(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(5, 16))
    m = int(rng.integers(3, 9))
    a = rng.uniform(-1.0, 3.0, size=(m, n))
    b = rng.uniform(1.0, 10.0, size=m)
    c = rng.uniform(-5.0, 5.0, size=n)
    upper = rng.uniform(1.0, 10.0, size=n)

    lp = LinearProgram(f"random{seed}")
    for j in range(n):
        lp.add_variable(cost=float(c[j]), upper=float(upper[j]))
    for i in range(m):
        lp.add_constraint([(j, float(a[i, j])) for j in range(n)], Sense.LE, float(b[i]))
    solution = solve_lp(lp)

    status, expected = tableau_minimize(c, np.vstack([a, np.eye(n)]), np.concatenate([b, upper]))
    assert status == "optimal"
    assert solution.status == LpStatus.OPTIMAL
    assert solution.objective == pytest.approx(expected, abs=1e-6, rel=1e-6)
    assert solution.dual_objective == pytest.approx(solution.objective, abs=1e-6, rel=1e-6)
    assert all(y <= 1e-9 for y in solution.duals)


def test_mps_sections():
    lp = LinearProgram("toy")
    x = lp.add_variable("x", cost=3.0, upper=4.0, integer=True)
    y = lp.add_variable("y", cost=-1.0, lower=-INF, upper=5.0)
    lp.add_constraint([(x, 1.0), (y, 1.0)], Sense.GE, 2.0)
    lp.add_constraint([(x, 1.0)], Sense.EQ, 1.0)
    text = to_mps(lp)
    sections = [line for line in text.splitlines() if line and not line.startswith(" ")]
    assert sections == ["NAME          toy", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"]
    assert "'INTORG'" in text and "'INTEND'" in text
    assert " G  R0" in text and " E  R1" in text
    assert " UP BND       C0" in text
    assert " MI BND       C1" in text
