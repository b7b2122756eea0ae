import io
import json

import pandas as pd
import pytest

from src.cli import run
from src.cli.commands import DAYS_COLUMNS, TYPES_COLUMNS
from src.cli.report import PER_DAY_COLUMNS
from src.services.instance_service import dump_instance, load_instance
from tests import oracles
from tests.factories import day, demand_day, horizon, random_horizon, request, vehicle_type


def invoke(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    code = run(list(argv), stdout, stderr)
    return code, stdout.getvalue(), stderr.getvalue()


def write_instance(path, instance):
    path.write_text(dump_instance(instance), encoding="utf-8")
    return str(path)


@pytest.fixture
def three_day_file(tmp_path):
    return write_instance(tmp_path / "three.json", random_horizon(71, n_days=3, n_requests=3))


def test_generate_writes_instance_and_summary(tmp_path):
    base = write_instance(
        tmp_path / "base.json",
        horizon([day(7, [request(1, 3.0, 4.0, 2.0), request(2, -1.0, 5.0, 3.0)])], [vehicle_type(0)]),
    )
    out = tmp_path / "horizon.json"
    code, stdout, _ = invoke("generate", "--base", base, "--days", "3", "--seed", "1", "--out", str(out), "--dup", "0.5")
    assert code == 0
    instance = load_instance(out.read_text(encoding="utf-8"))
    assert [d.id for d in instance.days] == [7, 8, 9]

    summary = pd.read_csv(io.StringIO(stdout))
    assert list(summary.columns) == ["day_id", "requests", "total_goods"]
    assert summary["requests"].tolist() == [len(d.requests) for d in instance.days]

    again = tmp_path / "again.json"
    invoke("generate", "--base", base, "--days", "3", "--seed", "1", "--out", str(again), "--dup", "0.5")
    assert again.read_text(encoding="utf-8") == out.read_text(encoding="utf-8")


def test_generate_split(tmp_path):
    base = write_instance(tmp_path / "base.json", horizon([day(0, [request(1, 3.0, 4.0)])], [vehicle_type(0)]))
    out = tmp_path / "h.json"
    code, _, _ = invoke("generate", "--base", base, "--days", "4", "--out", str(out), "--split", "2")
    assert code == 0
    parts = [load_instance((tmp_path / f"h.part{k}.json").read_text(encoding="utf-8")) for k in (1, 2)]
    assert [[d.id for d in part.days] for part in parts] == [[0, 1], [2, 3]]


def test_split_larger_than_horizon_writes_nothing(tmp_path):
    base = write_instance(tmp_path / "base.json", horizon([day(0, [request(1, 3.0, 4.0)])], [vehicle_type(0)]))
    out = tmp_path / "h.json"
    code, _, stderr = invoke("generate", "--base", base, "--days", "3", "--out", str(out), "--split", "4")
    assert code == 2
    assert json.loads(stderr)["error"]["type"] == "UsageError"
    assert not out.exists()
    assert list(tmp_path.glob("h.part*.json")) == []


def test_generation_failure_exit_code(tmp_path):
    base = write_instance(tmp_path / "base.json", horizon([day(0, [request(1, 3.0, 4.0)])], [vehicle_type(0)]))
    code, _, stderr = invoke(
        "generate", "--base", base, "--days", "1", "--out", str(tmp_path / "x.json"), "--min-requests", "5"
    )
    assert code == 3
    assert json.loads(stderr)["error"]["type"] == "GenerationError"


def test_solve_repeats_without_timing(three_day_file):
    code, stdout, _ = invoke("solve", "--method", "uf", "--instance", three_day_file, "--pricing", "exact", "--repeat", "2")
    assert code == 0
    document = json.loads(stdout)
    assert document["method"] == "uf"
    assert len(document["plans"]) == 2
    assert [plan["seed"] for plan in document["plans"]] == [0, 1]
    assert all("wall_time" not in plan for plan in document["plans"])
    assert document["aggregate"]["runs"] == 2
    assert document["aggregate"]["std_cost"] == pytest.approx(0.0)


def test_solve_with_timing(three_day_file):
    code, stdout, _ = invoke("solve", "--method", "uf", "--instance", three_day_file, "--pricing", "exact", "--timing")
    assert code == 0
    assert json.loads(stdout)["plans"][0]["wall_time"] >= 0.0


def test_solve_per_day_csv(three_day_file, tmp_path):
    csv_path = tmp_path / "days.csv"
    code, _, _ = invoke(
        "solve", "--method", "uf", "--instance", three_day_file, "--pricing", "exact",
        "--out", str(tmp_path / "plan.json"), "--csv", str(csv_path),
    )
    assert code == 0
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == PER_DAY_COLUMNS
    assert PER_DAY_COLUMNS[:3] == ["day_id", "option_cost", "idle"]
    assert frame["day_id"].tolist() == [0, 1, 2]
    assert (frame["method"] == "UF").all()
    plan = json.loads((tmp_path / "plan.json").read_text(encoding="utf-8"))["plans"][0]
    assert frame["option_cost"].tolist() == pytest.approx([day["routing_cost"] for day in plan["per_day"]])


@pytest.mark.parametrize(
    "flags",
    [
        ("--method", "rmh", "--parallel", "2"),
        ("--method", "sa", "--m", "1,2"),
        ("--method", "uf", "--repeat", "2"),
    ],
)
def test_solve_repeated_with_same_seed_is_byte_identical(three_day_file, tmp_path, flags):
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}.json"
        code, _, _ = invoke("solve", "--instance", three_day_file, "--seed", "3", "--out", str(out), *flags)
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_rmh_single_day_matches_oracle(tmp_path):
    instance = random_horizon(72, n_days=1, n_requests=4, windows=True)
    path = write_instance(tmp_path / "one.json", instance)
    code, stdout, _ = invoke("solve", "--method", "rmh", "--instance", path, "--pricing", "exact")
    assert code == 0
    options = oracles.day_options(instance.days[0], instance.vehicle_types, instance.commodities)
    expected, _ = oracles.priced_optimum(options, instance.fixed_costs)
    assert json.loads(stdout)["plans"][0]["total_cost"] == pytest.approx(expected, abs=1e-4)


def test_dump_store_and_lp(three_day_file, tmp_path):
    store, mps = tmp_path / "store.json", tmp_path / "master.mps"
    code, _, _ = invoke(
        "solve", "--method", "rmh", "--instance", three_day_file, "--pricing", "exact",
        "--dump-store", str(store), "--dump-lp", str(mps),
    )
    assert code == 0
    columns = json.loads(store.read_text(encoding="utf-8"))
    assert {column["day"] for column in columns} == {0, 1, 2}
    assert mps.read_text(encoding="utf-8").startswith("NAME")


def test_dump_store_needs_column_method(three_day_file, tmp_path):
    code, _, _ = invoke(
        "solve", "--method", "uf", "--instance", three_day_file, "--dump-store", str(tmp_path / "s.json")
    )
    assert code == 2


def test_sa_subset_larger_than_horizon(three_day_file):
    code, _, stderr = invoke("solve", "--method", "sa", "--instance", three_day_file, "--m", "4")
    assert code == 2
    assert json.loads(stderr)["error"]["code"] == 2


def test_missing_instance(tmp_path):
    code, _, stderr = invoke("solve", "--method", "uf", "--instance", str(tmp_path / "nope.json"))
    assert code == 4
    assert json.loads(stderr)["error"]["type"] == "InstanceParseError"


def test_invalid_instance(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "bad", "commodities": ["goods"], "vehicle_types": [], "days": []}))
    code, _, stderr = invoke("solve", "--method", "uf", "--instance", str(path))
    assert code == 4
    assert json.loads(stderr)["error"]["details"]["code"] == "no_days"


def test_zero_repeat_is_usage_error(three_day_file):
    code, _, _ = invoke("solve", "--method", "uf", "--instance", three_day_file, "--repeat", "0")
    assert code == 2


def test_unknown_method_exits_with_usage():
    with pytest.raises(SystemExit) as error:
        invoke("solve", "--method", "greedy", "--instance", "x.json")
    assert error.value.code == 2


def test_lower_bound_command(tmp_path):
    types = [vehicle_type(0, fixed_cost=100.0, capacity=20.0), vehicle_type(1, fixed_cost=30.0, capacity=5.0)]
    path = write_instance(tmp_path / "lb.json", horizon([demand_day(0, [5.0, 8.0, 10.0]), demand_day(1, [5.0, 5.0])], types))
    code, stdout, _ = invoke("lb", "--instance", path, "--pricing", "exact", "--runs", "1")
    assert code == 0
    bound = json.loads(stdout)
    assert bound["fixed_lb"] == pytest.approx(130.0)
    assert bound["total_lb"] == pytest.approx(bound["operational_lb"] + 130.0)

    lb_file = tmp_path / "bound.json"
    lb_file.write_text(stdout, encoding="utf-8")
    code, stdout, _ = invoke("solve", "--method", "uf", "--instance", path, "--pricing", "exact", "--gap-against", str(lb_file))
    assert code == 0
    assert json.loads(stdout)["plans"][0]["gap"] >= -1e-6


def test_days_sweep(three_day_file):
    code, stdout, _ = invoke(
        "sweep", "--sweep", "days", "--instance", three_day_file, "--pricing", "exact", "--methods", "uf,rmh"
    )
    assert code == 0
    frame = pd.read_csv(io.StringIO(stdout))
    assert list(frame.columns) == DAYS_COLUMNS
    assert frame.groupby("method").size().to_dict() == {"rmh": 3, "uf": 3}
    assert frame["d"].tolist() == [1, 1, 2, 2, 3, 3]


def test_types_sweep_reports_unservable_configuration(tmp_path):
    types = [vehicle_type(0, capacity=10.0), vehicle_type(1, capacity=6.0)]
    requests = [request(1, 2.0, 1.0, 2.0), request(2, -3.0, 2.0, 3.0, allowed_types=[1])]
    path = write_instance(tmp_path / "types.json", horizon([day(0, requests)], types))
    code, stdout, _ = invoke(
        "sweep", "--sweep", "types", "--instance", path, "--pricing", "exact", "--methods", "uf", "--max-types", "1"
    )
    assert code == 0
    frame = pd.read_csv(io.StringIO(stdout))
    assert list(frame.columns) == TYPES_COLUMNS
    assert frame["removed"].tolist() == [0, 1]
    assert pd.isna(frame.loc[0, "error"])
    assert frame.loc[1, "error"] == "unservable_request"


def test_solutions_sweep(three_day_file):
    code, stdout, _ = invoke(
        "sweep", "--sweep", "solutions", "--instance", three_day_file, "--pricing", "exact", "--solutions", "1,3"
    )
    assert code == 0
    frame = pd.read_csv(io.StringIO(stdout))
    assert frame["max_solutions"].tolist() == [1, 3]
