import argparse
import logging
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, TextIO

from pydantic import ValidationError

from src.lp import to_mps
from src.schemas.budget import CgBudget, LnsBudget, SolveBudget, TreeBudget
from src.schemas.instance import HorizonInstance, PerturbationConfig
from src.schemas.plan import FleetPlan, LowerBound
from src.services.bap import run_bap
from src.services.baselines import approximate_lower_bound, run_sa_best, run_uf
from src.services.colgen import ColumnGeneration, run_rmh
from src.services.generator import SyntheticGenerator
from src.services.instance_service import dump_instance, drop_vehicle_types, load_instance, prefix_horizon, split_horizon
from src.services.master import build_restricted, dump_store
from src.services.routing import DayContext, build_contexts
from src.cli.report import (
    aggregate,
    finite,
    per_day_frame,
    plan_document,
    summary_frame,
    sweep_frame,
    to_json,
    write_frame,
    write_text,
)
from src.utils.exceptions import (
    InfeasibleError,
    InstanceParseError,
    InstanceSchemaError,
    InstanceValidationError,
    UsageError,
)

logger = logging.getLogger(__name__)


def read_instance(path: str) -> HorizonInstance:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InstanceParseError(f"Не удалось прочитать {path}: {e}") from e
    return load_instance(text)


def read_lower_bound(path: str) -> LowerBound:
    try:
        return LowerBound.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise InstanceParseError(f"Не удалось прочитать {path}: {e}") from e
    except ValidationError as e:
        raise InstanceSchemaError(f"Некорректный документ нижней оценки: {path}", path="") from e


def make_budget(args: argparse.Namespace, max_solutions: Optional[int] = None) -> SolveBudget:
    """Бюджеты методов из флагов; --time-limit ограничивает CG, дерево и одну подзадачу LNS"""
    lns, cg, tree = LnsBudget(), CgBudget(), TreeBudget()
    lns.max_solutions = max_solutions if max_solutions is not None else getattr(args, "max_solutions", None)
    if args.time_limit is not None:
        cg.max_seconds = args.time_limit
        tree.max_seconds = args.time_limit
        lns.max_seconds = min(lns.max_seconds, args.time_limit)
    return SolveBudget(lns=lns, cg=cg, tree=tree, pricing=args.pricing, parallelism=args.parallel)


def run_method(
    method: str,
    instance: HorizonInstance,
    budget: SolveBudget,
    seed: int,
    m_values: Sequence[int],
    lb: Optional[LowerBound] = None,
    contexts: Optional[Dict[int, DayContext]] = None,
    hook: Optional[Callable[[ColumnGeneration], None]] = None,
) -> FleetPlan:
    if method == "uf":
        return run_uf(instance, budget, seed, lb, contexts)
    if method == "sa":
        if any(m > len(instance.days) for m in m_values):
            raise UsageError(f"--m не может превышать число дней ({len(instance.days)})")
        return run_sa_best(instance, m_values, budget, seed, lb, contexts)
    if method == "rmh":
        return run_rmh(instance, budget, seed, lb, contexts, hook=hook)
    if method == "bap":
        return run_bap(instance, budget, seed, lb, contexts, hook=hook)
    raise UsageError(f"Неизвестный метод: {method}")


def _dump_hook(args: argparse.Namespace) -> Optional[Callable[[ColumnGeneration], None]]:
    if not (args.dump_store or args.dump_lp):
        return None
    if args.method not in ("rmh", "bap"):
        raise UsageError("--dump-store и --dump-lp доступны только для rmh и bap")

    def hook(engine: ColumnGeneration) -> None:
        if args.dump_store:
            Path(args.dump_store).write_text(dump_store(engine.store), encoding="utf-8")
        if args.dump_lp:
            lp, _ = build_restricted(engine.day_ids, engine.fixed_costs, engine.store, integer=True)
            Path(args.dump_lp).write_text(to_mps(lp), encoding="utf-8")

    return hook


def cmd_generate(args: argparse.Namespace, stdout: TextIO) -> int:
    source = read_instance(args.base)
    try:
        base_day = source.days[0] if args.base_day is None else source.day(args.base_day)
    except KeyError as e:
        raise UsageError(f"В базовом файле нет дня {args.base_day}") from e
    try:
        config = PerturbationConfig(
            scale_lo=args.scale[0],
            scale_hi=args.scale[1],
            drop_prob=args.drop,
            dup_prob=args.dup,
            jitter=args.jitter,
            service_per_unit=args.service_per_unit,
            window_presets=args.windows,
            min_requests=args.min_requests,
            max_requests=args.max_requests,
        )
    except ValidationError as e:
        raise UsageError(f"Некорректные параметры возмущения: {e.errors()[0]['msg']}") from e

    generator = SyntheticGenerator(base_day, source.vehicle_types, source.commodities, config, args.seed)
    instance = generator.generate(args.days, name=f"{source.name}-synthetic")
    out = Path(args.out)
    out.write_text(dump_instance(instance), encoding="utf-8")
    logger.info(f"Экземпляр записан в {out}")

    if args.split:
        for k, part in enumerate(split_horizon(instance, args.split), start=1):
            path = out.with_name(f"{out.stem}.part{k}{out.suffix}")
            path.write_text(dump_instance(part), encoding="utf-8")
            logger.info(f"Часть {k} записана в {path}")

    write_frame(summary_frame(generator.summary, instance.commodities), args.csv, stdout)
    return 0


def cmd_solve(args: argparse.Namespace, stdout: TextIO) -> int:
    instance = read_instance(args.instance)
    lb = read_lower_bound(args.gap_against) if args.gap_against else None
    budget = make_budget(args)
    hook = _dump_hook(args)
    contexts = build_contexts(instance)

    plans: List[FleetPlan] = []
    for run in range(args.repeat):
        seed = args.seed + run
        plan = run_method(args.method, instance, budget, seed, args.m, lb, contexts, hook)
        logger.info(f"Запуск {run + 1}/{args.repeat}: {args.method} seed={seed}, {plan.wall_time:.2f} c")
        plans.append(plan)

    document = {
        "instance": instance.name,
        "method": args.method,
        "plans": [plan_document(plan, args.timing) for plan in plans],
        "aggregate": aggregate(plans),
    }
    write_text(to_json(document), args.out, stdout)
    if args.csv:
        write_frame(per_day_frame(plans), args.csv, stdout)
    return 0


def cmd_lb(args: argparse.Namespace, stdout: TextIO) -> int:
    instance = read_instance(args.instance)
    bound = approximate_lower_bound(instance, make_budget(args), args.runs, args.seed)
    write_text(bound.model_dump_json(indent=2), args.out, stdout)
    return 0


DAYS_COLUMNS = ["d", "method", "cost_per_day", "fixed_per_day", "operational_per_day", "idle_per_day", "vehicles"]
TYPES_COLUMNS = ["removed", "types", "method", "idle", "fixed", "operational", "total", "vehicles", "error"]
SOLUTIONS_COLUMNS = ["max_solutions", "cost", "fixed", "operational", "vehicles", "idle"]


def _sweep_days(args, instance, budget, stdout) -> None:
    contexts = build_contexts(instance)
    rows = []
    for d in range(1, len(instance.days) + 1):
        sub = prefix_horizon(instance, d, prorate=True)
        sub_contexts = {day.id: contexts[day.id] for day in sub.days}
        m_values = [m for m in args.m if m <= d] or [d]
        for method in args.methods:
            plan = run_method(method, sub, budget, args.seed, m_values, contexts=sub_contexts)
            rows.append(
                {
                    "d": d,
                    "method": method,
                    "cost_per_day": finite(plan.total_cost / d),
                    "fixed_per_day": finite(plan.fixed_cost / d),
                    "operational_per_day": finite(plan.operational_cost / d),
                    "idle_per_day": plan.mean_idle,
                    "vehicles": plan.vehicles,
                }
            )
    write_frame(sweep_frame(rows, DAYS_COLUMNS), args.csv, stdout)


def _sweep_types(args, instance, budget, stdout) -> None:
    rows = []
    for removed in range(0, min(args.max_types, instance.n_types - 1) + 1):
        try:
            reduced = drop_vehicle_types(instance, removed)
        except InstanceValidationError as e:
            logger.warning(f"Удаление {removed} типов: {e.message}")
            rows += [
                {"removed": removed, "types": instance.n_types - removed, "method": method, "error": e.code}
                for method in args.methods
            ]
            continue
        contexts = build_contexts(reduced)
        for method in args.methods:
            row = {"removed": removed, "types": reduced.n_types, "method": method}
            try:
                plan = run_method(method, reduced, budget, args.seed, args.m, contexts=contexts)
            except InfeasibleError as e:
                logger.warning(f"Удаление {removed} типов, {method}: {e.message}")
                rows.append({**row, "error": e.reason})
                continue
            rows.append(
                {
                    **row,
                    "idle": plan.mean_idle,
                    "fixed": finite(plan.fixed_cost),
                    "operational": finite(plan.operational_cost),
                    "total": finite(plan.total_cost),
                    "vehicles": plan.vehicles,
                    "error": None,
                }
            )
    write_frame(sweep_frame(rows, TYPES_COLUMNS), args.csv, stdout)


def _sweep_solutions(args, instance, stdout) -> None:
    contexts = build_contexts(instance)
    rows = []
    for k in args.solutions:
        plan = run_rmh(instance, make_budget(args, max_solutions=k), args.seed, contexts=contexts)
        rows.append(
            {
                "max_solutions": k,
                "cost": finite(plan.total_cost),
                "fixed": finite(plan.fixed_cost),
                "operational": finite(plan.operational_cost),
                "vehicles": plan.vehicles,
                "idle": plan.mean_idle,
            }
        )
    write_frame(sweep_frame(rows, SOLUTIONS_COLUMNS), args.csv, stdout)


def cmd_sweep(args: argparse.Namespace, stdout: TextIO) -> int:
    instance = read_instance(args.instance)
    budget = make_budget(args)
    if args.sweep == "days":
        _sweep_days(args, instance, budget, stdout)
    elif args.sweep == "types":
        _sweep_types(args, instance, budget, stdout)
    else:
        _sweep_solutions(args, instance, stdout)
    return 0
