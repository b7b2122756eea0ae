import json
import math
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd

from src.schemas.instance import DaySummary
from src.schemas.plan import FleetPlan


def plan_document(plan: FleetPlan, timing: bool = False) -> Dict[str, Any]:
    """JSON-представление плана; wall_time только при timing"""
    exclude = None if timing else {"wall_time"}
    return plan.model_dump(mode="json", exclude=exclude)


def finite(value: float) -> Optional[float]:
    return float(value) if value is not None and math.isfinite(value) else None


def aggregate(plans: Sequence[FleetPlan]) -> Dict[str, Any]:
    """
    Средние по запускам: стоимость, σ стоимости (по совокупности),
    операционная и постоянная части, число ТС, простой
    """
    frame = pd.DataFrame(
        [
            {
                "cost": plan.total_cost,
                "operational": plan.operational_cost,
                "fixed": plan.fixed_cost,
                "vehicles": plan.vehicles,
                "idle": plan.mean_idle,
            }
            for plan in plans
            if not plan.infeasible
        ],
        columns=["cost", "operational", "fixed", "vehicles", "idle"],
    )
    summary: Dict[str, Any] = {"runs": len(plans), "infeasible_runs": sum(plan.infeasible for plan in plans)}
    if frame.empty:
        summary.update(
            mean_cost=None, std_cost=None, mean_operational=None, mean_fixed=None, mean_vehicles=None, mean_idle=None
        )
        return summary
    summary.update(
        mean_cost=finite(frame["cost"].mean()),
        std_cost=finite(frame["cost"].std(ddof=0)),
        mean_operational=finite(frame["operational"].mean()),
        mean_fixed=finite(frame["fixed"].mean()),
        mean_vehicles=finite(frame["vehicles"].mean()),
        mean_idle=finite(frame["idle"].mean()),
    )
    return summary


PER_DAY_COLUMNS = ["day_id", "option_cost", "idle", "run", "seed", "method", "fleet", "infeasible"]


def per_day_frame(plans: Sequence[FleetPlan]) -> pd.DataFrame:
    """Строка на (запуск, день); option_cost - стоимость маршрутизации выбранной опции"""
    rows = []
    for run, plan in enumerate(plans):
        for assignment in plan.per_day:
            rows.append(
                {
                    "day_id": assignment.day_id,
                    "option_cost": finite(assignment.routing_cost),
                    "idle": assignment.idle,
                    "run": run,
                    "seed": plan.seed,
                    "method": plan.method.value,
                    "fleet": " ".join(str(count) for count in assignment.fleet),
                    "infeasible": assignment.infeasible,
                }
            )
    return pd.DataFrame(rows, columns=PER_DAY_COLUMNS)


def summary_frame(summary: Sequence[DaySummary], commodities: Sequence[str]) -> pd.DataFrame:
    """Сводка генератора: число заявок и суммарный спрос по товарам на день"""
    rows = []
    for item in summary:
        row = {"day_id": item.day_id, "requests": item.requests}
        for commodity in commodities:
            row[f"total_{commodity}"] = round(item.totals.get(commodity, 0.0), 6)
        rows.append(row)
    return pd.DataFrame(rows, columns=["day_id", "requests"] + [f"total_{c}" for c in commodities])


def to_json(document: Any) -> str:
    return json.dumps(document, ensure_ascii=False, indent=2)


def write_text(text: str, path: Optional[str], stream) -> None:
    """Записать в файл или в поток вывода"""
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        stream.write(text)
        if not text.endswith("\n"):
            stream.write("\n")


def write_frame(frame: pd.DataFrame, path: Optional[str], stream) -> None:
    write_text(frame.to_csv(index=False), path, stream)


def sweep_frame(rows: List[Dict[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=list(columns))
