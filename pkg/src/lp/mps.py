import math
from typing import List

from src.lp.model import LinearProgram, Sense

_ROW_TYPES = {Sense.LE: "L", Sense.GE: "G", Sense.EQ: "E"}


def _number(value: float) -> str:
    """Число в поле ширины 12 с максимально возможной точностью"""
    for digits in range(12, 0, -1):
        text = f"{value:.{digits}g}"
        if len(text) <= 12:
            return text
    return f"{value:.1e}"


def _line(kind: str, name: str, entries: List[tuple]) -> str:
    """Строка с полями в позициях 2-3, 5-12, 15-22, 25-36, 40-47, 50-61"""
    text = f" {kind:<2} {name:<8}"
    for k, (key, value) in enumerate(entries[:2]):
        text += ("   " if k else "  ") + f"{key:<8}  {_number(value):>12}"
    return text.rstrip()


def to_mps(lp: LinearProgram) -> str:
    """
    Выгрузка задачи в фиксированном формате MPS. Имена заменяются на C<j>/R<i>,
    чтобы уложиться в 8 символов
    """
    col = [f"C{j}" for j in range(lp.n_vars)]
    row = [f"R{i}" for i in range(lp.n_rows)]
    columns = [dict() for _ in range(lp.n_vars)]
    for i, j, value in lp.entries:
        columns[j][row[i]] = columns[j].get(row[i], 0.0) + value

    lines = [f"NAME          {lp.name[:8]}", "ROWS", " N  COST"]
    lines += [f" {_ROW_TYPES[sense]}  {row[i]}" for i, sense in enumerate(lp.senses)]
    lines.append("COLUMNS")
    in_integer = False
    markers = 0
    for j in range(lp.n_vars):
        if lp.integer[j] != in_integer:
            marker = "'INTORG'" if lp.integer[j] else "'INTEND'"
            lines.append(f"    {'M' + str(markers):<8}  'MARKER'                 {marker}")
            markers += 1
            in_integer = lp.integer[j]
        entries = []
        if lp.cost[j] != 0.0:
            entries.append(("COST", lp.cost[j]))
        entries += sorted(columns[j].items(), key=lambda item: int(item[0][1:]))
        if not entries:
            entries = [("COST", 0.0)]
        for k in range(0, len(entries), 2):
            lines.append(_line("", col[j], entries[k:k + 2]))
    if in_integer:
        lines.append(f"    {'M' + str(markers):<8}  'MARKER'                 'INTEND'")

    lines.append("RHS")
    rhs = [(row[i], b) for i, b in enumerate(lp.rhs) if b != 0.0]
    for k in range(0, len(rhs), 2):
        lines.append(_line("", "RHS", rhs[k:k + 2]))

    lines.append("BOUNDS")
    for j in range(lp.n_vars):
        lo, hi = lp.lower[j], lp.upper[j]
        if math.isinf(lo) and math.isinf(hi):
            lines.append(f" FR BND       {col[j]}")
            continue
        if lo == hi:
            lines.append(_line("FX", "BND", [(col[j], lo)]))
            continue
        if math.isinf(lo):
            lines.append(f" MI BND       {col[j]}")
        elif lo != 0.0:
            lines.append(_line("LO", "BND", [(col[j], lo)]))
        if not math.isinf(hi):
            lines.append(_line("UP", "BND", [(col[j], hi)]))
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"
