import math
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.utils.exceptions import DimensionError

INF = math.inf


class Sense(str, Enum):
    """Знак ограничения"""
    LE = "<="
    GE = ">="
    EQ = "="


class LpStatus(str, Enum):
    """Статус решения LP/MIP"""
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpSolution(BaseModel):
    """Результат решения LP или MIP"""
    status: LpStatus
    x: List[float] = Field(default_factory=list, description="Значения переменных")
    duals: List[float] = Field(default_factory=list, description="Двойственные оценки строк")
    reduced_costs: List[float] = Field(default_factory=list)
    objective: float = INF
    dual_objective: Optional[float] = None
    iterations: int = 0
    nodes: int = 0
    node_limit_hit: bool = False
    bound: Optional[float] = Field(None, description="Нижняя граница MIP")


class LinearProgram:
    """
    Задача LP на минимум: переменные с границами и признаком целочисленности,
    строки со знаками, разреженная матрица в виде троек (строка, столбец, коэффициент)
    """

    def __init__(self, name: str = "lp"):
        self.name = name
        self.var_names: List[str] = []
        self.cost: List[float] = []
        self.lower: List[float] = []
        self.upper: List[float] = []
        self.integer: List[bool] = []
        self.row_names: List[str] = []
        self.senses: List[Sense] = []
        self.rhs: List[float] = []
        self.entries: List[Tuple[int, int, float]] = []

    @property
    def n_vars(self) -> int:
        return len(self.cost)

    @property
    def n_rows(self) -> int:
        return len(self.rhs)

    def add_variable(
        self,
        name: Optional[str] = None,
        cost: float = 0.0,
        lower: float = 0.0,
        upper: float = INF,
        integer: bool = False,
    ) -> int:
        """Добавить переменную, вернуть ее индекс"""
        index = self.n_vars
        self.var_names.append(name or f"x{index}")
        self.cost.append(float(cost))
        self.lower.append(float(lower))
        self.upper.append(float(upper))
        self.integer.append(bool(integer))
        return index

    def add_constraint(
        self,
        coefficients: Iterable[Tuple[int, float]],
        sense: Sense,
        rhs: float,
        name: Optional[str] = None,
    ) -> int:
        """Добавить строку sum(a_j x_j) sense rhs, вернуть ее индекс"""
        row = self.n_rows
        self.row_names.append(name or f"r{row}")
        self.senses.append(Sense(sense))
        self.rhs.append(float(rhs))
        for col, value in coefficients:
            if value != 0.0:
                self.entries.append((row, int(col), float(value)))
        return row

    def relaxed(self) -> "LinearProgram":
        """Копия без признаков целочисленности"""
        copy = self.copy()
        copy.integer = [False] * copy.n_vars
        return copy

    def copy(self) -> "LinearProgram":
        copy = LinearProgram(self.name)
        copy.var_names = list(self.var_names)
        copy.cost = list(self.cost)
        copy.lower = list(self.lower)
        copy.upper = list(self.upper)
        copy.integer = list(self.integer)
        copy.row_names = list(self.row_names)
        copy.senses = list(self.senses)
        copy.rhs = list(self.rhs)
        copy.entries = list(self.entries)
        return copy

    def validate(self) -> None:
        """Проверка размерностей, конечности коэффициентов и границ"""
        for row, col, value in self.entries:
            if not (0 <= row < self.n_rows and 0 <= col < self.n_vars):
                raise DimensionError(f"Коэффициент ({row}, {col}) вне размеров {self.n_rows}x{self.n_vars}")
            if not math.isfinite(value):
                raise DimensionError(f"Неконечный коэффициент в ({row}, {col})")
        for j, (lo, hi, c) in enumerate(zip(self.lower, self.upper, self.cost)):
            if lo > hi:
                raise DimensionError(f"Переменная {self.var_names[j]}: нижняя граница больше верхней")
            if not math.isfinite(c):
                raise DimensionError(f"Переменная {self.var_names[j]}: неконечная стоимость")
        if any(not math.isfinite(b) for b in self.rhs):
            raise DimensionError("Неконечная правая часть")

    def matrix(self) -> np.ndarray:
        """Плотная матрица коэффициентов"""
        dense = np.zeros((self.n_rows, self.n_vars))
        if self.entries:
            rows, cols, values = zip(*self.entries)
            np.add.at(dense, (np.array(rows), np.array(cols)), np.array(values))
        return dense

    def objective_value(self, x) -> float:
        return float(np.dot(self.cost, x))

    def column(self, col: int) -> Dict[int, float]:
        out: Dict[int, float] = {}
        for row, j, value in self.entries:
            if j == col:
                out[row] = out.get(row, 0.0) + value
        return out
