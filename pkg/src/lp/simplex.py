import logging
import math
from typing import Optional, Sequence

import numpy as np

from src.core.config import settings
from src.lp.model import INF, LinearProgram, LpSolution, LpStatus, Sense
from src.utils.exceptions import DimensionError, InvariantViolation

logger = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
PRICE_TOL = 1e-9
RATIO_TIE = 1e-12


class RevisedSimplex:
    """
    Двухфазный ревизованный симплекс-метод с двусторонними границами переменных.

    Каждая строка получает слабую переменную (a_i x + s_i = b_i, знак строки
    задается границами s_i) и искусственную переменную для первой фазы.
    Обратная базисная матрица хранится явно и пересчитывается каждые
    SIMPLEX_REFACTOR_EVERY шагов. Выбор входящей переменной по Данцигу,
    после SIMPLEX_DEGENERATE_LIMIT вырожденных шагов - правило Бленда.
    """

    def __init__(
        self,
        lp: LinearProgram,
        lower: Optional[Sequence[float]] = None,
        upper: Optional[Sequence[float]] = None,
    ):
        lp.validate()
        self.lp = lp
        n = lp.n_vars
        lower = np.array(lp.lower if lower is None else lower, dtype=float)
        upper = np.array(lp.upper if upper is None else upper, dtype=float)
        if lower.shape != (n,) or upper.shape != (n,):
            raise DimensionError(f"Границы должны иметь длину {n}")
        self.var_lower, self.var_upper = lower, upper
        self.bounds_conflict = bool(np.any(lower > upper + settings.FEASIBILITY_TOL))

        dense = lp.matrix()
        rhs = np.array(lp.rhs, dtype=float)
        nonempty = np.any(dense != 0.0, axis=1) if lp.n_rows else np.zeros(0, dtype=bool)
        self.empty_rows_violated = False
        for i in np.flatnonzero(~nonempty):
            sense, b = lp.senses[i], rhs[i]
            tol = settings.FEASIBILITY_TOL
            if (sense == Sense.LE and b < -tol) or (sense == Sense.GE and b > tol) or (
                sense == Sense.EQ and abs(b) > tol
            ):
                self.empty_rows_violated = True
        self.rows = np.flatnonzero(nonempty)
        self.A = dense[self.rows]
        self.b = rhs[self.rows]
        self.dense = dense
        self.n = n
        self.m = len(self.rows)

        m = self.m
        slack_lo = np.zeros(m)
        slack_hi = np.zeros(m)
        for k, i in enumerate(self.rows):
            sense = lp.senses[i]
            if sense == Sense.LE:
                slack_hi[k] = INF
            elif sense == Sense.GE:
                slack_lo[k] = -INF
        self.M = np.hstack([self.A, np.eye(m), np.eye(m)])
        self.lo = np.concatenate([lower, slack_lo, np.zeros(m)])
        self.hi = np.concatenate([upper, slack_hi, np.zeros(m)])
        self.iterations = 0
        self.degenerate = 0
        self.bland = False
        self.since_refactor = 0

    # Базис

    def _start(self) -> bool:
        """Начальный базис: слабые переменные там, где это допустимо, иначе искусственные"""
        n, m = self.n, self.m
        x = np.zeros(n + 2 * m)
        for j in range(n):
            lo, hi = self.lo[j], self.hi[j]
            x[j] = lo if math.isfinite(lo) else (hi if math.isfinite(hi) else 0.0)
        residual = self.b - self.A @ x[:n]
        basis = np.zeros(m, dtype=int)
        artificial = False
        tol = settings.FEASIBILITY_TOL
        for k in range(m):
            r = residual[k]
            if self.lo[n + k] - tol <= r <= self.hi[n + k] + tol:
                basis[k] = n + k
                x[n + k] = r
            else:
                sign = 1.0 if r > 0 else -1.0
                self.M[k, n + m + k] = sign
                basis[k] = n + m + k
                x[n + m + k] = abs(r)
                self.hi[n + m + k] = INF
                artificial = True
        self.x = x
        self.basis = basis
        self.is_basic = np.zeros(n + 2 * m, dtype=bool)
        self.is_basic[basis] = True
        self._refactor()
        return artificial

    def _refactor(self) -> None:
        if self.m == 0:
            self.Binv = np.zeros((0, 0))
            self.since_refactor = 0
            return
        try:
            self.Binv = np.linalg.inv(self.M[:, self.basis])
        except np.linalg.LinAlgError:
            raise InvariantViolation("Вырожденная базисная матрица при рефакторизации")
        nonbasic_x = self.x.copy()
        nonbasic_x[self.basis] = 0.0
        self.x[self.basis] = self.Binv @ (self.b - self.M @ nonbasic_x)
        self.since_refactor = 0

    # Итерации

    def _price(self, d: np.ndarray):
        nonbasic = ~self.is_basic
        can_up = nonbasic & (d < -PRICE_TOL) & (self.x < self.hi - RATIO_TIE)
        can_down = nonbasic & (d > PRICE_TOL) & (self.x > self.lo + RATIO_TIE)
        eligible = can_up | can_down
        if not eligible.any():
            return None, 0
        if self.bland:
            entering = int(np.flatnonzero(eligible)[0])
        else:
            scores = np.where(eligible, np.abs(d), -1.0)
            entering = int(np.argmax(scores))
        return entering, (1.0 if can_up[entering] else -1.0)

    def _ratio(self, delta: np.ndarray):
        """Шаг до ближайшей границы базисной переменной: (theta, позиция)"""
        xb = self.x[self.basis]
        lb = self.lo[self.basis]
        ub = self.hi[self.basis]
        ratios = np.full(self.m, INF)
        dec = delta > PIVOT_TOL
        inc = delta < -PIVOT_TOL
        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = np.where(dec & np.isfinite(lb), (xb - lb) / np.where(dec, delta, 1.0), ratios)
            ratios = np.where(inc & np.isfinite(ub), (ub - xb) / np.where(inc, -delta, 1.0), ratios)
        ratios = np.maximum(ratios, 0.0)
        theta = float(ratios.min()) if self.m else INF
        if not math.isfinite(theta):
            return INF, -1
        ties = np.flatnonzero(ratios <= theta + RATIO_TIE)
        if self.bland:
            position = int(ties[np.argmin(self.basis[ties])])
        else:
            position = int(ties[np.argmax(np.abs(delta[ties]))])
        return theta, position

    def _run(self, cost: np.ndarray) -> LpStatus:
        while True:
            if self.iterations >= settings.SIMPLEX_MAX_PIVOTS:
                raise InvariantViolation(f"Симплекс превысил {settings.SIMPLEX_MAX_PIVOTS} шагов")
            if self.since_refactor >= settings.SIMPLEX_REFACTOR_EVERY:
                self._refactor()

            y = cost[self.basis] @ self.Binv
            d = cost - y @ self.M
            d[self.basis] = 0.0
            entering, direction = self._price(d)
            if entering is None:
                if self.since_refactor > 0:
                    self._refactor()
                    continue
                return LpStatus.OPTIMAL

            alpha = self.Binv @ self.M[:, entering]
            delta = direction * alpha
            theta, position = self._ratio(delta)
            span = self.hi[entering] - self.lo[entering]
            flip = math.isfinite(span) and span <= theta
            if flip:
                theta = span
            if not math.isfinite(theta):
                return LpStatus.UNBOUNDED

            self.iterations += 1
            if theta <= RATIO_TIE:
                self.degenerate += 1
                if not self.bland and self.degenerate >= settings.SIMPLEX_DEGENERATE_LIMIT:
                    self.bland = True
                    logger.debug(f"Симплекс: {self.degenerate} вырожденных шагов, включено правило Бленда")

            self.x[self.basis] -= theta * delta
            if flip:
                self.x[entering] = self.hi[entering] if direction > 0 else self.lo[entering]
                continue

            self.x[entering] += direction * theta
            leaving = int(self.basis[position])
            self.x[leaving] = self.lo[leaving] if delta[position] > 0 else self.hi[leaving]

            pivot_row = self.Binv[position] / alpha[position]
            self.Binv -= np.outer(alpha, pivot_row)
            self.Binv[position] = pivot_row
            self.basis[position] = entering
            self.is_basic[leaving] = False
            self.is_basic[entering] = True
            self.since_refactor += 1

    # Решение

    def solve(self) -> LpSolution:
        if self.bounds_conflict or self.empty_rows_violated:
            return LpSolution(status=LpStatus.INFEASIBLE)

        n, m = self.n, self.m
        if self._start():
            phase_one = np.zeros(n + 2 * m)
            phase_one[n + m:] = 1.0
            self._run(phase_one)
            infeasibility = float(self.x[n + m:].sum())
            scale = 1.0 + (float(np.abs(self.b).max()) if m else 0.0)
            if infeasibility > settings.FEASIBILITY_TOL * scale:
                return LpSolution(status=LpStatus.INFEASIBLE, iterations=self.iterations)
            self.hi[n + m:] = 0.0
            nonbasic_art = ~self.is_basic[n + m:]
            self.x[n + m:][nonbasic_art] = 0.0

        cost = np.concatenate([np.array(self.lp.cost, dtype=float), np.zeros(2 * m)])
        status = self._run(cost)
        if status == LpStatus.UNBOUNDED:
            return LpSolution(status=status, objective=-INF, iterations=self.iterations)

        self._refactor()
        y = cost[self.basis] @ self.Binv
        d = cost - y @ self.M
        d[self.basis] = 0.0
        x = self.x[:n].copy()
        duals = np.zeros(self.lp.n_rows)
        duals[self.rows] = y
        objective = float(np.dot(cost[:n], x))
        dual_objective = float(np.dot(self.b, y) + np.dot(d, self.x))
        solution = LpSolution(
            status=LpStatus.OPTIMAL,
            x=x.tolist(),
            duals=duals.tolist(),
            reduced_costs=d[:n].tolist(),
            objective=objective,
            dual_objective=dual_objective,
            iterations=self.iterations,
        )
        self._verify(solution, d)
        return solution

    def _verify(self, solution: LpSolution, d: np.ndarray) -> None:
        """Прямая и двойственная допустимость и совпадение целевых значений"""
        problems = []
        n, m = self.n, self.m
        x = np.array(solution.x)
        primal_tol = settings.FEASIBILITY_TOL * (1.0 + (float(np.abs(self.b).max()) if m else 0.0))
        dual_tol = settings.FEASIBILITY_TOL * (1.0 + float(np.abs(self.lp.cost).max(initial=0.0)))

        if np.any(x < self.var_lower - primal_tol) or np.any(x > self.var_upper + primal_tol):
            problems.append("нарушены границы переменных")
        activity = self.dense @ x if self.lp.n_rows else np.zeros(0)
        for i, sense in enumerate(self.lp.senses):
            gap = activity[i] - self.lp.rhs[i]
            if (sense == Sense.LE and gap > primal_tol) or (sense == Sense.GE and gap < -primal_tol) or (
                sense == Sense.EQ and abs(gap) > primal_tol
            ):
                problems.append(f"нарушена строка {self.lp.row_names[i]}")
                break

        for j in np.flatnonzero(~self.is_basic[: n + m]):
            lo, hi, value = self.lo[j], self.hi[j], self.x[j]
            if hi - lo <= RATIO_TIE:
                continue
            at_lower = math.isfinite(lo) and abs(value - lo) <= primal_tol
            at_upper = math.isfinite(hi) and abs(value - hi) <= primal_tol
            if at_lower and d[j] < -dual_tol or at_upper and d[j] > dual_tol:
                problems.append(f"двойственная недопустимость в столбце {j}")
                break
            if not at_lower and not at_upper and abs(d[j]) > dual_tol:
                problems.append(f"двойственная недопустимость свободного столбца {j}")
                break

        objective = solution.objective
        if abs(objective - solution.dual_objective) > settings.OBJECTIVE_TOL * (1.0 + abs(objective)):
            problems.append(
                f"разрыв двойственности {objective} против {solution.dual_objective}"
            )

        if problems:
            message = f"LP '{self.lp.name}': " + "; ".join(problems)
            if settings.STRICT_INVARIANTS:
                raise InvariantViolation(message)
            logger.warning(message)


def solve_lp(
    lp: LinearProgram,
    lower: Optional[Sequence[float]] = None,
    upper: Optional[Sequence[float]] = None,
) -> LpSolution:
    """
    Решить LP (признаки целочисленности игнорируются).
    Границы lower/upper, если заданы, заменяют границы переменных задачи
    """
    return RevisedSimplex(lp, lower, upper).solve()
