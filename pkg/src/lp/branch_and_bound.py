import heapq
import itertools
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from src.core.config import settings
from src.lp.model import INF, LinearProgram, LpSolution, LpStatus
from src.lp.simplex import solve_lp

logger = logging.getLogger(__name__)


class BranchAndBound:
    """
    Ветви и границы по лучшей оценке: в очереди узлы с границами переменных,
    ветвление по наиболее дробной целочисленной переменной
    """

    def __init__(
        self,
        lp: LinearProgram,
        node_limit: Optional[int] = None,
        incumbent: Optional[Sequence[float]] = None,
    ):
        self.lp = lp
        self.node_limit = settings.MIP_NODE_LIMIT if node_limit is None else node_limit
        self.integer = np.flatnonzero(np.array(lp.integer, dtype=bool))
        self.best_x: Optional[List[float]] = None
        self.best_obj = INF
        self.nodes = 0
        if incumbent is not None:
            self.best_x = [float(v) for v in incumbent]
            self.best_obj = lp.objective_value(self.best_x)

    def _fractional(self, x: Sequence[float]) -> Optional[int]:
        """Наиболее дробная переменная (при равенстве - меньший индекс)"""
        best, best_score = None, settings.INTEGRALITY_TOL
        for j in self.integer:
            frac = x[j] - math.floor(x[j])
            score = min(frac, 1.0 - frac)
            if score > best_score + 1e-12:
                best, best_score = int(j), score
        return best

    def _prunable(self, bound: float) -> bool:
        return bound >= self.best_obj - 1e-9 * (1.0 + abs(self.best_obj))

    def solve(self) -> LpSolution:
        lower = [float(v) for v in self.lp.lower]
        upper = [float(v) for v in self.lp.upper]
        for j in self.integer:
            lower[j] = math.ceil(lower[j] - settings.INTEGRALITY_TOL) if math.isfinite(lower[j]) else lower[j]
            upper[j] = math.floor(upper[j] + settings.INTEGRALITY_TOL) if math.isfinite(upper[j]) else upper[j]

        root = solve_lp(self.lp, lower, upper)
        self.nodes = 1
        if root.status == LpStatus.UNBOUNDED:
            return LpSolution(status=LpStatus.UNBOUNDED, objective=-INF, nodes=1)
        if root.status == LpStatus.INFEASIBLE:
            return self._result(open_bound=None, limit_hit=False)

        counter = itertools.count()
        queue = [(root.objective, 0, next(counter), 0, lower, upper, root)]
        limit_hit = False
        while queue:
            bound, _, order, depth, node_lower, node_upper, relaxation = heapq.heappop(queue)
            if self.best_x is not None and self._prunable(bound):
                continue
            j = self._fractional(relaxation.x)
            if j is None:
                x = list(relaxation.x)
                for k in self.integer:
                    x[k] = float(round(x[k]))
                objective = self.lp.objective_value(x)
                if objective < self.best_obj - 1e-12:
                    self.best_x, self.best_obj = x, objective
                    logger.debug(f"MIP '{self.lp.name}': новое решение {objective:.6f}, узлов {self.nodes}")
                continue

            if self.nodes >= self.node_limit:
                limit_hit = True
                heapq.heappush(queue, (bound, -depth, order, depth, node_lower, node_upper, relaxation))
                break

            value = relaxation.x[j]
            left_upper = list(node_upper)
            left_upper[j] = math.floor(value)
            right_lower = list(node_lower)
            right_lower[j] = math.floor(value) + 1
            for child_lower, child_upper in ((node_lower, left_upper), (right_lower, node_upper)):
                child = solve_lp(self.lp, child_lower, child_upper)
                self.nodes += 1
                if child.status != LpStatus.OPTIMAL:
                    continue
                if self.best_x is not None and self._prunable(child.objective):
                    continue
                heapq.heappush(
                    queue, (child.objective, -(depth + 1), next(counter), depth + 1, child_lower, child_upper, child)
                )

        open_bound = min((item[0] for item in queue), default=None) if limit_hit else None
        if limit_hit:
            logger.warning(f"MIP '{self.lp.name}': достигнут лимит узлов {self.node_limit}")
        return self._result(open_bound=open_bound, limit_hit=limit_hit)

    def _result(self, open_bound, limit_hit: bool) -> LpSolution:
        if self.best_x is None:
            return LpSolution(
                status=LpStatus.INFEASIBLE, nodes=self.nodes, node_limit_hit=limit_hit, bound=open_bound
            )
        bound = self.best_obj if open_bound is None else min(open_bound, self.best_obj)
        return LpSolution(
            status=LpStatus.OPTIMAL,
            x=self.best_x,
            objective=self.best_obj,
            nodes=self.nodes,
            node_limit_hit=limit_hit,
            bound=bound,
        )


def solve_mip(
    lp: LinearProgram,
    node_limit: Optional[int] = None,
    incumbent: Optional[Sequence[float]] = None,
) -> LpSolution:
    """Решить MIP методом ветвей и границ"""
    return BranchAndBound(lp, node_limit, incumbent).solve()
