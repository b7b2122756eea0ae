from typing import Optional

from pydantic import BaseModel, Field

from src.core.config import settings


class LnsBudget(BaseModel):
    """Бюджет эвристики LNS на одну подзадачу"""
    max_seconds: float = Field(default_factory=lambda: settings.LNS_MAX_SECONDS, gt=0)
    max_iterations: int = Field(default_factory=lambda: settings.LNS_MAX_ITERATIONS, ge=0)
    max_solutions: Optional[int] = Field(None, ge=1, description="Остановка после k-го улучшающего решения")


class CgBudget(BaseModel):
    """Бюджет генерации столбцов в одном узле"""
    max_seconds: float = Field(default_factory=lambda: settings.CG_MAX_SECONDS, gt=0)
    max_iterations: int = Field(default_factory=lambda: settings.CG_MAX_ITERATIONS, ge=1)
    gap_eps: float = Field(default_factory=lambda: settings.CG_GAP_EPS, ge=0)
    stagnation_limit: int = Field(default_factory=lambda: settings.CG_STAGNATION_LIMIT, ge=1)


class TreeBudget(BaseModel):
    """Бюджет дерева branch & price"""
    max_seconds: float = Field(default_factory=lambda: settings.CG_MAX_SECONDS, ge=0)
    max_nodes: int = Field(default_factory=lambda: settings.BAP_MAX_NODES, ge=0)


class SolveBudget(BaseModel):
    """Бюджеты метода целиком"""
    lns: LnsBudget = Field(default_factory=LnsBudget)
    cg: CgBudget = Field(default_factory=CgBudget)
    tree: TreeBudget = Field(default_factory=TreeBudget)
    pricing: str = Field("heuristic", pattern="^(heuristic|exact)$")
    parallelism: Optional[int] = Field(None, ge=1)
