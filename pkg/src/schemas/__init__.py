from src.schemas.instance import (
    DayInstance,
    DaySummary,
    Depot,
    HorizonInstance,
    PerturbationConfig,
    Request,
    VehicleType,
)
from src.schemas.routing import (
    DaySolution,
    Infeasibility,
    Route,
)
from src.schemas.fsm import (
    FleetOption,
    PricedFleetProblem,
)
from src.schemas.budget import (
    CgBudget,
    LnsBudget,
    SolveBudget,
    TreeBudget,
)
from src.schemas.master import (
    Column,
    ColumnOutcome,
    Duals,
    FleetBounds,
    MasterResult,
    PooledRoute,
    QuickCgResult,
)
from src.schemas.colgen import (
    CgState,
    DayScoreRecord,
)
from src.schemas.bap import BapNode
from src.schemas.plan import (
    DayAssignment,
    FleetPlan,
    LowerBound,
    PlanMethod,
)
