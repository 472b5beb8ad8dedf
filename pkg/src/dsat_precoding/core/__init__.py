"""
核心模块

枚举、配置、值对象与异常
"""

from dsat_precoding.core.types import BudgetKind, RateKind, ExperimentName, PrecoderKind
from dsat_precoding.core.errors import (
    PrecodingError,
    VisibilityError,
    SingularMatrixError,
    IterationLimitError,
    NonMonotoneError,
    ConfigError,
    ConfigParseError,
    ConfigValidationError,
    ResultsIOError,
)
from dsat_precoding.core.models import (
    Geometry,
    EffectiveChannelSet,
    ChannelRealization,
    PowerBudget,
    PrecoderSet,
    RateReport,
    MseMatrix,
    SolverState,
    Assignment,
    ResultRow,
)
from dsat_precoding.core.config import ScenarioConfig, ExperimentSpec, LOS_ONLY_KAPPA

__all__ = [
    "BudgetKind", "RateKind", "ExperimentName", "PrecoderKind",
    "PrecodingError", "VisibilityError", "SingularMatrixError", "IterationLimitError",
    "NonMonotoneError", "ConfigError", "ConfigParseError", "ConfigValidationError",
    "ResultsIOError",
    "Geometry", "EffectiveChannelSet", "ChannelRealization", "PowerBudget", "PrecoderSet",
    "RateReport", "MseMatrix", "SolverState", "Assignment", "ResultRow",
    "ScenarioConfig", "ExperimentSpec", "LOS_ONLY_KAPPA",
]
