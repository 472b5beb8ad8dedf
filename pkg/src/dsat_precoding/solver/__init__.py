"""
预编码求解模块

WMMSE 块坐标下降 + 拉格朗日乘子搜索 (每星二分 / 每天线对偶坐标上升与椭球法)
"""

from dsat_precoding.solver.multiplier import (
    SatSubproblem,
    bisect_multiplier,
    coordinate_multipliers,
    ellipsoid_multipliers,
    kkt_satisfied,
    solve_multiplier_per_sat,
    solve_multipliers_ellipsoid,
)
from dsat_precoding.solver.wmmse import (
    mse_matrix,
    update_combiners,
    update_weights,
    precoder_block_objective,
    update_precoders_per_sat,
    update_precoders_per_antenna,
    power_split,
    scale_to_budget,
    mmse_directions,
    init_precoders,
    project_to_budget,
    wmmse_solve,
)

__all__ = [
    "SatSubproblem", "bisect_multiplier", "coordinate_multipliers", "ellipsoid_multipliers",
    "kkt_satisfied", "solve_multiplier_per_sat", "solve_multipliers_ellipsoid",
    "mse_matrix", "update_combiners", "update_weights", "precoder_block_objective",
    "update_precoders_per_sat", "update_precoders_per_antenna", "power_split", "scale_to_budget",
    "mmse_directions", "init_precoders", "project_to_budget", "wmmse_solve",
]
