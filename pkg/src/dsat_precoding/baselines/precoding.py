"""
基线预编码

- MRT: W̃_{l,k} = H̃_{l,k}ᴴ
- RZF: W̃_{l,k} = (Σ_i H̃_{l,i}ᴴH̃_{l,i} + Kσ²/ρ_l·I)⁻¹ H̃_{l,k}ᴴ
- MMSE: 与求解器初值相同 (σ² 对角加载)
- 非协作 MRT: 贪心分配最近卫星, 每颗卫星全功率服务一个用户

协作基线统一使用 √β 加权功率分配; 每天线预算下按行归一化。
"""

from typing import Optional

import numpy as np

from dsat_precoding.core.config import ScenarioConfig
from dsat_precoding.core.models import (
    Assignment,
    EffectiveChannelSet,
    Geometry,
    PowerBudget,
    PrecoderSet,
)
from dsat_precoding.core.types import BudgetKind, PrecoderKind
from dsat_precoding.solver.wmmse import init_precoders, mmse_directions, scale_to_budget
from dsat_precoding.utils.linalg import dagger


def _beta(effective_set: EffectiveChannelSet, geometry: Optional[Geometry]) -> np.ndarray:
    return effective_set.beta if geometry is None else geometry.beta


def mrt_precoding(
    effective_set: EffectiveChannelSet,
    budget: PowerBudget,
    geometry: Optional[Geometry] = None,
) -> PrecoderSet:
    """最大比传输: 方向 H̃ᴴ"""
    return scale_to_budget(dagger(effective_set.H_tilde), _beta(effective_set, geometry), budget)


def rzf_precoding(
    effective_set: EffectiveChannelSet,
    budget: PowerBudget,
    sigma2: float,
    geometry: Optional[Geometry] = None,
    regularization: Optional[float] = None,
) -> PrecoderSet:
    """
    正则化迫零

    Args:
        regularization: 对角加载; None 时为 Kσ²/ρ_l
    """
    L, K, M, N = effective_set.shape
    if regularization is None:
        lam = K * sigma2 / budget.sat_totals
    else:
        lam = np.full(L, float(regularization))
    directions = mmse_directions(effective_set, lam)
    return scale_to_budget(directions, _beta(effective_set, geometry), budget)


def mmse_precoding(
    effective_set: EffectiveChannelSet,
    budget: PowerBudget,
    sigma2: float,
    geometry: Optional[Geometry] = None,
) -> PrecoderSet:
    """MMSE 基线 (即求解器初值)"""
    if geometry is None:
        return scale_to_budget(mmse_directions(effective_set, sigma2), effective_set.beta, budget)
    return init_precoders(effective_set, geometry, budget, sigma2)


# ============================================
# 非协作 MRT
# ============================================

def assign_closest(dist: np.ndarray) -> Assignment:
    """
    贪心分配: 依次为 UE 1..K 选择剩余卫星中距离最近的一颗

    Args:
        dist: (L, K) 距离矩阵 (卫星为行)

    Raises:
        ValueError: L < K
    """
    dist = np.asarray(dist, dtype=float)
    L, K = dist.shape
    if L < K:
        raise ValueError(f"非协作分配需要 L ≥ K, 实际 L={L}, K={K}")
    available = np.ones(L, dtype=bool)
    serving = []
    for k in range(K):
        candidates = np.where(available, dist[:, k], np.inf)
        l = int(np.argmin(candidates))   # 相等时取最小索引
        available[l] = False
        serving.append(l)
    return Assignment(serving_sat=tuple(serving))


def noncoop_assignment(geometry: Geometry) -> Assignment:
    """按几何距离的贪心卫星-用户分配"""
    return assign_closest(geometry.dist)


def noncoop_mrt_precoding(
    effective_set: EffectiveChannelSet,
    assignment: Assignment,
    budget: PowerBudget,
) -> PrecoderSet:
    """
    非协作 MRT: 服务卫星以全部预算向其用户做 MRT, 其余 W 为零
    """
    mrt = dagger(effective_set.H_tilde)          # (L, K, N, M)
    W = np.zeros_like(mrt)
    for l in range(W.shape[0]):
        for k in assignment.users_of(l):
            direction = mrt[l, k]
            if budget.kind == BudgetKind.PER_SAT:
                norm = np.linalg.norm(direction)
                if norm > 0:
                    W[l, k] = direction * np.sqrt(budget.values[l]) / norm
            else:
                rows = np.linalg.norm(direction, axis=1)
                scale = np.divide(
                    np.sqrt(budget.values[l]), rows, out=np.zeros_like(rows), where=rows > 0
                )
                W[l, k] = direction * scale[:, None]
    return PrecoderSet(W=W, budget=budget)


def build_precoders(
    kind: PrecoderKind,
    effective_set: EffectiveChannelSet,
    geometry: Geometry,
    config: ScenarioConfig,
    budget: PowerBudget,
) -> PrecoderSet:
    """按名称构造基线预编码 (WMMSE 由求解器负责)"""
    if kind == PrecoderKind.MRT:
        return mrt_precoding(effective_set, budget, geometry)
    if kind == PrecoderKind.RZF:
        return rzf_precoding(
            effective_set, budget, config.sigma2, geometry, config.rzf_regularization
        )
    if kind == PrecoderKind.MMSE:
        return mmse_precoding(effective_set, budget, config.sigma2, geometry)
    if kind == PrecoderKind.NONCOOP_MRT:
        return noncoop_mrt_precoding(effective_set, noncoop_assignment(geometry), budget)
    raise ValueError(f"不是基线预编码: {kind}")
