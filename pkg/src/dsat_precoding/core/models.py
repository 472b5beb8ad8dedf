"""
核心数据模型

几何、信道、预编码、速率报告、求解器状态等值对象。
数组形状约定 (l=卫星, k/i=用户, n=卫星天线, m=用户天线):
- 几何量: (L, K)
- 有效信道 H̃: (L, K, M, N)
- 预编码 W: (L, K, N, M)
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from dsat_precoding.core.types import BudgetKind, RateKind


# ============================================
# 几何
# ============================================

@dataclass(frozen=True, eq=False)
class Geometry:
    """2-D 地心坐标系下的卫星/用户几何快照"""
    sat_angles: np.ndarray   # ϑ_{s,l} [rad], (L,)
    ue_angles: np.ndarray    # ϑ_{u,k} [rad], (K,)
    sat_pos: np.ndarray      # p_{s,l} [m], (L, 2)
    ue_pos: np.ndarray       # p_{u,k} [m], (K, 2)
    aod: np.ndarray          # φ_{l,k} [rad], (L, K)
    aoa: np.ndarray          # θ_{l,k} [rad], (L, K)
    dist: np.ndarray         # d_{l,k} [m], (L, K)
    beta: np.ndarray         # β_{l,k} [linear], (L, K)

    @property
    def num_sats(self) -> int:
        return int(self.sat_angles.shape[0])

    @property
    def num_users(self) -> int:
        return int(self.ue_angles.shape[0])

    def to_dict(self) -> dict:
        return {
            "sat_angles_deg": np.degrees(self.sat_angles).tolist(),
            "ue_angles_deg": np.degrees(self.ue_angles).tolist(),
            "aod_deg": np.degrees(self.aod).tolist(),
            "aoa_deg": np.degrees(self.aoa).tolist(),
            "dist_km": (self.dist / 1e3).tolist(),
            "beta": self.beta.tolist(),
        }


# ============================================
# 信道
# ============================================

@dataclass(frozen=True, eq=False)
class EffectiveChannelSet:
    """确定性秩一有效信道 H̃_{l,k} = √β_{l,k} b_{l,k} a_{l,k}ᵀ"""
    H_tilde: np.ndarray   # (L, K, M, N)
    b: np.ndarray         # UE 阵列响应, (L, K, M)
    a: np.ndarray         # SAT 阵列响应, (L, K, N)
    beta: np.ndarray      # (L, K)

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        """(L, K, M, N)"""
        L, K, M, N = self.H_tilde.shape
        return L, K, M, N


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """一次衰落实现 H_{l,k} = γ_{l,k} b_{l,k} a_{l,k}ᵀ"""
    gamma: np.ndarray   # (L, K) complex
    H: np.ndarray       # (L, K, M, N)


# ============================================
# 预编码与功率约束
# ============================================

@dataclass(frozen=True, eq=False)
class PowerBudget:
    """
    功率预算描述

    - PER_SAT: values 形状 (L,), ρ_l
    - PER_ANTENNA: values 形状 (L, N), ρ_{l,n}
    """
    kind: BudgetKind
    values: np.ndarray

    @classmethod
    def per_sat(cls, rho) -> "PowerBudget":
        return cls(BudgetKind.PER_SAT, np.asarray(rho, dtype=float).reshape(-1))

    @classmethod
    def per_antenna(cls, rho) -> "PowerBudget":
        values = np.asarray(rho, dtype=float)
        if values.ndim != 2:
            raise ValueError(f"per-antenna 预算需要 (L, N) 矩阵, 实际形状 {values.shape}")
        return cls(BudgetKind.PER_ANTENNA, values)

    @property
    def sat_totals(self) -> np.ndarray:
        """每颗卫星总预算 (L,)"""
        if self.kind == BudgetKind.PER_SAT:
            return self.values
        return self.values.sum(axis=1)


@dataclass(frozen=True, eq=False)
class PrecoderSet:
    """L×K 个 N×M 预编码矩阵 W_{l,k} 及其功率预算"""
    W: np.ndarray            # (L, K, N, M) complex
    budget: PowerBudget

    # 判定可行性时的相对容差
    FEASIBILITY_RTOL = 1e-9

    def sat_power(self) -> np.ndarray:
        """Σ_k Tr(W_{l,k}ᴴ W_{l,k}), (L,)"""
        return np.sum(np.abs(self.W) ** 2, axis=(1, 2, 3))

    def antenna_power(self) -> np.ndarray:
        """Σ_k Tr(W_{l,k}ᴴ E_n W_{l,k}) = 第 n 行功率, (L, N)"""
        return np.sum(np.abs(self.W) ** 2, axis=(1, 3))

    def is_feasible(self, rtol: Optional[float] = None) -> bool:
        rtol = self.FEASIBILITY_RTOL if rtol is None else rtol
        if self.budget.kind == BudgetKind.PER_SAT:
            return bool(np.all(self.sat_power() <= self.budget.values * (1.0 + rtol)))
        return bool(np.all(self.antenna_power() <= self.budget.values * (1.0 + rtol)))


# ============================================
# 速率
# ============================================

@dataclass(frozen=True, eq=False)
class RateReport:
    """每用户速率与和速率 [bit/s/Hz]"""
    per_ue: np.ndarray
    kind: RateKind
    trials: int = 0
    stderr: Optional[np.ndarray] = None   # 仅 MC, 每用户标准误
    sum_stderr: float = 0.0               # 仅 MC, 按试验求和后的标准误

    @property
    def sum(self) -> float:
        return float(np.sum(self.per_ue))


# ============================================
# 求解器
# ============================================

@dataclass(frozen=True, eq=False)
class MseMatrix:
    """UE k 的 MSE 矩阵 E_k (L·M × L·M, Hermitian 半正定; L = 1 时为 M×M)"""
    E: np.ndarray
    ue: int = 0


@dataclass(eq=False)
class SolverState:
    """WMMSE 块坐标下降的完整状态"""
    U: np.ndarray                 # (K, M, L·M) 接收合并矩阵
    C: np.ndarray                 # (K, L·M, L·M) 权重矩阵
    precoders: PrecoderSet
    mu: np.ndarray                # (L,) 或 (L, N)
    objective_trace: List[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    delta: float = float("inf")

    @property
    def W(self) -> np.ndarray:
        return self.precoders.W

    @property
    def objective(self) -> float:
        return self.objective_trace[-1] if self.objective_trace else float("inf")


# ============================================
# 基线
# ============================================

@dataclass(frozen=True)
class Assignment:
    """非协作 MRT 的服务关系: serving_sat[k] = 服务 UE k 的卫星索引"""
    serving_sat: Tuple[int, ...]

    def users_of(self, l: int) -> List[int]:
        return [k for k, sat in enumerate(self.serving_sat) if sat == l]


# ============================================
# 实验结果
# ============================================

@dataclass
class ResultRow:
    """一个扫描点上的一个指标"""
    params: Dict[str, object]
    metric: str
    value: float
    stderr: float = 0.0
    iters: int = 0
    wall_ms: float = 0.0

    def to_dict(self) -> dict:
        return {
            **self.params,
            "metric": self.metric,
            "value": self.value,
            "stderr": self.stderr,
            "iters": self.iters,
            "wall_ms": self.wall_ms,
        }
