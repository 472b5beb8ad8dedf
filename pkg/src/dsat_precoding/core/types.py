"""
类型定义模块

包含所有枚举类型
"""

from enum import Enum


class BudgetKind(str, Enum):
    """功率约束类型"""
    PER_SAT = "per-sat"           # 每颗卫星总功率 ρ_l
    PER_ANTENNA = "per-antenna"   # 每个天线端口功率 ρ_{l,n}

    @classmethod
    def from_string(cls, value: str) -> "BudgetKind":
        value_norm = str(value).lower().strip().replace("_", "-")
        aliases = {
            "per-sat": cls.PER_SAT, "sat": cls.PER_SAT, "total": cls.PER_SAT,
            "per-antenna": cls.PER_ANTENNA, "antenna": cls.PER_ANTENNA, "pa": cls.PER_ANTENNA,
        }
        if value_norm not in aliases:
            raise ValueError(f"未知的功率约束类型: {value}")
        return aliases[value_norm]


class RateKind(str, Enum):
    """速率评估方式"""
    EXACT_MC = "exact-mc"         # Monte-Carlo 精确速率
    APPROXIMATE = "approximate"   # 统计 CSI 近似速率


class ExperimentName(str, Enum):
    """实验类型"""
    APPROX_VALIDITY = "approx-validity"     # 近似速率有效性
    SINGULAR_RATIO = "singular-ratio"       # σ2/σ1 随卫星角度展宽
    RATE_VS_POWER = "rate-vs-power"         # 和速率 vs 功率 / 卫星数 / 约束类型
    BASELINE_COMPARE = "baseline-compare"   # 与传统预编码对比
    SINGLE_SOLVE = "single-solve"           # 单次求解

    @classmethod
    def from_string(cls, value: str) -> "ExperimentName":
        value_norm = str(value).lower().strip().replace("_", "-")
        for item in cls:
            if item.value == value_norm:
                return item
        raise ValueError(f"未知的实验类型: {value}")


class PrecoderKind(str, Enum):
    """预编码方案"""
    WMMSE = "wmmse"
    MMSE = "mmse"
    RZF = "rzf"
    MRT = "mrt"
    NONCOOP_MRT = "noncoop-mrt"
