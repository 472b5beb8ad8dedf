"""
配置数据类模块

ScenarioConfig: 物理场景 + 算法参数 (内部统一 SI / 线性 / 弧度)
ExperimentSpec: 实验配方 (扫描网格、MC 次数、投放次数、约束类型)

配置文件边界单位: 角度 *_deg, 分贝 *_db / *_dbm / *_dbi, 距离 *_km,
载频 carrier_ghz, 功率 rho_w。from_dict / to_dict 负责换算。
"""

import math
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Union

import numpy as np

from dsat_precoding.core.errors import ConfigValidationError
from dsat_precoding.core.models import PowerBudget
from dsat_precoding.core.types import BudgetKind, ExperimentName, PrecoderKind


# κ 大于该值视为纯 LoS (丢弃散射项)
LOS_ONLY_KAPPA = 1e12

ArrayLike = Union[float, np.ndarray]


def db_to_linear(value_db: ArrayLike) -> ArrayLike:
    return np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value: ArrayLike) -> ArrayLike:
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(value, dtype=float))


def dbm_to_watt(value_dbm: float) -> float:
    return float(10.0 ** ((float(value_dbm) - 30.0) / 10.0))


def watt_to_dbm(value_w: float) -> float:
    return float(10.0 * math.log10(value_w) + 30.0)


def _to_plain(value: ArrayLike) -> Any:
    """numpy → YAML/JSON 可序列化"""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return arr.tolist()


# ============================================
# 场景配置
# ============================================

@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    """场景与算法参数 (默认值即仿真基准参数)"""
    # 规模
    L: int = 8                         # 卫星数
    N: int = 8                         # 每星天线数
    K: int = 8                         # 用户数
    M: int = 2                         # 每用户天线数

    # 几何
    h: float = 500e3                   # 轨道高度 [m]
    R_E: float = 6371e3                # 地球半径 [m]
    theta_s: float = math.radians(5.0)   # 卫星角度半宽 [rad]
    theta_u: float = math.radians(1.0)   # 用户角度半宽 [rad]

    # 链路预算
    rho: ArrayLike = 50.0              # 标量 / (L,) 每星 / (L, N) 每天线 [W]
    sigma2: float = 10.0 ** (-15.4)    # 噪声功率 [W] (−124 dBm)
    f_c: float = 8e9                   # 载频 [Hz]
    nu_c: float = 3e8                  # 光速 [m/s]
    G_s: float = 10.0 ** 0.6           # 卫星天线增益 (6 dBi)
    G_u: float = 1.0                   # 用户天线增益 (0 dBi)
    kappa: ArrayLike = 10.0 ** 1.2     # Rician 因子, 标量或 (L, K) (12 dB)
    spacing: float = 0.5               # 阵元间距 [波长]
    seed: int = 2025

    # 外层块坐标下降
    epsilon: float = 1e-4              # 外层收敛阈值 ε
    I_max: int = 1000                  # 外层最大迭代次数
    extrapolation: bool = True         # 带目标下降检验的 W 外推

    # 每星乘子二分
    alpha: float = 2.0                 # 几何扩张倍数 α
    eps_mu: float = 1e-3               # 二分区间宽度 ε_bis
    mu_init: float = 1.0               # μ=0 不可行时的初值
    expansion_cap: int = 60            # 扩张次数上限
    power_rtol: float = 1e-9           # 二分后功率收紧的相对精度

    # 椭球法 (每天线乘子)
    ellipsoid_radius: float = 1e6
    ellipsoid_tol: float = 1e-4
    ellipsoid_iter_per_dim: int = 500
    ellipsoid_warm_start: bool = True
    antenna_sweeps: int = 500          # 对偶坐标上升轮数, 0 表示直接用椭球法

    # 基线 / 保护
    rzf_regularization: Optional[float] = None   # None → Kσ²/ρ_l
    monotone_slack: float = 1e-9

    # ============================================
    # 派生量
    # ============================================

    def sat_budgets(self) -> np.ndarray:
        """每星总功率 ρ_l, (L,)"""
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim == 0:
            return np.full(self.L, float(rho))
        if rho.ndim == 1:
            return rho.copy()
        return rho.sum(axis=1)

    def antenna_budgets(self) -> np.ndarray:
        """每天线功率 ρ_{l,n}, (L, N); 未显式给出时 ρ_l / N"""
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim == 2:
            return rho.copy()
        return np.repeat(self.sat_budgets()[:, None] / self.N, self.N, axis=1)

    def budget(self, kind: Union[BudgetKind, str] = BudgetKind.PER_SAT) -> PowerBudget:
        """按约束类型构造功率预算 (两种类型总功率一致)"""
        if isinstance(kind, str) and not isinstance(kind, BudgetKind):
            kind = BudgetKind.from_string(kind)
        if kind == BudgetKind.PER_ANTENNA:
            return PowerBudget.per_antenna(self.antenna_budgets())
        return PowerBudget.per_sat(self.sat_budgets())

    def kappa_matrix(self) -> np.ndarray:
        """κ_{l,k}, (L, K)"""
        kappa = np.asarray(self.kappa, dtype=float)
        return np.broadcast_to(kappa, (self.L, self.K)).copy()

    # ============================================
    # 校验与修改
    # ============================================

    def validate(self) -> "ScenarioConfig":
        """校验不变量, 违反时抛出 ConfigValidationError"""
        for name in ("L", "N", "K", "M", "I_max", "expansion_cap", "ellipsoid_iter_per_dim"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise ConfigValidationError(name, f"必须为 ≥ 1 的整数, 实际 {value!r}")

        for name in ("h", "R_E", "sigma2", "f_c", "nu_c", "G_s", "G_u", "spacing",
                     "epsilon", "eps_mu", "mu_init", "power_rtol",
                     "ellipsoid_radius", "ellipsoid_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ConfigValidationError(name, f"必须为有限正数, 实际 {value!r}")

        if isinstance(self.antenna_sweeps, bool) or not isinstance(self.antenna_sweeps, (int, np.integer)) \
                or self.antenna_sweeps < 0:
            raise ConfigValidationError("antenna_sweeps", f"必须为 ≥ 0 的整数, 实际 {self.antenna_sweeps!r}")
        if not (self.monotone_slack >= 0):
            raise ConfigValidationError("monotone_slack", "必须 ≥ 0")
        if not (self.alpha > 1):
            raise ConfigValidationError("alpha", f"扩张倍数必须 > 1, 实际 {self.alpha}")
        for name in ("theta_s", "theta_u"):
            value = getattr(self, name)
            if not (0 <= value < math.pi / 2):
                raise ConfigValidationError(name, f"必须位于 [0°, 90°), 实际 {math.degrees(value):.4f}°")

        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim == 1 and rho.shape != (self.L,):
            raise ConfigValidationError("rho", f"每星预算长度应为 L={self.L}, 实际 {rho.shape}")
        if rho.ndim == 2 and rho.shape != (self.L, self.N):
            raise ConfigValidationError("rho", f"每天线预算应为 L×N=({self.L}, {self.N}), 实际 {rho.shape}")
        if rho.ndim > 2:
            raise ConfigValidationError("rho", f"维度过多: {rho.shape}")
        if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
            raise ConfigValidationError("rho", "所有功率必须为有限正数")

        kappa = np.asarray(self.kappa, dtype=float)
        if kappa.ndim not in (0, 2) or (kappa.ndim == 2 and kappa.shape != (self.L, self.K)):
            raise ConfigValidationError("kappa", f"应为标量或 L×K=({self.L}, {self.K}), 实际 {kappa.shape}")
        if np.any(np.isnan(kappa)) or np.any(kappa < 0):
            raise ConfigValidationError("kappa", "Rician 因子必须 ≥ 0")

        if self.rzf_regularization is not None and not (self.rzf_regularization > 0):
            raise ConfigValidationError("rzf_regularization", "必须为正数或 null")
        return self

    def with_updates(self, **changes: Any) -> "ScenarioConfig":
        """
        修改字段并重新校验

        L / N / K 改变时, 与之不匹配的数组参数 (rho, kappa) 若为常数则折叠为标量,
        否则抛出 ConfigValidationError。
        """
        L = changes.get("L", self.L)
        N = changes.get("N", self.N)
        K = changes.get("K", self.K)
        if "rho" not in changes:
            changes["rho"] = _collapse(self.rho, {1: (L,), 2: (L, N)}, "rho")
        if "kappa" not in changes:
            changes["kappa"] = _collapse(self.kappa, {2: (L, K)}, "kappa")
        return replace(self, **changes).validate()

    # ============================================
    # 序列化 (边界单位)
    # ============================================

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "ScenarioConfig":
        """
        从配置字典创建 (边界单位 → 内部单位)

        Args:
            data: scenario / solver 键的扁平字典

        Raises:
            ConfigValidationError: 未知键或取值违反不变量
        """
        data = dict(data or {})
        kwargs: Dict[str, Any] = dict(boundary_field(key, value) for key, value in data.items())
        return cls(**kwargs).validate()

    def to_dict(self) -> Dict[str, Any]:
        """导出为边界单位字典 (可被 from_dict 读回)"""
        kappa = np.asarray(self.kappa, dtype=float)
        return {
            "L": self.L,
            "N": self.N,
            "K": self.K,
            "M": self.M,
            "altitude_km": self.h / 1e3,
            "earth_radius_km": self.R_E / 1e3,
            "theta_s_deg": math.degrees(self.theta_s),
            "theta_u_deg": math.degrees(self.theta_u),
            "rho_w": _to_plain(self.rho),
            "sigma2_dbm": watt_to_dbm(self.sigma2),
            "carrier_ghz": self.f_c / 1e9,
            "speed_of_light": self.nu_c,
            "sat_gain_dbi": float(linear_to_db(self.G_s)),
            "ue_gain_dbi": float(linear_to_db(self.G_u)),
            "kappa_db": _to_plain(linear_to_db(kappa)),
            "spacing": self.spacing,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "max_iter": self.I_max,
            "extrapolation": self.extrapolation,
            "alpha": self.alpha,
            "eps_mu": self.eps_mu,
            "mu_init": self.mu_init,
            "expansion_cap": self.expansion_cap,
            "power_rtol": self.power_rtol,
            "ellipsoid_radius": self.ellipsoid_radius,
            "ellipsoid_tol": self.ellipsoid_tol,
            "ellipsoid_iter_per_dim": self.ellipsoid_iter_per_dim,
            "ellipsoid_warm_start": self.ellipsoid_warm_start,
            "antenna_sweeps": self.antenna_sweeps,
            "rzf_regularization": self.rzf_regularization,
            "monotone_slack": self.monotone_slack,
        }


def _collapse(value: ArrayLike, shapes: Dict[int, tuple], name: str) -> ArrayLike:
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0 or shapes.get(arr.ndim) == arr.shape:
        return value
    flat = arr.reshape(-1)
    if np.all(flat == flat[0]):
        return float(flat[0])
    raise ConfigValidationError(name, f"非均匀数组 {arr.shape} 无法适配新的规模")


def _as_int(value: Any) -> int:
    if isinstance(value, bool):
        raise ValueError("布尔值不是整数")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError("需要整数")
    return int(value)


def _as_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    raise ValueError("需要 true / false")


def _as_power(value: Any) -> ArrayLike:
    arr = np.asarray(value, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


def _as_kappa_db(value: Any) -> ArrayLike:
    arr = db_to_linear(value)
    return float(arr) if np.ndim(arr) == 0 else np.asarray(arr)


def _as_optional_float(value: Any) -> Optional[float]:
    return None if value is None else float(value)


# 边界键 → (字段名, 换算函数)
_SCENARIO_KEYS = {
    "L": ("L", _as_int),
    "N": ("N", _as_int),
    "K": ("K", _as_int),
    "M": ("M", _as_int),
    "altitude_km": ("h", lambda v: float(v) * 1e3),
    "earth_radius_km": ("R_E", lambda v: float(v) * 1e3),
    "theta_s_deg": ("theta_s", lambda v: math.radians(float(v))),
    "theta_u_deg": ("theta_u", lambda v: math.radians(float(v))),
    "rho_w": ("rho", _as_power),
    "sigma2_dbm": ("sigma2", dbm_to_watt),
    "carrier_ghz": ("f_c", lambda v: float(v) * 1e9),
    "speed_of_light": ("nu_c", float),
    "sat_gain_dbi": ("G_s", lambda v: float(db_to_linear(float(v)))),
    "ue_gain_dbi": ("G_u", lambda v: float(db_to_linear(float(v)))),
    "kappa_db": ("kappa", _as_kappa_db),
    "spacing": ("spacing", float),
    "seed": ("seed", _as_int),
    "epsilon": ("epsilon", float),
    "max_iter": ("I_max", _as_int),
    "extrapolation": ("extrapolation", _as_bool),
    "alpha": ("alpha", float),
    "eps_mu": ("eps_mu", float),
    "mu_init": ("mu_init", float),
    "expansion_cap": ("expansion_cap", _as_int),
    "power_rtol": ("power_rtol", float),
    "ellipsoid_radius": ("ellipsoid_radius", float),
    "ellipsoid_tol": ("ellipsoid_tol", float),
    "ellipsoid_iter_per_dim": ("ellipsoid_iter_per_dim", _as_int),
    "ellipsoid_warm_start": ("ellipsoid_warm_start", _as_bool),
    "antenna_sweeps": ("antenna_sweeps", _as_int),
    "rzf_regularization": ("rzf_regularization", _as_optional_float),
    "monotone_slack": ("monotone_slack", float),
}


def boundary_field(key: str, value: Any) -> tuple:
    """
    单个边界键 → (字段名, 内部单位取值)

    Raises:
        ConfigValidationError: 未知键或无法解析
    """
    if key not in _SCENARIO_KEYS:
        raise ConfigValidationError(key, "未知配置项")
    target, convert = _SCENARIO_KEYS[key]
    try:
        return target, convert(value)
    except (TypeError, ValueError) as exc:
        raise ConfigValidationError(key, f"取值无法解析: {value!r} ({exc})") from exc


SCENARIO_KEYS = frozenset(_SCENARIO_KEYS)
SOLVER_KEYS = frozenset({
    "epsilon", "max_iter", "extrapolation", "alpha", "eps_mu", "mu_init", "expansion_cap", "power_rtol",
    "ellipsoid_radius", "ellipsoid_tol", "ellipsoid_iter_per_dim", "ellipsoid_warm_start",
    "antenna_sweeps",
    "rzf_regularization", "monotone_slack",
})


# ============================================
# 实验配置
# ============================================

# 可扫描的参数 (边界单位)
SWEEP_KEYS = (
    "rho_w", "L", "N", "M", "K", "theta_s_deg", "theta_u_deg", "kappa_db", "sigma2_dbm",
    "constraint",
)

# 各实验缺省扫描网格
DEFAULT_SWEEPS: Dict[ExperimentName, Dict[str, List[Any]]] = {
    ExperimentName.APPROX_VALIDITY: {"N": [4, 8, 16]},
    ExperimentName.SINGULAR_RATIO: {
        "L": [2, 4, 8],
        "theta_s_deg": [0.0, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 15.0, 20.0],
    },
    ExperimentName.RATE_VS_POWER: {
        "constraint": ["per-sat", "per-antenna"],
        "L": [2, 4, 8],
        "rho_w": [10.0, 50.0, 100.0],
    },
    ExperimentName.BASELINE_COMPARE: {"rho_w": [10.0, 50.0, 100.0]},
    ExperimentName.SINGLE_SOLVE: {},
}


@dataclass
class ExperimentSpec:
    """实验配方"""
    name: ExperimentName = ExperimentName.SINGLE_SOLVE
    sweep: Dict[str, List[Any]] = field(default_factory=dict)
    trials: int = 2000                 # MC 次数
    realizations: int = 10             # UE 随机投放次数
    constraint: BudgetKind = BudgetKind.PER_SAT
    seed: int = 2025
    threads: int = 1
    total_antennas: Optional[int] = None   # 固定 L·N (N = total / L)
    exact: bool = False                # rate-vs-power / baseline-compare 追加 MC 精确速率
    precoders: List[PrecoderKind] = field(
        default_factory=lambda: [kind for kind in PrecoderKind]
    )

    @property
    def sweep_keys(self) -> List[str]:
        return list(self.sweep)

    def points(self) -> List[Dict[str, Any]]:
        """扫描网格的笛卡尔积 (首个键变化最慢); 空网格对应单个点"""
        grid: List[Dict[str, Any]] = [{}]
        for key, values in self.sweep.items():
            grid = [{**point, key: value} for point in grid for value in values]
        return grid

    def validate(self) -> "ExperimentSpec":
        for key, values in self.sweep.items():
            if key not in SWEEP_KEYS:
                raise ConfigValidationError(f"sweep.{key}", f"不可扫描, 可选: {', '.join(SWEEP_KEYS)}")
            if not isinstance(values, list) or not values:
                raise ConfigValidationError(f"sweep.{key}", "扫描列表不能为空")
        if not self.points():
            raise ConfigValidationError("sweep", "扫描网格为空")
        for name in ("trials", "realizations", "threads"):
            if getattr(self, name) < 1:
                raise ConfigValidationError(name, f"必须 ≥ 1, 实际 {getattr(self, name)}")
        if self.total_antennas is not None and self.total_antennas < 1:
            raise ConfigValidationError("total_antennas", "必须 ≥ 1")
        if not self.precoders:
            raise ConfigValidationError("precoders", "至少需要一种预编码")
        return self

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]], seed: Optional[int] = None) -> "ExperimentSpec":
        """
        从 experiment 段创建

        Args:
            data: experiment 段字典
            seed: 场景段给出的种子 (experiment.seed 优先)
        """
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigValidationError(f"experiment.{key}", "未知配置项")

        try:
            name = ExperimentName.from_string(data.get("name", cls.name.value))
            constraint = BudgetKind.from_string(data.get("constraint", BudgetKind.PER_SAT.value))
            precoders = [PrecoderKind(str(p).lower()) for p in data.get("precoders", [p.value for p in PrecoderKind])]
        except ValueError as exc:
            raise ConfigValidationError("experiment", str(exc)) from exc

        sweep_raw = data.get("sweep")
        if sweep_raw is None:
            sweep = {k: list(v) for k, v in DEFAULT_SWEEPS[name].items()}
        elif isinstance(sweep_raw, dict):
            if not sweep_raw:
                raise ConfigValidationError("experiment.sweep", "扫描网格不能为空; 使用缺省网格请省略 sweep")
            sweep = {str(k): (v if isinstance(v, list) else [v]) for k, v in sweep_raw.items()}
        else:
            raise ConfigValidationError("experiment.sweep", "应为 参数名 → 取值列表 的映射")

        if "constraint" in sweep:
            try:
                sweep["constraint"] = [BudgetKind.from_string(v).value for v in sweep["constraint"]]
            except ValueError as exc:
                raise ConfigValidationError("sweep.constraint", str(exc)) from exc

        total = data.get("total_antennas")
        if total is None and name == ExperimentName.SINGULAR_RATIO and sweep_raw is None:
            total = 32

        try:
            spec = cls(
                name=name,
                sweep=sweep,
                trials=_as_int(data.get("trials", cls.trials)),
                realizations=_as_int(data.get("realizations", cls.realizations)),
                constraint=constraint,
                seed=_as_int(data.get("seed", seed if seed is not None else cls.seed)),
                threads=_as_int(data.get("threads", cls.threads)),
                total_antennas=None if total is None else _as_int(total),
                exact=_as_bool(data.get("exact", False)),
                precoders=precoders,
            )
        except ValueError as exc:
            raise ConfigValidationError("experiment", str(exc)) from exc
        return spec.validate()

    def to_dict(self) -> Dict[str, Any]:
        """导出 experiment 段; 空扫描网格省略 sweep 键"""
        data = {
            "name": self.name.value,
            "sweep": {k: list(v) for k, v in self.sweep.items()},
            "trials": self.trials,
            "realizations": self.realizations,
            "constraint": self.constraint.value,
            "seed": self.seed,
            "threads": self.threads,
            "total_antennas": self.total_antennas,
            "exact": self.exact,
            "precoders": [p.value for p in self.precoders],
        }
        if not self.sweep:
            data.pop("sweep")
        return data
