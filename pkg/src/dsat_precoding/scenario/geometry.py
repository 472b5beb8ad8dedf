"""
场景几何

2-D 地心坐标系 (x 水平, z 指向天顶):
- 卫星在半径 R_E + h 的圆上等角间隔分布于 [−ϑ_s, ϑ_s]
- 用户在半径 R_E 的圆上均匀随机分布于 [−ϑ_u, ϑ_u]
- 卫星阵列视轴指向地心, 用户阵列视轴沿径向向外
"""

from typing import Optional, Tuple

import numpy as np

from dsat_precoding.core.config import ScenarioConfig
from dsat_precoding.core.errors import VisibilityError
from dsat_precoding.core.models import Geometry
from dsat_precoding.utils.logger import get_logger


logger = get_logger(__name__)


def place_satellites(L: int, theta_s: float) -> np.ndarray:
    """
    卫星角度位置: [−ϑ_s, ϑ_s] 上含端点的等间隔网格

    Args:
        L: 卫星数
        theta_s: 角度半宽 [rad]

    Returns:
        升序角度数组 (L,); L = 1 时为 [0]
    """
    if L == 1:
        return np.zeros(1)
    return np.linspace(-theta_s, theta_s, L)


def place_users(K: int, theta_u: float, rng: np.random.Generator) -> np.ndarray:
    """用户角度位置: [−ϑ_u, ϑ_u] 上 K 个独立均匀样本"""
    return rng.uniform(-theta_u, theta_u, size=K)


def position_of(angle, radius: float) -> np.ndarray:
    """
    角度 → 平面坐标 [r·sin ϑ, r·cos ϑ]

    angle 可以是数组, 输出形状为 angle.shape + (2,)
    """
    angle = np.asarray(angle, dtype=float)
    return np.stack([radius * np.sin(angle), radius * np.cos(angle)], axis=-1)


def _unit(v: np.ndarray, what: str) -> np.ndarray:
    norm = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise VisibilityError(f"{what} 为零向量, 无法确定方向")
    return v / norm


def _perp(u: np.ndarray) -> np.ndarray:
    """[u_x, u_z] → [−u_z, u_x]"""
    return np.stack([-u[..., 1], u[..., 0]], axis=-1)


def compute_angles(p_s: np.ndarray, p_u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    计算 AoD φ (卫星侧) 与 AoA θ (用户侧)

    φ = atan(s_⊥ᵀv / sᵀv), s = −p_s/‖p_s‖, v = p_u − p_s
    θ = atan(u_⊥ᵀw / uᵀw), u = p_u/‖p_u‖, w = −v

    支持广播: p_s 形状 (..., 2), p_u 形状 (..., 2)

    Raises:
        VisibilityError: 位置向量为零、两点重合, 或链路不在阵列前半球
    """
    p_s = np.asarray(p_s, dtype=float)
    p_u = np.asarray(p_u, dtype=float)

    s = -_unit(p_s, "卫星位置")
    u = _unit(p_u, "用户位置")
    v = p_u - p_s
    _unit(v, "卫星→用户方向")
    w = -v

    s_proj = np.sum(s * v, axis=-1)
    u_proj = np.sum(u * w, axis=-1)
    if np.any(s_proj <= 0):
        raise VisibilityError("用户位于卫星阵列后半球 (非可视链路)")
    if np.any(u_proj <= 0):
        raise VisibilityError("卫星位于用户地平线以下 (非可视链路)")

    aod = np.arctan(np.sum(_perp(s) * v, axis=-1) / s_proj)
    aoa = np.arctan(np.sum(_perp(u) * w, axis=-1) / u_proj)
    return aod, aoa


def path_gain(d, f_c: float, nu_c: float, G_s: float, G_u: float):
    """
    大尺度衰落 β = G_s·G_u·(ν_c / (4π f_c d))²

    Args:
        d: 距离 [m], 标量或数组
    """
    d = np.asarray(d, dtype=float)
    beta = G_s * G_u * (nu_c / (4.0 * np.pi * f_c * d)) ** 2
    return float(beta) if beta.ndim == 0 else beta


def build_geometry(
    config: ScenarioConfig,
    rng: Optional[np.random.Generator] = None,
    ue_angles: Optional[np.ndarray] = None,
) -> Geometry:
    """
    组装完整几何快照

    Args:
        config: 场景配置
        rng: 用户投放随机流 (ue_angles 未给出时必需)
        ue_angles: 直接指定用户角度 (K,), 用于复现固定投放

    Returns:
        Geometry
    """
    sat_angles = place_satellites(config.L, config.theta_s)
    if ue_angles is None:
        if rng is None:
            raise ValueError("build_geometry 需要 rng 或显式 ue_angles")
        ue_angles = place_users(config.K, config.theta_u, rng)
    ue_angles = np.asarray(ue_angles, dtype=float)
    if ue_angles.shape != (config.K,):
        raise ValueError(f"ue_angles 形状应为 ({config.K},), 实际 {ue_angles.shape}")

    sat_pos = position_of(sat_angles, config.R_E + config.h)
    ue_pos = position_of(ue_angles, config.R_E)

    # (L, 1, 2) 与 (1, K, 2) 广播为 (L, K)
    aod, aoa = compute_angles(sat_pos[:, None, :], ue_pos[None, :, :])
    dist = np.linalg.norm(sat_pos[:, None, :] - ue_pos[None, :, :], axis=-1)
    beta = path_gain(dist, config.f_c, config.nu_c, config.G_s, config.G_u)

    logger.debug(
        f"几何: L={config.L}, K={config.K}, "
        f"d∈[{dist.min() / 1e3:.1f}, {dist.max() / 1e3:.1f}] km, "
        f"|φ|max={np.degrees(np.abs(aod).max()):.2f}°"
    )

    return Geometry(
        sat_angles=sat_angles,
        ue_angles=ue_angles,
        sat_pos=sat_pos,
        ue_pos=ue_pos,
        aod=np.asarray(aod),
        aoa=np.asarray(aoa),
        dist=np.asarray(dist),
        beta=np.asarray(beta),
    )
