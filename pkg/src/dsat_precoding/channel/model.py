"""
信道模型

- ULA 阵列响应 a(φ)_m = exp(j·2πΔ·m·sin φ), 首阵元为相位参考
- 有效信道 H̃_{l,k} = √β_{l,k} b_{l,k} a_{l,k}ᵀ (统计 CSI, 秩一)
- Rician 增益 γ = √β(√(κ/(κ+1))·e^{jψ} + √(1/(κ+1))·z)
- 实际信道 H_{l,k} = γ_{l,k} b_{l,k} a_{l,k}ᵀ
"""

from typing import Optional, Tuple, Union

import numpy as np

from dsat_precoding.core.config import LOS_ONLY_KAPPA, ScenarioConfig
from dsat_precoding.core.models import ChannelRealization, EffectiveChannelSet, Geometry


def ula_response(angle, n_elems: int, spacing: float = 0.5) -> np.ndarray:
    """
    均匀线阵响应

    Args:
        angle: 相对视轴的角度 [rad], 标量或数组
        n_elems: 阵元数
        spacing: 阵元间距 [波长]

    Returns:
        单位模复向量, 形状 angle.shape + (n_elems,)
    """
    angle = np.asarray(angle, dtype=float)
    m = np.arange(n_elems)
    return np.exp(1j * 2.0 * np.pi * spacing * np.sin(angle)[..., None] * m)


def effective_channel(beta, b: np.ndarray, a: np.ndarray) -> np.ndarray:
    """H̃ = √β · b aᵀ (转置而非共轭转置), 支持批量"""
    beta = np.asarray(beta, dtype=float)
    return np.sqrt(beta)[..., None, None] * np.einsum("...m,...n->...mn", b, a)


def build_effective_channels(geometry: Geometry, config: ScenarioConfig) -> EffectiveChannelSet:
    """由几何构造全部 (l, k) 的有效信道"""
    a = ula_response(geometry.aod, config.N, config.spacing)   # (L, K, N)
    b = ula_response(geometry.aoa, config.M, config.spacing)   # (L, K, M)
    return EffectiveChannelSet(
        H_tilde=effective_channel(geometry.beta, b, a),
        b=b,
        a=a,
        beta=geometry.beta,
    )


# ============================================
# Rician 衰落
# ============================================

def _rician_weights(kappa: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(LoS 幅度, 散射幅度); κ 超过阈值时为纯 LoS"""
    kappa = np.asarray(kappa, dtype=float)
    los_only = kappa >= LOS_ONLY_KAPPA
    safe = np.where(los_only, 1.0, kappa)
    los = np.where(los_only, 1.0, np.sqrt(safe / (safe + 1.0)))
    nlos = np.where(los_only, 0.0, np.sqrt(1.0 / (safe + 1.0)))
    return los, nlos


def sample_gains(
    beta: np.ndarray,
    kappa: np.ndarray,
    rng: np.random.Generator,
    size: Union[int, Tuple[int, ...], None] = None,
) -> np.ndarray:
    """
    批量采样 Rician 增益 γ

    Args:
        beta: 大尺度增益, 任意形状
        kappa: Rician 因子, 可与 beta 广播
        rng: 随机流
        size: 额外的前置样本维度

    Returns:
        复数数组, 形状 size + broadcast(beta, kappa).shape
    """
    beta, kappa = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(kappa, dtype=float))
    lead = () if size is None else ((size,) if isinstance(size, int) else tuple(size))
    shape = lead + beta.shape

    psi = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    los, nlos = _rician_weights(kappa)
    return np.sqrt(beta) * (los * np.exp(1j * psi) + nlos * z)


def sample_gain(beta: float, kappa: float, rng: np.random.Generator) -> complex:
    """单个 Rician 增益样本"""
    return complex(sample_gains(np.asarray(beta), np.asarray(kappa), rng))


def realize_channels(
    effective_set: EffectiveChannelSet,
    geometry: Geometry,
    kappa,
    rng: np.random.Generator,
    gamma: Optional[np.ndarray] = None,
) -> ChannelRealization:
    """
    一次信道实现 H_{l,k} = γ_{l,k} b_{l,k} a_{l,k}ᵀ

    Args:
        kappa: 标量或 (L, K)
        gamma: 直接给定增益 (L, K) 时不再采样
    """
    if gamma is None:
        kappa = np.broadcast_to(np.asarray(kappa, dtype=float), geometry.beta.shape)
        gamma = sample_gains(geometry.beta, kappa, rng)
    H = gamma[..., None, None] * np.einsum("lkm,lkn->lkmn", effective_set.b, effective_set.a)
    return ChannelRealization(gamma=gamma, H=H)


# ============================================
# 诊断
# ============================================

def stacked_singular_ratio(blocks: np.ndarray) -> float:
    """
    单个 UE 的水平拼接信道 [H̃_1, ..., H̃_L] 的 σ₂/σ₁

    Args:
        blocks: (L, M, N) 各卫星到该 UE 的有效信道

    Returns:
        [0, 1] 之间的比值; 数值秩 < 2 时为 0
    """
    blocks = np.asarray(blocks)
    stacked = np.concatenate(list(blocks), axis=1)   # (M, L·N)
    if min(stacked.shape) < 2:
        return 0.0
    s = np.linalg.svd(stacked, compute_uv=False)
    if s[0] == 0 or s[1] <= s[0] * max(stacked.shape) * np.finfo(float).eps:
        return 0.0
    return float(s[1] / s[0])
