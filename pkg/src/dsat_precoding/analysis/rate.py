"""
速率评估

- 近似速率 (统计 CSI): R̄_k = log₂|I + S_k T_k⁻¹|,
  S_k = Σ_l (H̃_{l,k}W_{l,k})(·)ᴴ, T_k = Σ_{i≠k} Σ_l (H̃_{l,k}W_{l,i})(·)ᴴ + σ²I
- 精确速率 (Monte-Carlo): 同一公式作用于 G_k = Σ_l H_{l,k}W_{l,k} 的相干叠加
- WMMSE 目标: Σ_k Tr(C_k E_k) − log₂|C_k|

所有 M×M 行列式均以 log2det(T + S) − log2det(T) 的形式计算。
"""

from concurrent.futures import ThreadPoolExecutor
from typing import List, Union

import numpy as np

from dsat_precoding.core.models import EffectiveChannelSet, Geometry, PrecoderSet, RateReport
from dsat_precoding.core.types import RateKind
from dsat_precoding.channel.model import sample_gains
from dsat_precoding.utils.linalg import dagger, hermitian, log2det_hpd
from dsat_precoding.utils.logger import get_logger


logger = get_logger(__name__)

PrecoderLike = Union[PrecoderSet, np.ndarray]

# 每个 MC 批次的试验数
MC_CHUNK = 256


def _W(precoders: PrecoderLike) -> np.ndarray:
    return precoders.W if isinstance(precoders, PrecoderSet) else np.asarray(precoders)


def link_products(effective_set: EffectiveChannelSet, precoders: PrecoderLike) -> np.ndarray:
    """
    HW[l, k, i] = H̃_{l,k} W_{l,i}

    Returns:
        (L, K, K, M, M): 卫星 l 发往用户 i 的数据流在用户 k 处的 M×M 等效信道
    """
    return np.einsum("lkmn,lino->lkimo", effective_set.H_tilde, _W(precoders))


def covariance_blocks(HW: np.ndarray) -> np.ndarray:
    """
    Q[k, i] = Σ_l (H̃_{l,k}W_{l,i})(H̃_{l,k}W_{l,i})ᴴ (非相干叠加)

    Returns:
        (K, K, M, M)
    """
    return np.einsum("lkimo,lkipo->kimp", HW, np.conj(HW))


def _rates_from_blocks(Q: np.ndarray, sigma2: float) -> np.ndarray:
    """
    Q[..., k, i, :, :] → 每用户速率 (..., K)
    """
    K, M = Q.shape[-3], Q.shape[-1]
    idx = np.arange(K)
    signal = Q[..., idx, idx, :, :]                       # (..., K, M, M)
    total = np.sum(Q, axis=-3) + sigma2 * np.eye(M)       # (..., K, M, M)
    interference = total - signal
    rates = log2det_hpd(total) - log2det_hpd(interference)
    return np.maximum(rates, 0.0)


def approx_rate(
    effective_set: EffectiveChannelSet,
    precoders: PrecoderLike,
    sigma2: float,
) -> RateReport:
    """
    统计 CSI 近似速率

    Args:
        effective_set: 有效信道
        precoders: PrecoderSet 或 (L, K, N, M) 数组
        sigma2: 噪声功率 [W]
    """
    Q = covariance_blocks(link_products(effective_set, precoders))
    return RateReport(per_ue=_rates_from_blocks(Q, sigma2), kind=RateKind.APPROXIMATE)


def _mc_chunk(
    HW: np.ndarray,
    beta: np.ndarray,
    kappa: np.ndarray,
    rngs: List[np.random.Generator],
    sigma2: float,
) -> np.ndarray:
    """一批试验的每用户速率 (T_chunk, K)"""
    gamma = np.stack([sample_gains(beta, kappa, rng) for rng in rngs])   # (T, L, K)
    scale = gamma / np.sqrt(beta)
    # H_{l,k} = (γ_{l,k}/√β_{l,k}) H̃_{l,k}, 各卫星相干叠加
    F = np.einsum("tlk,lkimo->tkimo", scale, HW)                         # (T, K, K, M, M)
    Q = F @ dagger(F)
    return _rates_from_blocks(Q, sigma2)


def exact_rate_mc(
    effective_set: EffectiveChannelSet,
    geometry: Geometry,
    kappa,
    precoders: PrecoderLike,
    sigma2: float,
    trials: int,
    rng: np.random.Generator,
    threads: int = 1,
) -> RateReport:
    """
    Monte-Carlo 精确速率 (每个试验使用 rng.spawn 派生的独立随机流)

    Args:
        kappa: Rician 因子, 标量或 (L, K)
        trials: 试验次数
        rng: 父随机流
        threads: 批次并行线程数 (结果与串行一致)
    """
    if trials < 1:
        raise ValueError(f"trials 必须 ≥ 1, 实际 {trials}")

    HW = link_products(effective_set, precoders)
    beta = geometry.beta
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), beta.shape)
    streams = rng.spawn(trials)
    chunks = [streams[i:i + MC_CHUNK] for i in range(0, trials, MC_CHUNK)]

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _mc_chunk(HW, beta, kappa, c, sigma2), chunks))
    else:
        parts = [_mc_chunk(HW, beta, kappa, c, sigma2) for c in chunks]
    samples = np.concatenate(parts, axis=0)   # (T, K)

    per_ue = samples.mean(axis=0)
    if trials > 1:
        stderr = samples.std(axis=0, ddof=1) / np.sqrt(trials)
        sum_stderr = float(samples.sum(axis=1).std(ddof=1) / np.sqrt(trials))
    else:
        stderr = np.zeros_like(per_ue)
        sum_stderr = 0.0

    logger.debug(f"MC 速率: trials={trials}, sum={per_ue.sum():.4f} ± {sum_stderr:.4f}")
    return RateReport(
        per_ue=per_ue,
        kind=RateKind.EXACT_MC,
        trials=trials,
        stderr=stderr,
        sum_stderr=sum_stderr,
    )


# ============================================
# WMMSE 目标
# ============================================

def stream_blocks(HW: np.ndarray) -> np.ndarray:
    """
    各卫星信号块横向拼接 Ḡ_k = [H̃_{1,k}W_{1,k}, ..., H̃_{L,k}W_{L,k}]

    不同卫星的信号按功率叠加 (与近似速率的非相干信号项一致),
    因此每颗卫星的贡献视为一路独立的 M 维虚拟数据流。

    Returns:
        (K, M, L·M)
    """
    L, K, _, M, _ = HW.shape
    idx = np.arange(K)
    own = HW[:, idx, idx]                                   # (L, K, M, M)
    return own.transpose(1, 2, 0, 3).reshape(K, M, L * M)


def mse_matrices(
    U: np.ndarray,
    precoders: PrecoderLike,
    effective_set: EffectiveChannelSet,
    sigma2: float,
) -> np.ndarray:
    """
    全部用户的 MSE 矩阵

    E_k = U_kᴴ(A_k + σ²I)U_k − U_kᴴḠ_k − Ḡ_kᴴU_k + I,
    A_k = Σ_i Σ_l (H̃_{l,k}W_{l,i})(·)ᴴ

    Args:
        U: (K, M, L·M) 接收合并矩阵

    Returns:
        (K, L·M, L·M), Hermitian 对称化; L = 1 时即 M×M
    """
    HW = link_products(effective_set, precoders)
    Q = covariance_blocks(HW)
    M = Q.shape[-1]
    A = np.sum(Q, axis=1) + sigma2 * np.eye(M)   # (K, M, M)
    G = stream_blocks(HW)                        # (K, M, L·M)
    Uh = dagger(U)
    E = Uh @ A @ U - Uh @ G - dagger(G) @ U + np.eye(U.shape[-1])
    return hermitian(E)


def wmmse_objective(
    U: np.ndarray,
    C: np.ndarray,
    precoders: PrecoderLike,
    effective_set: EffectiveChannelSet,
    sigma2: float,
) -> float:
    """
    Σ_k Tr(C_k E_k) − log₂|C_k|

    Raises:
        SingularMatrixError: 某个 C_k 非正定
    """
    E = mse_matrices(U, precoders, effective_set, sigma2)
    trace = np.real(np.einsum("kij,kji->k", C, E))
    return float(np.sum(trace - log2det_hpd(C)))
