"""
WMMSE 块坐标下降

循环: 接收合并 U → 权重 C → 各卫星预编码 W (乘子约束) → 目标函数,
直到目标下降量 δ ≤ ε 或迭代次数达到 I_max。

每轮开头可沿上一轮 W 的变化方向外推一步, 仅当外推点的近似和速率更高时采用,
因此目标轨迹仍单调不增。
"""

import time
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from dsat_precoding.analysis.rate import (
    covariance_blocks,
    link_products,
    mse_matrices,
    stream_blocks,
    wmmse_objective,
)
from dsat_precoding.core.config import ScenarioConfig
from dsat_precoding.core.errors import IterationLimitError, NonMonotoneError, SingularMatrixError
from dsat_precoding.core.models import (
    EffectiveChannelSet,
    Geometry,
    MseMatrix,
    PowerBudget,
    PrecoderSet,
    SolverState,
)
from dsat_precoding.core.types import BudgetKind
from dsat_precoding.solver.multiplier import (
    SatSubproblem,
    bisect_multiplier,
    coordinate_multipliers,
    ellipsoid_multipliers,
    kkt_satisfied,
)
from dsat_precoding.utils.linalg import LN2, dagger, inv_hpd, solve_hpd
from dsat_precoding.utils.logger import get_logger


logger = get_logger(__name__)

PrecoderLike = Union[PrecoderSet, np.ndarray]

# 外推步长: 初值、上下限、成功 / 失败后的缩放
EXTRAPOLATION_INIT = 0.5
EXTRAPOLATION_MAX = 4.0
EXTRAPOLATION_MIN = 1e-3
EXTRAPOLATION_GROW = 1.5
EXTRAPOLATION_SHRINK = 0.5


def _W(precoders: PrecoderLike) -> np.ndarray:
    return precoders.W if isinstance(precoders, PrecoderSet) else np.asarray(precoders)


# ============================================
# 闭式块更新
# ============================================

def mse_matrix(
    U_k: np.ndarray,
    precoders: PrecoderLike,
    effective_set: EffectiveChannelSet,
    sigma2: float,
    k: int,
) -> MseMatrix:
    """UE k 的 MSE 矩阵 E_k"""
    L, K, M, N = effective_set.shape
    U = np.zeros((K, M, L * M), dtype=complex)
    U[k] = U_k
    return MseMatrix(E=mse_matrices(U, precoders, effective_set, sigma2)[k], ue=k)


def update_combiners(
    precoders: PrecoderLike,
    effective_set: EffectiveChannelSet,
    sigma2: float,
) -> np.ndarray:
    """
    MMSE 接收合并 U_k = (Σ_i Σ_l H̃_{l,k}W_{l,i}W_{l,i}ᴴH̃_{l,k}ᴴ + σ²I)⁻¹ Ḡ_k

    Ḡ_k = [H̃_{1,k}W_{1,k}, ..., H̃_{L,k}W_{L,k}], 每颗卫星的信号块对应一路虚拟数据流。

    Returns:
        (K, M, L·M); L = 1 时即 M×M
    """
    HW = link_products(effective_set, _W(precoders))
    Q = covariance_blocks(HW)
    M = Q.shape[-1]
    A = np.sum(Q, axis=1) + sigma2 * np.eye(M)
    return solve_hpd(A, stream_blocks(HW))


def update_weights(E: Union[np.ndarray, Sequence[MseMatrix]]) -> np.ndarray:
    """
    C_k = E_k⁻¹ / ln 2

    Raises:
        SingularMatrixError: 某个 E_k 数值奇异
    """
    if not isinstance(E, np.ndarray):
        E = np.stack([item.E for item in E])
    return inv_hpd(E) / LN2


def precoder_block_objective(
    W_l: np.ndarray,
    U: np.ndarray,
    C: np.ndarray,
    effective_set: EffectiveChannelSet,
    l: int,
) -> float:
    """卫星 l 的预编码块目标 Σ_k Tr(W_kᴴ G W_k) − 2Re Tr([U_k C_k]_lᴴ H̃_{l,k} W_k)"""
    return SatSubproblem(U, C, effective_set, l).objective(W_l)


def update_precoders_per_sat(
    mu_l: float,
    U: np.ndarray,
    C: np.ndarray,
    effective_set: EffectiveChannelSet,
    l: int,
) -> np.ndarray:
    """
    W_{l,k} = (G + μ_l I)⁻¹ H̃_{l,k}ᴴ [U_k C_k]_l, [·]_l 为卫星 l 对应的 M 列块

    Returns:
        (K, N, M)

    Raises:
        SingularMatrixError: μ_l = 0 且 G 秩亏
    """
    sub = SatSubproblem(U, C, effective_set, l)
    if mu_l == 0 and sub.singular:
        raise SingularMatrixError(f"SAT {l}: μ=0 时 Gram 矩阵秩亏, 无法求逆")
    K, N, M = sub.rhs.shape
    rhs = sub.rhs.transpose(1, 0, 2).reshape(N, K * M)
    X = solve_hpd(sub.gram + mu_l * np.eye(N), rhs)
    return X.reshape(N, K, M).transpose(1, 0, 2)


def update_precoders_per_antenna(
    mu_vec: np.ndarray,
    U: np.ndarray,
    C: np.ndarray,
    effective_set: EffectiveChannelSet,
    l: int,
) -> np.ndarray:
    """
    W_{l,k} = (G + Σ_n μ_{l,n} E_n)⁻¹ H̃_{l,k}ᴴ [U_k C_k]_l

    Raises:
        SingularMatrixError: 正则化后的矩阵仍奇异
    """
    sub = SatSubproblem(U, C, effective_set, l)
    mu_vec = np.asarray(mu_vec, dtype=float)
    if sub.singular and np.any(mu_vec == 0):
        A = sub.gram + np.diag(mu_vec)
        if np.linalg.matrix_rank(A) < A.shape[0]:
            raise SingularMatrixError(f"SAT {l}: 正则化矩阵秩亏, 无法求逆")
    K, N, M = sub.rhs.shape
    rhs = sub.rhs.transpose(1, 0, 2).reshape(N, K * M)
    X = solve_hpd(sub.gram + np.diag(mu_vec), rhs)
    return X.reshape(N, K, M).transpose(1, 0, 2)


# ============================================
# 初始化
# ============================================

def power_split(beta: np.ndarray) -> np.ndarray:
    """ρ_{l,k} / ρ_l = √β_{l,k} / Σ_i √β_{l,i}, (L, K)"""
    root = np.sqrt(beta)
    return root / root.sum(axis=1, keepdims=True)


def scale_to_budget(directions: np.ndarray, beta: np.ndarray, budget: PowerBudget) -> PrecoderSet:
    """
    按 √β 加权分配功率并归一化方向

    - 每星: ‖W_{l,k}‖_F² = ρ_l·split_{l,k}
    - 每天线: 第 n 行功率 = ρ_{l,n}·split_{l,k}

    Args:
        directions: (L, K, N, M) 未归一化方向
    """
    split = power_split(beta)
    if budget.kind == BudgetKind.PER_SAT:
        norm = np.linalg.norm(directions, axis=(2, 3))                     # (L, K)
        target = np.sqrt(budget.values[:, None] * split)
        scale = np.divide(target, norm, out=np.zeros_like(norm), where=norm > 0)
        W = directions * scale[:, :, None, None]
    else:
        norm = np.linalg.norm(directions, axis=3)                           # (L, K, N)
        target = np.sqrt(budget.values[:, None, :] * split[:, :, None])
        scale = np.divide(target, norm, out=np.zeros_like(norm), where=norm > 0)
        W = directions * scale[..., None]
    return PrecoderSet(W=W, budget=budget)


def mmse_directions(effective_set: EffectiveChannelSet, regularization) -> np.ndarray:
    """
    W̃_{l,k} = (Σ_i H̃_{l,i}ᴴH̃_{l,i} + λ_l I)⁻¹ H̃_{l,k}ᴴ

    Args:
        regularization: 标量或 (L,) 的对角加载 λ_l

    Returns:
        (L, K, N, M)
    """
    H = effective_set.H_tilde                         # (L, K, M, N)
    L, K, M, N = H.shape
    Hh = dagger(H)                                    # (L, K, N, M)
    gram = np.einsum("lknm,lkmj->lnj", Hh, H)          # (L, N, N)
    lam = np.broadcast_to(np.asarray(regularization, dtype=float), (L,))
    out = np.empty((L, K, N, M), dtype=complex)
    for l in range(L):
        rhs = Hh[l].transpose(1, 0, 2).reshape(N, K * M)
        X = solve_hpd(gram[l] + lam[l] * np.eye(N), rhs)
        out[l] = X.reshape(N, K, M).transpose(1, 0, 2)
    return out


def init_precoders(
    effective_set: EffectiveChannelSet,
    geometry: Geometry,
    budget: PowerBudget,
    sigma2: float,
) -> PrecoderSet:
    """MMSE 初值 (σ² 对角加载) + √β 加权功率分配"""
    return scale_to_budget(mmse_directions(effective_set, sigma2), geometry.beta, budget)


# ============================================
# 块坐标下降主循环
# ============================================

def _ellipsoid_attempts(
    sub: SatSubproblem,
    rho_row: np.ndarray,
    hint: np.ndarray,
    config: ScenarioConfig,
) -> List[Tuple[Optional[np.ndarray], float]]:
    """
    椭球法的 (中心, 半径) 序列

    热启动时以 hint (上一轮或坐标上升给出的乘子) 为中心, 先用半径 ‖hint‖ 的小球,
    未得到 KKT 点再用覆盖最优乘子上界的大球。
    """
    if not config.ellipsoid_warm_start:
        return [(None, config.ellipsoid_radius)]
    center = np.maximum(np.asarray(hint, dtype=float), 0.0)
    local = max(float(np.linalg.norm(center)), 10.0 * config.ellipsoid_tol)
    full = local + np.sqrt(len(rho_row)) * sub.multiplier_bound(rho_row)
    return [(center, local), (center, full)]


def _ellipsoid_update(l: int, sub: SatSubproblem, rho_row: np.ndarray, hint, config: ScenarioConfig):
    attempts = _ellipsoid_attempts(sub, rho_row, hint, config)
    for center, radius in attempts:
        try:
            mu, W_new, _ = ellipsoid_multipliers(
                sub,
                rho_row,
                center=center,
                radius=radius,
                tol=config.ellipsoid_tol,
                iter_per_dim=config.ellipsoid_iter_per_dim,
            )
        except IterationLimitError as exc:
            if exc.best is None:
                raise
            mu, W_new = exc.best
        if kkt_satisfied(mu, sub.antenna_power(W_new), rho_row):
            return mu, W_new
    logger.warning(f"⚠️ SAT {l}: 椭球法未达到 KKT 容差, 使用最优对偶迭代点")
    return mu, W_new


def _update_sat(
    l: int,
    U: np.ndarray,
    C: np.ndarray,
    effective_set: EffectiveChannelSet,
    budget: PowerBudget,
    config: ScenarioConfig,
    W_old: np.ndarray,
    mu_old,
):
    """卫星 l 的预编码更新; 新块不降低块目标时保留旧块"""
    sub = SatSubproblem(U, C, effective_set, l)

    if budget.kind == BudgetKind.PER_SAT:
        mu = bisect_multiplier(
            sub,
            float(budget.values[l]),
            alpha=config.alpha,
            eps_mu=config.eps_mu,
            mu_init=config.mu_init,
            expansion_cap=config.expansion_cap,
            power_rtol=config.power_rtol,
        )
        W_new = sub.precoders(mu)
    else:
        rho_row = budget.values[l]
        hint, W_new = mu_old, None
        if config.antenna_sweeps > 0:
            try:
                mu, W_new, _ = coordinate_multipliers(
                    sub, rho_row, start=mu_old, max_sweeps=config.antenna_sweeps
                )
            except IterationLimitError as exc:
                logger.debug(f"SAT {l}: {exc}, 改用椭球法")
                hint = exc.best[0]
            except SingularMatrixError as exc:
                logger.debug(f"SAT {l}: {exc}, 改用椭球法")
        if W_new is None:
            mu, W_new = _ellipsoid_update(l, sub, rho_row, hint, config)

    if sub.objective(W_new) > sub.objective(W_old):
        logger.debug(f"SAT {l}: 新预编码块未降低目标, 保留上一轮结果")
        return W_old, mu_old
    return W_new, mu


def project_to_budget(W: np.ndarray, budget: PowerBudget) -> np.ndarray:
    """超出预算的卫星 (每星) 或天线行 (每天线) 按比例缩回, 其余不变"""
    if budget.kind == BudgetKind.PER_SAT:
        power = np.sum(np.abs(W) ** 2, axis=(1, 2, 3))                     # (L,)
        scale = np.sqrt(np.minimum(1.0, np.divide(
            budget.values, power, out=np.ones_like(power), where=power > 0)))
        return W * scale[:, None, None, None]
    power = np.sum(np.abs(W) ** 2, axis=(1, 3))                            # (L, N)
    scale = np.sqrt(np.minimum(1.0, np.divide(
        budget.values, power, out=np.ones_like(power), where=power > 0)))
    return W * scale[:, None, :, None]


def _combiners_and_weights(W: np.ndarray, effective_set: EffectiveChannelSet, sigma2: float):
    U = update_combiners(W, effective_set, sigma2)
    C = update_weights(mse_matrices(U, W, effective_set, sigma2))
    return U, C


def _extrapolate(
    W: np.ndarray,
    W_base: np.ndarray,
    U: np.ndarray,
    C: np.ndarray,
    step: float,
    effective_set: EffectiveChannelSet,
    budget: PowerBudget,
    sigma2: float,
):
    """
    沿上一轮 W 的变化方向外推 W + step·(W − W_base) 并投影回预算

    U, C 取闭式最优时目标等于 常数 − 近似和速率, 只有外推点的目标严格更低才采用。

    Returns:
        (W, U, C, 是否采用)
    """
    trial = project_to_budget(W + step * (W - W_base), budget)
    try:
        U_trial, C_trial = _combiners_and_weights(trial, effective_set, sigma2)
    except SingularMatrixError:
        return W, U, C, False
    current = wmmse_objective(U, C, W, effective_set, sigma2)
    if wmmse_objective(U_trial, C_trial, trial, effective_set, sigma2) < current:
        return trial, U_trial, C_trial, True
    return W, U, C, False


def wmmse_solve(
    effective_set: EffectiveChannelSet,
    geometry: Geometry,
    config: ScenarioConfig,
    budget: Optional[PowerBudget] = None,
    initial: Optional[PrecoderSet] = None,
) -> SolverState:
    """
    WMMSE 块坐标下降求解

    Args:
        effective_set: 有效信道
        geometry: 几何 (提供 β 用于初始化功率分配)
        config: 场景与算法参数
        budget: 功率预算, 默认每星 ρ_l
        initial: 自定义初始预编码 (默认 MMSE 初值)

    Returns:
        SolverState (目标轨迹、迭代次数、收敛标志、乘子)

    Raises:
        NonMonotoneError: 目标上升超过 monotone_slack·|目标|
        IterationLimitError: 乘子扩张超限
    """
    budget = budget or config.budget(BudgetKind.PER_SAT)
    sigma2 = config.sigma2
    precoders = initial or init_precoders(effective_set, geometry, budget, sigma2)
    W = precoders.W.copy()
    L = W.shape[0]
    mu = np.zeros(budget.values.shape)

    trace: List[float] = []
    W_base: Optional[np.ndarray] = None
    step = EXTRAPOLATION_INIT
    previous = float("inf")
    delta = config.epsilon + 1.0
    iterations = 0
    U = C = None
    started = time.perf_counter()

    while delta > config.epsilon and iterations < config.I_max:
        iterations += 1
        U, C = _combiners_and_weights(W, effective_set, sigma2)
        if config.extrapolation and W_base is not None:
            W, U, C, accepted = _extrapolate(W, W_base, U, C, step, effective_set, budget, sigma2)
            if accepted:
                step = min(step * EXTRAPOLATION_GROW, EXTRAPOLATION_MAX)
            else:
                step = max(step * EXTRAPOLATION_SHRINK, EXTRAPOLATION_MIN)
        W_base = W

        W_next = np.empty_like(W)
        mu_next = np.empty_like(mu)
        for l in range(L):
            W_next[l], mu_next[l] = _update_sat(l, U, C, effective_set, budget, config, W[l], mu[l])
        W, mu = W_next, mu_next

        objective = wmmse_objective(U, C, W, effective_set, sigma2)
        if np.isfinite(previous) and objective > previous + config.monotone_slack * abs(previous):
            raise NonMonotoneError(
                f"第 {iterations} 轮目标上升: {previous:.12g} → {objective:.12g}"
            )
        delta = previous - objective
        previous = objective
        trace.append(objective)
        logger.debug(f"WMMSE 第 {iterations} 轮: 目标={objective:.8f}, δ={delta:.3e}")

    converged = delta <= config.epsilon
    elapsed = (time.perf_counter() - started) * 1000
    if converged:
        logger.info(f"✅ WMMSE 收敛: {iterations} 轮, 目标={previous:.6f}, 耗时 {elapsed:.0f}ms")
    else:
        logger.warning(f"⚠️ WMMSE 达到迭代上限 I_max={config.I_max}, δ={delta:.3e}")

    return SolverState(
        U=U,
        C=C,
        precoders=PrecoderSet(W=W, budget=budget),
        mu=mu,
        objective_trace=trace,
        iterations=iterations,
        converged=bool(converged),
        delta=float(delta),
    )
