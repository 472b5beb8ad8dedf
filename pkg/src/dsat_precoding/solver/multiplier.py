"""
拉格朗日乘子搜索

卫星 l 的预编码子问题:
    min_W  Σ_k Tr(W_kᴴ G W_k) − 2Re Tr(R_kᴴ W_k),  R_k = H̃_{l,k}ᴴ [U_k C_k]_l
    s.t.   Σ_k Tr(W_kᴴ W_k) ≤ ρ_l                 (每星)
           Σ_k Tr(W_kᴴ E_n W_k) ≤ ρ_{l,n}  ∀n     (每天线)
其中 G = Σ_i H̃_{l,i}ᴴ U_i C_i U_iᴴ H̃_{l,i}, [·]_l 为卫星 l 对应的 M 列块。

- 每星: 几何扩张 + 二分 (功率关于 μ 单调不增), 之后再收紧到 power_rtol
- 每天线: 对偶坐标上升 (每个坐标闭式), 未达 KKT 时退回对偶函数 g(μ) 上的椭球法
"""

import math
from typing import Optional, Tuple

import numpy as np

from dsat_precoding.core.errors import IterationLimitError, SingularMatrixError
from dsat_precoding.core.models import EffectiveChannelSet
from dsat_precoding.utils.linalg import dagger, hermitian, inv_hpd, solve_hpd
from dsat_precoding.utils.logger import get_logger


logger = get_logger(__name__)

# 收紧阶段最多二分次数
POLISH_MAX_STEPS = 200

# 每天线可行性 / KKT 停止容差
ANTENNA_FEAS_RTOL = 1e-6
KKT_RTOL = 1e-4
ROW_RESCALE_RTOL = 1e-9


class SatSubproblem:
    """
    单颗卫星的预编码子问题

    Gram 矩阵只做一次特征分解, 任意标量 μ 下的功率和预编码都是 O(N·K·M)。
    Gram 奇异时零空间分量被投影掉 (右端项必在其列空间内), μ = 0 即为最小范数解。
    """

    def __init__(self, U: np.ndarray, C: np.ndarray, effective_set: EffectiveChannelSet, l: int):
        H = effective_set.H_tilde[l]                 # (K, M, N)
        M = H.shape[1]
        HU = dagger(H) @ U                           # (K, N, L·M)
        HUC = HU @ C                                 # (K, N, L·M)
        self.rhs = HUC[:, :, l * M:(l + 1) * M]      # H̃ᴴ [U C]_l, (K, N, M)
        self.gram = hermitian(np.einsum("knj,kpj->np", HUC, np.conj(HU)))
        self.N = self.gram.shape[0]

        lam, V = np.linalg.eigh(self.gram)
        self.tol = max(float(lam.max()), 0.0) * self.N * np.finfo(float).eps
        self.null = lam <= self.tol
        self.lam = np.where(self.null, 0.0, lam)
        self.V = V
        VR = np.einsum("jn,kjm->knm", np.conj(V), self.rhs)
        VR[:, self.null, :] = 0.0
        self.VR = VR
        self._weights = np.sum(np.abs(VR) ** 2, axis=(0, 2))   # (N,)

    @property
    def singular(self) -> bool:
        return bool(np.any(self.null))

    @property
    def spectral_norm(self) -> float:
        return float(self.lam.max()) if self.lam.size else 0.0

    # ============================================
    # 标量 μ (每星)
    # ============================================

    def _inv(self, mu: float) -> np.ndarray:
        d = self.lam + mu
        return np.divide(1.0, d, out=np.zeros_like(d), where=d > 0)

    def power(self, mu: float) -> float:
        """Σ_k ‖W_k(μ)‖_F²"""
        return float(np.sum(self._weights * self._inv(mu) ** 2))

    def precoders(self, mu: float) -> np.ndarray:
        """W_k(μ) = (G + μI)⁺ R_k, (K, N, M)"""
        return np.einsum("nj,kjm->knm", self.V, self.VR * self._inv(mu)[None, :, None])

    # ============================================
    # 向量 μ (每天线)
    # ============================================

    def precoders_diag(self, mu: np.ndarray) -> np.ndarray:
        """W_k(μ) = (G + diag μ)⁻¹ R_k; 奇异时取最小范数解"""
        K, N, M = self.rhs.shape
        rhs = self.rhs.transpose(1, 0, 2).reshape(N, K * M)
        A = self.gram + np.diag(np.asarray(mu, dtype=float))
        X = solve_hpd(A, rhs, fallback=True)
        return X.reshape(N, K, M).transpose(1, 0, 2)

    @staticmethod
    def antenna_power(W_l: np.ndarray) -> np.ndarray:
        """每天线功率 (N,)"""
        return np.sum(np.abs(W_l) ** 2, axis=(0, 2))

    def objective(self, W_l: np.ndarray) -> float:
        """Σ_k Tr(W_kᴴ G W_k) − 2Re Tr(R_kᴴ W_k)"""
        quad = np.real(np.sum(np.conj(W_l) * (self.gram @ W_l)))
        lin = np.real(np.sum(np.conj(self.rhs) * W_l))
        return float(quad - 2.0 * lin)

    def dual_value(self, mu: np.ndarray, W_l: np.ndarray, rho_row: np.ndarray) -> float:
        return self.objective(W_l) + float(np.sum(mu * (self.antenna_power(W_l) - rho_row)))

    def multiplier_bound(self, rho_row: np.ndarray) -> float:
        """
        最优乘子上界: 约束起作用时 ‖W_n‖ = √ρ_n, 由驻点条件
        μ_n ≤ (‖R‖_F + ‖G‖₂·√Σρ) / √ρ_n
        """
        rho_row = np.asarray(rho_row, dtype=float)
        numerator = np.linalg.norm(self.rhs) + self.spectral_norm * math.sqrt(float(rho_row.sum()))
        return float(numerator / math.sqrt(float(rho_row.min())))


# ============================================
# 每星: 几何扩张 + 二分
# ============================================

def bisect_multiplier(
    sub: SatSubproblem,
    rho_l: float,
    alpha: float = 2.0,
    eps_mu: float = 1e-3,
    mu_init: float = 1.0,
    expansion_cap: int = 60,
    power_rtol: float = 1e-9,
) -> float:
    """
    在已构造的子问题上搜索 μ_l*

    Returns:
        可行的 μ (功率 ≤ ρ_l); 约束不起作用时为 0
    """
    if sub.power(0.0) <= rho_l:
        return 0.0

    lower, upper, found = 0.0, math.inf, False
    mu = mu_init
    expansions = 0
    while upper - lower > eps_mu:
        if sub.power(mu) <= rho_l:
            upper = mu
            mu = 0.5 * (lower + upper)
            found = True
        elif found:
            lower = mu
            mu = 0.5 * (lower + upper)
        else:
            expansions += 1
            if expansions > expansion_cap:
                raise IterationLimitError(
                    f"乘子扩张超过 {expansion_cap} 次仍不可行 (μ={mu:.3e}, ρ={rho_l:.3e})"
                )
            mu *= alpha

    # 收紧: 二分到功率与预算的相对差 ≤ power_rtol
    for _ in range(POLISH_MAX_STEPS):
        if rho_l - sub.power(upper) <= power_rtol * rho_l or upper - lower <= upper * 1e-15:
            break
        mid = 0.5 * (lower + upper)
        if sub.power(mid) <= rho_l:
            upper = mid
        else:
            lower = mid
    return upper


def solve_multiplier_per_sat(
    U: np.ndarray,
    C: np.ndarray,
    effective_set: EffectiveChannelSet,
    rho_l: float,
    alpha: float,
    eps_mu: float,
    l: int,
    mu_init: float = 1.0,
    expansion_cap: int = 60,
    power_rtol: float = 1e-9,
) -> Tuple[float, np.ndarray]:
    """
    每星功率约束下的乘子与预编码

    Args:
        U, C: 接收合并 (K, M, L·M) / 权重矩阵 (K, L·M, L·M)
        effective_set: 有效信道
        rho_l: 卫星 l 的功率预算
        alpha: 扩张倍数 (> 1)
        eps_mu: 二分区间宽度
        l: 卫星索引

    Returns:
        (μ_l*, W_l) 其中 W_l 形状 (K, N, M)

    Raises:
        IterationLimitError: 扩张次数超限
    """
    sub = SatSubproblem(U, C, effective_set, l)
    mu = bisect_multiplier(sub, rho_l, alpha, eps_mu, mu_init, expansion_cap, power_rtol)
    return mu, sub.precoders(mu)


# ============================================
# 每天线: 对偶坐标上升 + 椭球法
# ============================================

def _clip_rows(W_l: np.ndarray, rho_row: np.ndarray) -> np.ndarray:
    """功率超出预算 (相对 > 1e-9) 的天线行按比例缩回"""
    power = SatSubproblem.antenna_power(W_l)
    over = power > rho_row * (1.0 + ROW_RESCALE_RTOL)
    if not np.any(over):
        return W_l
    scale = np.ones_like(power)
    scale[over] = np.sqrt(rho_row[over] / power[over])
    return W_l * scale[None, :, None]


def kkt_satisfied(
    mu: np.ndarray,
    power: np.ndarray,
    rho_row: np.ndarray,
    kkt_rtol: float = KKT_RTOL,
) -> bool:
    """每天线 KKT: 行功率 ≤ ρ_n(1 + 1e-6) 且 μ_n·|P_n − ρ_n| ≤ kkt_rtol·ρ_n"""
    slack = power - rho_row
    return bool(np.all(power <= rho_row * (1.0 + ANTENNA_FEAS_RTOL))
                and np.all(mu * np.abs(slack) <= kkt_rtol * rho_row))


def coordinate_multipliers(
    sub: SatSubproblem,
    rho_row: np.ndarray,
    start: Optional[np.ndarray] = None,
    max_sweeps: int = 500,
    kkt_rtol: float = KKT_RTOL,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    对偶坐标上升求每天线乘子

    固定其余乘子, A = (G + diag μ)⁻¹, 则 μ_n → μ_n + t 时第 n 行
    W_n(t) = W_n / (1 + t·A_nn), 行功率 P_n / (1 + t·A_nn)²。
    令其等于 ρ_n (或 t 截断到 μ_n + t ≥ 0) 即得该坐标上 g(μ) 的最大点,
    A 与 W 用秩一更新, 每轮开头重新求逆。

    Args:
        start: 热启动乘子 (负值截为 0, 零值抬到极小正数保证正定)
        max_sweeps: 最多轮数

    Returns:
        (μ, W_l, 轮数)

    Raises:
        IterationLimitError: max_sweeps 轮内未满足 KKT, best 为最后一轮的 (μ, W_l)
        SingularMatrixError: G + diag μ 数值奇异
    """
    rho_row = np.asarray(rho_row, dtype=float)
    n = rho_row.shape[0]

    W0 = sub.precoders(0.0)
    if np.all(sub.antenna_power(W0) <= rho_row):
        return np.zeros(n), W0, 0

    K, N, M = sub.rhs.shape
    rhs = sub.rhs.transpose(1, 0, 2).reshape(N, K * M)
    floor = 1e-9 * max(sub.spectral_norm, np.finfo(float).tiny)
    mu = np.full(n, floor) if start is None else np.maximum(np.asarray(start, dtype=float), floor)

    for sweep in range(max_sweeps + 1):
        A = inv_hpd(sub.gram + np.diag(mu))
        X = A @ rhs
        power = np.sum(np.abs(X) ** 2, axis=1)
        W = X.reshape(N, K, M).transpose(1, 0, 2)
        if kkt_satisfied(mu, power, rho_row, kkt_rtol):
            return mu, _clip_rows(W, rho_row), sweep
        if sweep == max_sweeps:
            break

        for j in range(n):
            a_jj = float(np.real(A[j, j]))
            if a_jj <= 0.0:
                raise SingularMatrixError(f"对偶坐标上升: (G + diag μ)⁻¹ 第 {j} 个对角元非正")
            p_j = float(np.sum(np.abs(X[j]) ** 2))
            t = max((math.sqrt(p_j / rho_row[j]) - 1.0) / a_jj, -mu[j])
            if t == 0.0:
                continue
            ratio = t / (1.0 + t * a_jj)
            col = A[:, j].copy()
            X = X - ratio * np.outer(col, X[j])
            A = A - ratio * np.outer(col, A[j, :])
            mu[j] = 0.0 if t == -mu[j] else mu[j] + t

    raise IterationLimitError(
        f"对偶坐标上升 {max_sweeps} 轮未满足 KKT", best=(mu, _clip_rows(W, rho_row))
    )


def ellipsoid_multipliers(
    sub: SatSubproblem,
    rho_row: np.ndarray,
    center: Optional[np.ndarray] = None,
    radius: float = 1e6,
    tol: float = 1e-4,
    iter_per_dim: int = 500,
    kkt_rtol: float = KKT_RTOL,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    椭球法最大化对偶函数 g(μ) = min_W L(W, μ)

    Returns:
        (μ, W_l, 迭代次数)

    Raises:
        IterationLimitError: 超过 iter_per_dim·N 次, best 为 (μ, W_l)
    """
    rho_row = np.asarray(rho_row, dtype=float)
    n = rho_row.shape[0]

    W0 = sub.precoders(0.0)
    if np.all(sub.antenna_power(W0) <= rho_row):
        return np.zeros(n), W0, 0

    x = np.ones(n) if center is None else np.maximum(np.asarray(center, dtype=float), 0.0)
    P = (radius ** 2) * np.eye(n)
    best: Optional[Tuple[float, np.ndarray, np.ndarray]] = None
    max_iter = iter_per_dim * n

    for it in range(1, max_iter + 1):
        if np.any(x < 0):
            # 可行割 μ_n ≥ 0
            g = np.zeros(n)
            g[int(np.argmin(x))] = -1.0
        else:
            W = sub.precoders_diag(x)
            power = sub.antenna_power(W)
            value = sub.dual_value(x, W, rho_row)
            if best is None or value > best[0]:
                best = (value, x.copy(), W)

            if kkt_satisfied(x, power, rho_row, kkt_rtol):
                return x.copy(), _clip_rows(W, rho_row), it

            # −g(μ) 的次梯度
            g = rho_row - power
            if not np.any(g):
                return x.copy(), W, it

        if n == 1:
            half = math.sqrt(P[0, 0])
            x = x - 0.5 * half * np.sign(g)
            P = P / 4.0
        else:
            Pg = P @ g
            norm = math.sqrt(max(float(g @ Pg), 0.0))
            if norm == 0.0:
                break
            gt = Pg / norm
            x = x - gt / (n + 1)
            P = (n * n / (n * n - 1.0)) * (P - (2.0 / (n + 1)) * np.outer(gt, gt))

        if math.sqrt(float(np.max(np.diag(P)))) <= tol:
            break
    else:
        result = None if best is None else (best[1], _clip_rows(best[2], rho_row))
        raise IterationLimitError(f"椭球法 {max_iter} 次迭代未收敛", best=result)

    if best is None:
        W = sub.precoders_diag(np.maximum(x, 0.0))
        return np.maximum(x, 0.0), _clip_rows(W, rho_row), it
    return best[1], _clip_rows(best[2], rho_row), it


def solve_multipliers_ellipsoid(
    U: np.ndarray,
    C: np.ndarray,
    effective_set: EffectiveChannelSet,
    rho_row: np.ndarray,
    l: int,
    center: Optional[np.ndarray] = None,
    radius: float = 1e6,
    tol: float = 1e-4,
    iter_per_dim: int = 500,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    每天线功率约束下的乘子向量与预编码

    Args:
        rho_row: 卫星 l 各天线预算 (N,)
        center: 初始椭球中心 (默认 1·𝟙)
        radius: 初始球半径

    Returns:
        (μ_l (N,), W_l (K, N, M))
    """
    sub = SatSubproblem(U, C, effective_set, l)
    mu, W, iterations = ellipsoid_multipliers(sub, rho_row, center, radius, tol, iter_per_dim)
    logger.debug(f"SAT {l}: 椭球法 {iterations} 次迭代, μ={np.array2string(mu, precision=4)}")
    return mu, W
