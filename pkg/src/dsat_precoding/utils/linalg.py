"""
Hermitian 矩阵工具

求逆、求解、对数行列式都走 Cholesky 分解，失败时抛出 SingularMatrixError;
solve_hpd 可选退回特征分解 (半正定矩阵的最小范数解)。
"""

import numpy as np
from scipy import linalg as sla

from dsat_precoding.core.errors import SingularMatrixError


LN2 = float(np.log(2.0))


def hermitian(a: np.ndarray) -> np.ndarray:
    """Hermitian 对称化 (支持批量, 作用于最后两维)"""
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def dagger(a: np.ndarray) -> np.ndarray:
    """共轭转置 (最后两维)"""
    return np.conj(np.swapaxes(a, -1, -2))


def _solve_eigh(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """半正定 A 的最小范数解: 丢弃 ≤ n·eps·λ_max 的特征值"""
    lam, V = sla.eigh(hermitian(a), check_finite=False)
    cutoff = max(float(lam.max()), 0.0) * a.shape[-1] * np.finfo(float).eps
    inv = np.divide(1.0, lam, out=np.zeros_like(lam), where=lam > cutoff)
    return V @ (inv[:, None] * (dagger(V) @ b))


def solve_hpd(a: np.ndarray, b: np.ndarray, fallback: bool = False) -> np.ndarray:
    """
    求解 A X = B, A 为 Hermitian 正定

    A 可以是 (..., n, n) 批量, B 对应 (..., n, m)。

    Args:
        fallback: Cholesky 失败时改用特征分解求最小范数解 (A 半正定)

    Raises:
        SingularMatrixError: A 非正定且未启用 fallback
    """
    if a.ndim == 2:
        try:
            factor = sla.cho_factor(hermitian(a), lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            if fallback:
                return _solve_eigh(a, b)
            raise SingularMatrixError(f"矩阵非正定, 无法求解 ({a.shape[0]}x{a.shape[1]})") from exc
        return sla.cho_solve(factor, b, check_finite=False)

    out = np.empty(np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (a.shape[-1], b.shape[-1]),
                   dtype=np.result_type(a, b))
    for idx in np.ndindex(out.shape[:-2]):
        out[idx] = solve_hpd(a[idx] if a.ndim > 2 else a, b[idx] if b.ndim > 2 else b, fallback)
    return out


def inv_hpd(a: np.ndarray) -> np.ndarray:
    """Hermitian 正定矩阵求逆, 结果再对称化"""
    eye = np.broadcast_to(np.eye(a.shape[-1], dtype=a.dtype), a.shape)
    return hermitian(solve_hpd(a, eye))


def logdet_hpd(a: np.ndarray) -> np.ndarray:
    """
    ln|A| (自然对数), A 为 Hermitian 正定, 支持批量

    Returns:
        实数 (或实数数组)
    """
    try:
        chol = np.linalg.cholesky(hermitian(a))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("对数行列式: 矩阵非正定") from exc
    diag = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    return 2.0 * np.sum(np.log(diag), axis=-1)


def log2det_hpd(a: np.ndarray) -> np.ndarray:
    """log2|A|"""
    return logdet_hpd(a) / LN2

