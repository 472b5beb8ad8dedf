"""
Hermitian 矩阵工具测试

测试覆盖:
1. Cholesky 求解与批量广播
2. 半正定奇异矩阵: 特征分解最小范数解, 未启用时抛错
3. 对数行列式
"""

import math

import numpy as np
import pytest

from dsat_precoding.core.errors import SingularMatrixError
from dsat_precoding.utils.linalg import inv_hpd, log2det_hpd, solve_hpd


SINGULAR = np.array([[1.0, 1.0], [1.0, 1.0]], dtype=complex)


class TestSolveHpd:
    """A X = B"""

    def test_positive_definite(self):
        a = np.array([[4.0, 1.0 - 1j], [1.0 + 1j, 3.0]])
        b = np.array([[1.0], [2.0j]])
        x = solve_hpd(a, b)
        np.testing.assert_allclose(a @ x, b, atol=1e-12)

    def test_batched_broadcast(self):
        a = np.stack([np.eye(2) * 2.0, np.eye(2) * 4.0])
        b = np.ones((2, 1))
        x = solve_hpd(a, b)
        assert x.shape == (2, 2, 1)
        np.testing.assert_allclose(x[:, :, 0], [[0.5, 0.5], [0.25, 0.25]])

    def test_singular_raises_without_fallback(self):
        with pytest.raises(SingularMatrixError):
            solve_hpd(SINGULAR, np.ones((2, 1)))

    def test_singular_fallback_minimum_norm(self):
        """右端项在列空间内: 结果等于伪逆解"""
        b = np.array([[2.0], [2.0]], dtype=complex)
        x = solve_hpd(SINGULAR, b, fallback=True)
        np.testing.assert_allclose(x, np.linalg.pinv(SINGULAR) @ b, atol=1e-12)
        np.testing.assert_allclose(SINGULAR @ x, b, atol=1e-12)

    def test_batched_fallback(self):
        a = np.stack([np.eye(2, dtype=complex), SINGULAR])
        b = np.array([[1.0], [1.0]], dtype=complex)
        x = solve_hpd(a, b, fallback=True)
        np.testing.assert_allclose(x[0], b, atol=1e-12)
        np.testing.assert_allclose(x[1], [[0.5], [0.5]], atol=1e-12)

    def test_inverse(self):
        a = np.array([[2.0, 0.5], [0.5, 1.0]])
        np.testing.assert_allclose(inv_hpd(a) @ a, np.eye(2), atol=1e-12)


class TestLogDet:

    def test_diagonal(self):
        assert float(log2det_hpd(np.diag([2.0, 8.0]))) == pytest.approx(4.0)

    def test_singular_raises(self):
        with pytest.raises(SingularMatrixError):
            log2det_hpd(SINGULAR)

    def test_batched(self):
        a = np.stack([np.eye(3) * math.e, np.eye(3)])
        np.testing.assert_allclose(log2det_hpd(a), [3.0 / math.log(2.0), 0.0])
