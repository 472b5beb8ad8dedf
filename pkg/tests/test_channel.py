"""
信道模型测试

测试覆盖:
1. ULA 响应与有效信道
2. Rician 增益统计量 (10⁵ 次采样, 5σ 界)
3. 信道实现
4. 拼接信道奇异值比
"""

import math

import numpy as np
import pytest

from dsat_precoding.channel.model import (
    build_effective_channels,
    effective_channel,
    realize_channels,
    sample_gain,
    sample_gains,
    stacked_singular_ratio,
    ula_response,
)
from dsat_precoding.core.config import ScenarioConfig
from dsat_precoding.scenario.geometry import build_geometry
from dsat_precoding.utils.rng import make_rng

from tests.conftest import make_scenario


DRAWS = 100_000


# ============================================
# 测试: 阵列响应
# ============================================

class TestUlaResponse:
    """a(φ)_m = exp(j·2πΔ·m·sin φ)"""

    def test_thirty_degrees(self):
        a = ula_response(math.radians(30.0), 4)
        np.testing.assert_allclose(a, [1, 1j, -1, -1j], atol=1e-12)

    def test_unit_modulus_and_reference(self):
        a = ula_response(np.linspace(-1.0, 1.0, 7), 5, spacing=0.37)
        assert a.shape == (7, 5)
        np.testing.assert_allclose(np.abs(a), 1.0)
        np.testing.assert_allclose(a[:, 0], 1.0)

    def test_boresight_all_ones(self):
        np.testing.assert_allclose(ula_response(0.0, 3), np.ones(3))


class TestEffectiveChannel:
    """H̃ = √β b aᵀ"""

    def test_rank_one_and_norm(self):
        b = ula_response(0.3, 2)
        a = ula_response(-0.7, 4)
        H = effective_channel(2.5, b, a)
        assert H.shape == (2, 4)
        s = np.linalg.svd(H, compute_uv=False)
        assert s[1] < 1e-12 * s[0]
        assert np.linalg.norm(H) ** 2 == pytest.approx(2.5 * 2 * 4)

    def test_transpose_not_conjugate(self):
        b = np.array([1.0, 1j])
        a = np.array([1.0, 1j])
        H = effective_channel(1.0, b, a)
        np.testing.assert_allclose(H, np.outer(b, a))

    def test_build_from_geometry(self, small_config, small_scenario):
        geometry, eff = small_scenario
        L, K, M, N = eff.shape
        assert (L, K, M, N) == (2, 2, 2, 4)
        np.testing.assert_allclose(
            np.linalg.norm(eff.H_tilde, axis=(2, 3)) ** 2, geometry.beta * M * N
        )


# ============================================
# 测试: Rician 增益
# ============================================

class TestRicianGain:
    """γ = √β(√(κ/(κ+1)) e^{jψ} + √(1/(κ+1)) z)"""

    def test_zero_mean(self):
        beta, kappa = 2.0, 10 ** 1.2
        gamma = sample_gains(np.asarray(beta), np.asarray(kappa), make_rng(11), size=DRAWS)
        assert abs(gamma.mean()) < 5 * math.sqrt(beta / DRAWS)

    def test_second_moment_matches_beta(self):
        beta = 3.0
        for kappa in (0.0, 1.0, 10 ** 1.2):
            gamma = sample_gains(np.asarray(beta), np.asarray(kappa), make_rng(12), size=DRAWS)
            power = np.abs(gamma) ** 2
            bound = 5 * power.std(ddof=1) / math.sqrt(DRAWS)
            assert abs(power.mean() - beta) < bound

    def test_independent_links_uncorrelated(self):
        beta = np.array([1.0, 4.0])
        gamma = sample_gains(beta, np.asarray(10 ** 1.2), make_rng(13), size=DRAWS)
        cross = np.mean(gamma[:, 0] * np.conj(gamma[:, 1]))
        assert abs(cross) < 5 * math.sqrt(beta[0] * beta[1] / DRAWS)

    def test_los_only_constant_modulus(self):
        """κ = ∞ 或 κ ≥ 1e12: |γ| = √β"""
        for kappa in (np.inf, 1e12):
            gamma = sample_gains(np.asarray(2.0), np.asarray(kappa), make_rng(14), size=1000)
            np.testing.assert_allclose(np.abs(gamma), math.sqrt(2.0), rtol=1e-12)

    def test_shapes_and_broadcast(self):
        gamma = sample_gains(np.ones((2, 3)), np.asarray(1.0), make_rng(15), size=(4, 5))
        assert gamma.shape == (4, 5, 2, 3)
        assert gamma.dtype == complex

    def test_reproducible(self):
        a = sample_gains(np.ones(3), np.ones(3), make_rng(16, 1))
        b = sample_gains(np.ones(3), np.ones(3), make_rng(16, 1))
        np.testing.assert_array_equal(a, b)

    def test_single_sample(self):
        assert isinstance(sample_gain(1.0, 1.0, make_rng(17)), complex)


# ============================================
# 测试: 信道实现
# ============================================

class TestRealizeChannels:
    """H_{l,k} = γ_{l,k} b aᵀ"""

    def test_gamma_sqrt_beta_gives_effective(self, small_scenario):
        geometry, eff = small_scenario
        realization = realize_channels(eff, geometry, 1.0, make_rng(0), gamma=np.sqrt(geometry.beta))
        np.testing.assert_allclose(realization.H, eff.H_tilde, rtol=1e-12)

    def test_sampled_shapes(self, small_config, small_scenario):
        geometry, eff = small_scenario
        realization = realize_channels(eff, geometry, small_config.kappa_matrix(), make_rng(1))
        assert realization.gamma.shape == (2, 2)
        assert realization.H.shape == eff.H_tilde.shape


# ============================================
# 测试: 奇异值比
# ============================================

class TestSingularRatio:
    """拼接信道 σ₂/σ₁"""

    def test_identical_blocks_rank_one(self):
        block = effective_channel(1.0, ula_response(0.2, 2), ula_response(0.4, 4))
        assert stacked_singular_ratio(np.stack([block, block, block])) < 1e-10

    def test_known_ratio(self):
        blocks = np.array([[[1.0], [0.0]], [[0.0], [0.5]]])   # (L=2, M=2, N=1)
        assert stacked_singular_ratio(blocks) == pytest.approx(0.5)

    def test_single_antenna_user(self):
        assert stacked_singular_ratio(np.ones((3, 1, 4))) == 0.0

    def test_colocated_satellites(self):
        """ϑ_s = 0: 所有卫星重合, 拼接信道秩一"""
        config = ScenarioConfig(L=8, N=4, K=2, M=2, theta_s=0.0)
        _, eff = make_scenario(config)
        assert stacked_singular_ratio(eff.H_tilde[:, 0]) < 1e-10

    def test_spread_increases_ratio(self):
        """ϑ_s = 5° 的比值大于 ϑ_s = 0.1°"""
        ratios = []
        for theta in (0.1, 5.0):
            config = ScenarioConfig(L=8, N=4, K=2, M=2, theta_s=math.radians(theta))
            geometry = build_geometry(config, ue_angles=np.zeros(2))
            eff = build_effective_channels(geometry, config)
            ratios.append(stacked_singular_ratio(eff.H_tilde[:, 0]))
        assert 0.0 <= ratios[0] < ratios[1] <= 1.0
