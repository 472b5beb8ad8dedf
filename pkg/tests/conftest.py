"""
公共测试夹具
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# 添加 src 目录到 path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from dsat_precoding.channel.model import build_effective_channels
from dsat_precoding.core.config import ScenarioConfig
from dsat_precoding.core.models import EffectiveChannelSet
from dsat_precoding.scenario.geometry import build_geometry
from dsat_precoding.utils.rng import drop_rng


def make_scenario(config: ScenarioConfig, drop: int = 0):
    """(几何, 有效信道)"""
    geometry = build_geometry(config, drop_rng(config.seed, drop))
    return geometry, build_effective_channels(geometry, config)


def custom_channels(H_tilde) -> EffectiveChannelSet:
    """直接指定 H̃ 的有效信道 (β = 1)"""
    H = np.asarray(H_tilde, dtype=complex)
    L, K, M, N = H.shape
    return EffectiveChannelSet(
        H_tilde=H,
        b=np.ones((L, K, M), dtype=complex),
        a=np.ones((L, K, N), dtype=complex),
        beta=np.ones((L, K)),
    )


# ============================================
# 测试夹具 (Fixtures)
# ============================================

@pytest.fixture
def small_config():
    """小规模场景: 2 星 × 4 天线, 2 用户 × 2 天线"""
    return ScenarioConfig(L=2, N=4, K=2, M=2, seed=7)


@pytest.fixture
def small_scenario(small_config):
    return make_scenario(small_config)


@pytest.fixture
def scalar_config():
    """L = K = M = N = 1"""
    return ScenarioConfig(L=1, N=1, K=1, M=1, seed=3)


@pytest.fixture
def symmetric_channels():
    """
    K=2, M=1, N=2: h1 = [1, 1], h2 = [1, −1]
    U = C = 1 时 Gram = 2I, 对称乘子 μ* 满足 2/(2+μ)² = ρ_n
    """
    return custom_channels([[[[1.0, 1.0]], [[1.0, -1.0]]]])


@pytest.fixture
def unit_weights():
    """K=2, L·M=1 的 U = C = 1"""
    return np.ones((2, 1, 1), dtype=complex), np.ones((2, 1, 1), dtype=complex)
