"""
基线预编码测试

测试覆盖:
1. MRT / RZF / MMSE 方向与功率归一化, MRT 对 β 整体缩放不变
2. 最近卫星贪心分配
3. 非协作 MRT
4. build_precoders 分派
"""

from dataclasses import replace

import numpy as np
import pytest

from dsat_precoding.analysis.rate import approx_rate
from dsat_precoding.baselines.precoding import (
    assign_closest,
    build_precoders,
    mmse_precoding,
    mrt_precoding,
    noncoop_assignment,
    noncoop_mrt_precoding,
    rzf_precoding,
)
from dsat_precoding.core.config import ScenarioConfig
from dsat_precoding.core.types import BudgetKind, PrecoderKind
from dsat_precoding.solver.wmmse import init_precoders

from tests.conftest import make_scenario


# ============================================
# 测试: 协作基线
# ============================================

class TestCooperativeBaselines:
    """MRT / RZF / MMSE"""

    def test_mrt_direction(self, small_config, small_scenario):
        """W_{l,k} ∝ H̃_{l,k}ᴴ"""
        geometry, eff = small_scenario
        precoders = mrt_precoding(eff, small_config.budget(), geometry)
        for l in range(small_config.L):
            for k in range(small_config.K):
                direction = eff.H_tilde[l, k].conj().T
                ratio = precoders.W[l, k] / direction
                np.testing.assert_allclose(ratio, ratio.flat[0], rtol=1e-10)
                assert np.real(ratio.flat[0]) > 0

    @pytest.mark.parametrize("kind", [BudgetKind.PER_SAT, BudgetKind.PER_ANTENNA])
    @pytest.mark.parametrize("c", [1e-3, 7.5])
    def test_mrt_invariant_to_beta_scale(self, small_config, small_scenario, kind, c):
        """β → cβ, H̃ → √c·H̃: 功率分配与方向归一化后 W 不变"""
        _, eff = small_scenario
        budget = small_config.budget(kind)
        scaled = replace(eff, H_tilde=np.sqrt(c) * eff.H_tilde, beta=c * eff.beta)
        before = mrt_precoding(eff, budget).W
        after = mrt_precoding(scaled, budget).W
        np.testing.assert_allclose(after, before, rtol=1e-10, atol=1e-14 * np.abs(before).max())

    @pytest.mark.parametrize("kind", [BudgetKind.PER_SAT, BudgetKind.PER_ANTENNA])
    def test_budgets_met(self, small_config, small_scenario, kind):
        geometry, eff = small_scenario
        budget = small_config.budget(kind)
        for precoders in (
            mrt_precoding(eff, budget, geometry),
            rzf_precoding(eff, budget, small_config.sigma2, geometry),
            mmse_precoding(eff, budget, small_config.sigma2, geometry),
        ):
            assert precoders.is_feasible()
            if kind == BudgetKind.PER_SAT:
                np.testing.assert_allclose(precoders.sat_power(), budget.values)
            else:
                np.testing.assert_allclose(precoders.antenna_power(), budget.values)

    def test_mmse_equals_solver_init(self, small_config, small_scenario):
        geometry, eff = small_scenario
        budget = small_config.budget()
        np.testing.assert_allclose(
            mmse_precoding(eff, budget, small_config.sigma2, geometry).W,
            init_precoders(eff, geometry, budget, small_config.sigma2).W,
        )

    def test_rzf_explicit_regularization(self, small_config, small_scenario):
        """显式正则化参数生效"""
        geometry, eff = small_scenario
        budget = small_config.budget()
        default = rzf_precoding(eff, budget, small_config.sigma2, geometry)
        heavy = rzf_precoding(eff, budget, small_config.sigma2, geometry, regularization=1e3)
        mrt = mrt_precoding(eff, budget, geometry)
        assert not np.allclose(default.W, heavy.W)
        # 大正则化下 RZF 趋近 MRT
        np.testing.assert_allclose(heavy.W, mrt.W, rtol=1e-6, atol=1e-9 * np.abs(mrt.W).max())


# ============================================
# 测试: 非协作 MRT
# ============================================

class TestNoncooperative:
    """最近卫星分配 + 单星 MRT"""

    def test_greedy_assignment(self):
        dist = np.array([[1.0, 5.0], [2.0, 1.0], [3.0, 3.0]])
        assert assign_closest(dist).serving_sat == (0, 1)

    def test_greedy_order_matters(self):
        """UE 1 最近的卫星已被 UE 0 占用"""
        dist = np.array([[1.0, 1.0], [5.0, 2.0]])
        assert assign_closest(dist).serving_sat == (0, 1)

    def test_ties_lowest_index(self):
        assert assign_closest(np.ones((3, 2))).serving_sat == (0, 1)

    def test_requires_enough_satellites(self):
        with pytest.raises(ValueError):
            assign_closest(np.ones((2, 3)))

    def test_users_of(self):
        assignment = assign_closest(np.array([[1.0, 5.0], [2.0, 1.0], [3.0, 3.0]]))
        assert assignment.users_of(1) == [1]
        assert assignment.users_of(2) == []

    @pytest.mark.parametrize("kind", [BudgetKind.PER_SAT, BudgetKind.PER_ANTENNA])
    def test_only_serving_satellite_transmits(self, kind):
        config = ScenarioConfig(L=3, N=4, K=2, M=2, seed=5)
        geometry, eff = make_scenario(config)
        assignment = noncoop_assignment(geometry)
        budget = config.budget(kind)
        precoders = noncoop_mrt_precoding(eff, assignment, budget)

        for k, l in enumerate(assignment.serving_sat):
            for other in range(config.L):
                if other != l:
                    assert np.all(precoders.W[other, k] == 0)
        assert precoders.is_feasible()

        served = list(assignment.serving_sat)
        if kind == BudgetKind.PER_SAT:
            np.testing.assert_allclose(precoders.sat_power()[served], budget.values[served])
        else:
            np.testing.assert_allclose(precoders.antenna_power()[served], budget.values[served])
        idle = [l for l in range(config.L) if l not in served]
        assert np.all(precoders.sat_power()[idle] == 0)

    def test_assignment_follows_distance(self):
        config = ScenarioConfig(L=4, N=2, K=2, M=1, seed=6)
        geometry, _ = make_scenario(config)
        assignment = noncoop_assignment(geometry)
        first = assignment.serving_sat[0]
        assert first == int(np.argmin(geometry.dist[:, 0]))


# ============================================
# 测试: 分派
# ============================================

class TestBuildPrecoders:
    """build_precoders"""

    @pytest.mark.parametrize(
        "kind", [PrecoderKind.MRT, PrecoderKind.RZF, PrecoderKind.MMSE, PrecoderKind.NONCOOP_MRT]
    )
    def test_dispatch(self, kind):
        config = ScenarioConfig(L=3, N=4, K=2, M=2, seed=8)
        geometry, eff = make_scenario(config)
        precoders = build_precoders(kind, eff, geometry, config, config.budget())
        assert precoders.W.shape == (3, 2, 4, 2)
        assert approx_rate(eff, precoders, config.sigma2).sum > 0

    def test_wmmse_not_a_baseline(self, small_config, small_scenario):
        geometry, eff = small_scenario
        with pytest.raises(ValueError):
            build_precoders(PrecoderKind.WMMSE, eff, geometry, small_config, small_config.budget())

    def test_noncoop_needs_enough_satellites(self):
        config = ScenarioConfig(L=2, N=4, K=3, M=2, seed=8)
        geometry, eff = make_scenario(config)
        with pytest.raises(ValueError):
            build_precoders(PrecoderKind.NONCOOP_MRT, eff, geometry, config, config.budget())
