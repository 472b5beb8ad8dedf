"""
配置测试

测试覆盖:
1. ScenarioConfig 默认值、单位换算、校验
2. ExperimentSpec 缺省网格与扫描点
3. YAML 加载: 分段 / 顶层键, 解析错误行号, 未知键, 重复键
"""

import math

import numpy as np
import pytest

from dsat_precoding.core.config import (
    DEFAULT_SWEEPS,
    ExperimentSpec,
    ScenarioConfig,
    boundary_field,
    dbm_to_watt,
)
from dsat_precoding.core.errors import ConfigError, ConfigParseError, ConfigValidationError
from dsat_precoding.core.types import BudgetKind, ExperimentName, PrecoderKind
from dsat_precoding.harness.loader import load_config, load_config_dict


def _write(tmp_path, text: str, name: str = "config.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


# ============================================
# 测试: ScenarioConfig
# ============================================

class TestScenarioConfig:
    """场景配置"""

    def test_defaults(self):
        config = ScenarioConfig()
        assert (config.L, config.N, config.K, config.M) == (8, 8, 8, 2)
        assert config.rho == 50.0
        assert config.sigma2 == pytest.approx(10 ** -15.4)
        assert config.theta_u == pytest.approx(math.radians(1.0))
        assert config.theta_s == pytest.approx(math.radians(5.0))
        assert config.h == 500e3
        assert config.R_E == 6371e3
        assert config.f_c == 8e9
        assert config.G_s == pytest.approx(10 ** 0.6)
        assert config.kappa == pytest.approx(10 ** 1.2)
        assert (config.epsilon, config.I_max, config.eps_mu, config.alpha) == (1e-4, 1000, 1e-3, 2.0)
        assert config.extrapolation is True
        assert config.antenna_sweeps == 500

    def test_budgets(self):
        config = ScenarioConfig(L=2, N=4, rho=np.array([10.0, 20.0]))
        np.testing.assert_allclose(config.sat_budgets(), [10.0, 20.0])
        np.testing.assert_allclose(config.antenna_budgets(), [[2.5] * 4, [5.0] * 4])
        per_antenna = config.budget(BudgetKind.PER_ANTENNA)
        np.testing.assert_allclose(per_antenna.sat_totals, config.sat_budgets())
        assert config.budget("per-sat").kind == BudgetKind.PER_SAT

    def test_explicit_antenna_budget(self):
        rho = np.arange(1.0, 9.0).reshape(2, 4)
        config = ScenarioConfig(L=2, N=4, rho=rho).validate()
        np.testing.assert_allclose(config.antenna_budgets(), rho)
        np.testing.assert_allclose(config.sat_budgets(), rho.sum(axis=1))

    @pytest.mark.parametrize(
        "changes, field",
        [
            ({"rho": -1.0}, "rho"),
            ({"L": 0}, "L"),
            ({"sigma2": 0.0}, "sigma2"),
            ({"alpha": 1.0}, "alpha"),
            ({"theta_s": math.radians(95.0)}, "theta_s"),
            ({"kappa": -1.0}, "kappa"),
            ({"rho": np.ones(3)}, "rho"),
            ({"antenna_sweeps": -1}, "antenna_sweeps"),
        ],
    )
    def test_validation_errors(self, changes, field):
        with pytest.raises(ConfigValidationError) as info:
            ScenarioConfig(**{"L": 2, **changes}).validate()
        assert info.value.field == field

    def test_with_updates_collapses_uniform_arrays(self):
        config = ScenarioConfig(L=2, N=4, rho=np.full(2, 7.0))
        updated = config.with_updates(L=4)
        np.testing.assert_allclose(updated.sat_budgets(), [7.0] * 4)

    def test_with_updates_rejects_nonuniform(self):
        config = ScenarioConfig(L=2, N=4, rho=np.array([1.0, 2.0]))
        with pytest.raises(ConfigValidationError):
            config.with_updates(L=3)

    def test_boundary_units(self):
        config = ScenarioConfig.from_dict(
            {"kappa_db": 0, "theta_s_deg": 10, "altitude_km": 600, "sigma2_dbm": -124}
        )
        assert config.kappa == pytest.approx(1.0)
        assert config.theta_s == pytest.approx(math.radians(10.0))
        assert config.h == pytest.approx(600e3)
        assert config.sigma2 == pytest.approx(10 ** -15.4)

    def test_infinite_kappa(self):
        assert math.isinf(ScenarioConfig.from_dict({"kappa_db": math.inf}).kappa)

    def test_round_trip(self):
        config = ScenarioConfig(L=4, N=2, rho=np.array([1.0, 2.0, 3.0, 4.0]), seed=9)
        again = ScenarioConfig.from_dict(config.to_dict())
        for name in ("L", "N", "h", "theta_s", "sigma2", "f_c", "G_s", "G_u", "kappa", "seed"):
            assert getattr(again, name) == pytest.approx(getattr(config, name))
        np.testing.assert_allclose(again.rho, config.rho)

    def test_boundary_field(self):
        name, value = boundary_field("theta_u_deg", 2.0)
        assert name == "theta_u"
        assert value == pytest.approx(math.radians(2.0))
        with pytest.raises(ConfigValidationError):
            boundary_field("nope", 1)
        with pytest.raises(ConfigValidationError):
            boundary_field("L", 2.5)

    def test_dbm_to_watt(self):
        assert dbm_to_watt(30.0) == pytest.approx(1.0)


# ============================================
# 测试: ExperimentSpec
# ============================================

class TestExperimentSpec:
    """实验配方"""

    def test_default_sweeps(self):
        for name in ExperimentName:
            spec = ExperimentSpec.from_dict({"name": name.value})
            assert spec.sweep == DEFAULT_SWEEPS[name]

    def test_singular_ratio_fixed_total(self):
        spec = ExperimentSpec.from_dict({"name": "singular-ratio"})
        assert spec.total_antennas == 32

    def test_points_first_key_slowest(self):
        spec = ExperimentSpec(sweep={"L": [2, 4], "rho_w": [10, 50, 100]})
        points = spec.points()
        assert len(points) == 6
        assert points[0] == {"L": 2, "rho_w": 10}
        assert points[1] == {"L": 2, "rho_w": 50}
        assert points[3] == {"L": 4, "rho_w": 10}

    def test_empty_sweep_single_point(self):
        assert ExperimentSpec().points() == [{}]

    @pytest.mark.parametrize("name", ["single-solve", "rate-vs-power"])
    def test_explicit_empty_sweep_rejected(self, name):
        """显式写出的空 sweep 报错, 省略 sweep 才使用缺省网格"""
        with pytest.raises(ConfigValidationError) as info:
            ExperimentSpec.from_dict({"name": name, "sweep": {}})
        assert info.value.field == "experiment.sweep"

    def test_single_solve_round_trip_without_sweep(self):
        spec = ExperimentSpec.from_dict({"name": "single-solve"})
        data = spec.to_dict()
        assert "sweep" not in data
        assert ExperimentSpec.from_dict(data).points() == [{}]

    def test_constraint_values_normalized(self):
        spec = ExperimentSpec.from_dict(
            {"name": "rate-vs-power", "sweep": {"constraint": ["per_sat", "PER-ANTENNA"]}}
        )
        assert spec.sweep["constraint"] == ["per-sat", "per-antenna"]

    @pytest.mark.parametrize(
        "data",
        [
            {"trials": 0},
            {"realizations": 0},
            {"sweep": {"rho_w": []}},
            {"sweep": {"altitude_km": [500]}},
            {"unknown": 1},
            {"name": "no-such-experiment"},
            {"precoders": ["zf"]},
        ],
    )
    def test_invalid(self, data):
        with pytest.raises(ConfigValidationError):
            ExperimentSpec.from_dict(data)

    def test_round_trip(self):
        spec = ExperimentSpec.from_dict(
            {"name": "baseline-compare", "precoders": ["wmmse", "mrt"], "exact": True}
        )
        again = ExperimentSpec.from_dict(spec.to_dict())
        assert again.precoders == [PrecoderKind.WMMSE, PrecoderKind.MRT]
        assert again.exact is True
        assert again.sweep == spec.sweep


# ============================================
# 测试: YAML 加载
# ============================================

class TestLoadConfig:
    """load_config"""

    def test_empty_file_defaults(self, tmp_path):
        scenario, spec = load_config(_write(tmp_path, ""))
        assert (scenario.N, scenario.K, scenario.M) == (8, 8, 2)
        assert scenario.rho == 50.0
        assert scenario.sigma2 == pytest.approx(10 ** -15.4)
        assert spec.name == ExperimentName.SINGLE_SOLVE
        assert spec.seed == scenario.seed

    def test_sections(self, tmp_path):
        text = (
            "scenario:\n  L: 4\n  kappa_db: 0\n"
            "solver:\n  max_iter: 50\n"
            "experiment:\n  name: rate-vs-power\n  seed: 11\n"
        )
        scenario, spec = load_config(_write(tmp_path, text))
        assert scenario.L == 4
        assert scenario.kappa == pytest.approx(1.0)
        assert scenario.I_max == 50
        assert spec.name == ExperimentName.RATE_VS_POWER
        assert spec.seed == 11
        assert scenario.seed == 11

    def test_flat_keys(self, tmp_path):
        scenario, _ = load_config(_write(tmp_path, "L: 3\nrho_w: 20\n"))
        assert scenario.L == 3
        assert scenario.rho == 20.0

    def test_json_accepted(self, tmp_path):
        scenario, _ = load_config(_write(tmp_path, '{"scenario": {"K": 4}}', "config.json"))
        assert scenario.K == 4

    def test_negative_power_rejected(self, tmp_path):
        with pytest.raises(ConfigValidationError) as info:
            load_config(_write(tmp_path, "scenario:\n  rho_w: -1\n"))
        assert info.value.field == "rho"

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            load_config(_write(tmp_path, "scenario:\n  altitude: 500\n"))
        with pytest.raises(ConfigValidationError):
            load_config(_write(tmp_path, "telegram:\n  enabled: true\n"))

    def test_scenario_key_in_solver_section(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            load_config(_write(tmp_path, "solver:\n  L: 4\n"))

    def test_same_key_twice_across_sections(self, tmp_path):
        with pytest.raises(ConfigValidationError):
            load_config(_write(tmp_path, "L: 4\nscenario:\n  L: 2\n"))

    def test_duplicate_key_in_mapping(self, tmp_path):
        with pytest.raises(ConfigParseError) as info:
            load_config(_write(tmp_path, "scenario:\n  L: 4\n  L: 2\n"))
        assert info.value.line == 3

    def test_syntax_error_line(self, tmp_path):
        with pytest.raises(ConfigParseError) as info:
            load_config(_write(tmp_path, "scenario:\n  L: 4\n  N: [1, 2\n"))
        assert info.value.line is not None
        assert str(info.value.line) in str(info.value)

    def test_root_must_be_mapping(self, tmp_path):
        with pytest.raises(ConfigParseError):
            load_config(_write(tmp_path, "- 1\n- 2\n"))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigParseError):
            load_config(tmp_path / "missing.yaml")

    def test_config_errors_share_base(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_dict({"scenario": {"N": 0}})

    @pytest.mark.parametrize(
        "name",
        ["default", "approx_validity", "singular_ratio", "rate_vs_power", "baseline_compare"],
    )
    def test_shipped_configs_valid(self, name):
        from pathlib import Path

        path = Path(__file__).parent.parent / "configs" / f"{name}.yaml"
        scenario, spec = load_config(path)
        assert spec.points()
