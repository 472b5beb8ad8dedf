"""
YAML 配置加载

文件结构:

    scenario:    # 物理场景 (边界单位, 见 ScenarioConfig.from_dict)
    solver:      # 算法参数
    experiment:  # 实验配方 (见 ExperimentSpec.from_dict)

scenario 键也可以直接写在顶层。同一个键出现两次视为错误。
"""

from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from dsat_precoding.core.config import SCENARIO_KEYS, SOLVER_KEYS, ExperimentSpec, ScenarioConfig
from dsat_precoding.core.errors import ConfigParseError, ConfigValidationError
from dsat_precoding.utils.logger import get_logger


logger = get_logger(__name__)

SECTIONS = ("scenario", "solver", "experiment")


class _UniqueKeyLoader(yaml.SafeLoader):
    """拒绝重复键的 SafeLoader"""

    def construct_mapping(self, node, deep=False):
        seen = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            if key in seen:
                raise yaml.constructor.ConstructorError(
                    None, None, f"重复的键: {key!r}", key_node.start_mark
                )
            seen.add(key)
        return super().construct_mapping(node, deep=deep)


def _parse_yaml(text: str, source: str) -> Dict[str, Any]:
    try:
        data = yaml.load(text, Loader=_UniqueKeyLoader)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        where = f"{source}:{line}" if line else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigParseError(f"YAML 解析失败 ({where}): {problem}", line=line) from exc

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigParseError(f"配置根节点必须是映射, 实际为 {type(data).__name__} ({source})")
    return data


def _section(data: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = data.get(name)
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigValidationError(name, "必须是映射")
    return value


def load_config_dict(
    data: Optional[Dict[str, Any]],
) -> Tuple[ScenarioConfig, ExperimentSpec]:
    """
    从已解析的字典构造配置

    Args:
        data: 顶层配置字典 (None 等价于空)

    Returns:
        (ScenarioConfig, ExperimentSpec)

    Raises:
        ConfigValidationError: 未知键、重复键或取值违反不变量
    """
    data = dict(data or {})
    for key in data:
        if key not in SECTIONS and key not in SCENARIO_KEYS:
            raise ConfigValidationError(key, "未知配置项")

    scenario_raw = _section(data, "scenario")
    solver_raw = _section(data, "solver")
    experiment_raw = _section(data, "experiment")

    merged: Dict[str, Any] = {}
    flat = {k: v for k, v in data.items() if k not in SECTIONS}
    for section, values in (("(顶层)", flat), ("scenario", scenario_raw), ("solver", solver_raw)):
        for key, value in values.items():
            if section == "solver" and key not in SOLVER_KEYS:
                raise ConfigValidationError(f"solver.{key}", "未知算法参数")
            if key not in SCENARIO_KEYS:
                raise ConfigValidationError(f"{section}.{key}", "未知配置项")
            if key in merged:
                raise ConfigValidationError(key, f"重复定义 (再次出现在 {section})")
            merged[key] = value

    if "seed" in experiment_raw:
        merged["seed"] = experiment_raw["seed"]

    scenario = ScenarioConfig.from_dict(merged)
    spec = ExperimentSpec.from_dict(experiment_raw, seed=scenario.seed)
    return scenario, spec


def load_config(path: Union[str, Path]) -> Tuple[ScenarioConfig, ExperimentSpec]:
    """
    读取 YAML 配置文件

    Args:
        path: 配置文件路径 (空文件 → 全部默认值)

    Returns:
        (ScenarioConfig, ExperimentSpec)

    Raises:
        ConfigParseError: 文件不存在、YAML 语法错误或根节点不是映射
        ConfigValidationError: 键或取值非法
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"无法读取配置文件 {path}: {exc}") from exc

    scenario, spec = load_config_dict(_parse_yaml(text, str(path)))
    logger.debug(f"已加载配置: {path} (实验 {spec.name.value}, {len(spec.points())} 个扫描点)")
    return scenario, spec
