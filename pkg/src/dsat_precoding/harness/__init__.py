"""
实验框架

配置加载、扫描运行、结果输出
"""

from dsat_precoding.harness.loader import load_config, load_config_dict
from dsat_precoding.harness.results import emit_results, result_columns
from dsat_precoding.harness.runner import ExperimentResult, resolve_point, run_experiment

__all__ = [
    "load_config", "load_config_dict", "emit_results", "result_columns",
    "ExperimentResult", "resolve_point", "run_experiment",
]
