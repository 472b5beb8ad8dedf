"""
异常定义

CLI 根据异常类别决定退出码: ConfigError → 1, 其余 PrecodingError → 2
"""

from typing import Any, Optional


class PrecodingError(Exception):
    """本项目所有异常的基类"""


class VisibilityError(PrecodingError, ValueError):
    """链路不在阵列前半球 (非可视 LoS 链路) 或方向向量退化"""


class SingularMatrixError(PrecodingError, ArithmeticError):
    """Hermitian 正定分解失败 (奇异或数值非正定)"""


class IterationLimitError(PrecodingError, RuntimeError):
    """迭代次数超限, best 携带目前最好的可行迭代点"""

    def __init__(self, message: str, best: Optional[Any] = None):
        super().__init__(message)
        self.best = best


class NonMonotoneError(PrecodingError, AssertionError):
    """BCD 目标函数上升超过容差"""


class ConfigError(PrecodingError, ValueError):
    """配置相关错误"""


class ConfigParseError(ConfigError):
    """配置文件解析失败 (带文件/行号)"""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line


class ConfigValidationError(ConfigError):
    """配置字段违反约束 (带字段名)"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ResultsIOError(PrecodingError, OSError):
    """结果文件写出失败 (带路径)"""
