"""
日志模块

终端 + 可选文件输出，格式与运行脚本保持一致。
"""

import logging
import os
import sys
from pathlib import Path
from typing import Optional


LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'

# 全局日志文件路径
_LOG_FILE_PATH: Optional[str] = None
_LOG_FILE_HANDLER: Optional[logging.FileHandler] = None


def setup_file_logging(
    log_dir: str = "logs",
    log_file: str = "dsat_precoding.log",
    log_path: Optional[str] = None,
    env_key: str = "LOG_FILE_PATH",
) -> str:
    """
    设置日志文件输出

    Args:
        log_dir: 日志目录
        log_file: 日志文件名
        log_path: 完整路径优先级最高（可覆盖 log_dir/log_file）
        env_key: 允许通过环境变量覆盖日志路径（默认 LOG_FILE_PATH）

    Returns:
        日志文件完整路径
    """
    global _LOG_FILE_PATH, _LOG_FILE_HANDLER

    # 优先级: 显式参数 log_path > 环境变量 > log_dir/log_file
    env_path = os.getenv(env_key, "").strip()
    if log_path:
        _LOG_FILE_PATH = log_path
    elif env_path:
        _LOG_FILE_PATH = env_path
    else:
        path_obj = Path(log_dir)
        path_obj.mkdir(parents=True, exist_ok=True)
        _LOG_FILE_PATH = str(path_obj / (log_file or "dsat_precoding.log"))

    Path(_LOG_FILE_PATH).parent.mkdir(parents=True, exist_ok=True)
    _LOG_FILE_HANDLER = logging.FileHandler(_LOG_FILE_PATH, encoding='utf-8')
    _LOG_FILE_HANDLER.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    _LOG_FILE_HANDLER.setLevel(logging.DEBUG)  # 文件记录所有级别

    # 已创建的 logger 补挂文件处理器
    for logger in logging.Logger.manager.loggerDict.values():
        if (
            isinstance(logger, logging.Logger)
            and logger.name.startswith("dsat_precoding")
            and logger.handlers
            and _LOG_FILE_HANDLER not in logger.handlers
        ):
            logger.addHandler(_LOG_FILE_HANDLER)

    return _LOG_FILE_PATH


def _env_level(default: int) -> int:
    name = os.getenv("DSAT_LOG_LEVEL", "").strip().upper()
    if not name:
        return default
    value = logging.getLevelName(name)
    return value if isinstance(value, int) else default


def get_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    """
    获取一个配置好的 logger

    Args:
        name: logger 名称
        level: 日志级别 (可被环境变量 DSAT_LOG_LEVEL 覆盖)

    Returns:
        配置好的 logger 实例
    """
    logger = logging.getLogger(name)

    if not logger.handlers:
        # 终端输出
        stream_handler = logging.StreamHandler(sys.stdout)
        stream_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(stream_handler)

        # 文件输出（如果已配置）
        if _LOG_FILE_HANDLER:
            logger.addHandler(_LOG_FILE_HANDLER)

        logger.setLevel(_env_level(level))
        logger.propagate = False

    return logger
