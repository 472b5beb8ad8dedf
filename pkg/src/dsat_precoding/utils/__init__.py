"""
工具模块
"""

from dsat_precoding.utils.logger import get_logger, setup_file_logging
from dsat_precoding.utils.rng import make_rng, drop_rng, fading_rng

__all__ = ["get_logger", "setup_file_logging", "make_rng", "drop_rng", "fading_rng"]
