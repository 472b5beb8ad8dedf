"""
速率评估模块
"""

from dsat_precoding.analysis.rate import (
    link_products,
    covariance_blocks,
    stream_blocks,
    approx_rate,
    exact_rate_mc,
    mse_matrices,
    wmmse_objective,
)

__all__ = [
    "link_products", "covariance_blocks", "stream_blocks", "approx_rate", "exact_rate_mc",
    "mse_matrices", "wmmse_objective",
]
