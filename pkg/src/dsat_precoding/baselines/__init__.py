"""
基线预编码
"""

from dsat_precoding.baselines.precoding import (
    mrt_precoding,
    rzf_precoding,
    mmse_precoding,
    assign_closest,
    noncoop_assignment,
    noncoop_mrt_precoding,
    build_precoders,
)

__all__ = [
    "mrt_precoding", "rzf_precoding", "mmse_precoding", "assign_closest", "noncoop_assignment",
    "noncoop_mrt_precoding", "build_precoders",
]
