"""
信道模块
"""

from dsat_precoding.channel.model import (
    ula_response,
    effective_channel,
    build_effective_channels,
    sample_gain,
    sample_gains,
    realize_channels,
    stacked_singular_ratio,
)

__all__ = [
    "ula_response", "effective_channel", "build_effective_channels", "sample_gain",
    "sample_gains", "realize_channels", "stacked_singular_ratio",
]
