"""
随机数流

所有随机量都由 (seed, 用途, 索引...) 唯一确定，
Monte-Carlo 试验之间互不依赖，可以任意顺序或并行生成。
"""

import numpy as np


# 用途编号 (spawn_key 的第一位)
STREAM_DROP = 0      # UE 随机投放
STREAM_FADING = 1    # 信道增益 γ 的 Monte-Carlo 样本


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """由 seed 和整数键派生独立的 Generator"""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def drop_rng(seed: int, drop: int) -> np.random.Generator:
    """第 drop 次 UE 投放使用的随机流 (与扫描点无关)"""
    return make_rng(seed, STREAM_DROP, drop)


def fading_rng(seed: int, drop: int) -> np.random.Generator:
    """第 drop 次投放上 Monte-Carlo 衰落样本的父随机流"""
    return make_rng(seed, STREAM_FADING, drop)
