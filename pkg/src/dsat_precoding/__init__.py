"""
dsat_precoding - 多低轨卫星协作下行预编码仿真

统计 CSI 下的 WMMSE 预编码 (每星 / 每天线功率约束)、精确与近似速率评估、
基线预编码及桌面规模的实验扫描。
"""

__version__ = "0.1.0"
