"""
实验运行器

每个扫描点独立解析出 ScenarioConfig, 在 realizations 次 UE 投放上评估指标并取平均。
投放 r 的随机流只由 (seed, r) 决定, 因此任意单个扫描点单独重跑都得到相同结果。
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from dsat_precoding import __version__
from dsat_precoding.analysis.rate import approx_rate, exact_rate_mc
from dsat_precoding.baselines.precoding import build_precoders, mmse_precoding
from dsat_precoding.channel.model import build_effective_channels, stacked_singular_ratio
from dsat_precoding.core.config import ExperimentSpec, ScenarioConfig, boundary_field
from dsat_precoding.core.errors import ConfigValidationError, PrecodingError
from dsat_precoding.core.models import (
    EffectiveChannelSet,
    Geometry,
    PowerBudget,
    PrecoderSet,
    ResultRow,
)
from dsat_precoding.core.types import BudgetKind, ExperimentName, PrecoderKind
from dsat_precoding.harness.results import emit_results, result_columns
from dsat_precoding.scenario.geometry import build_geometry
from dsat_precoding.solver.wmmse import wmmse_solve
from dsat_precoding.utils.logger import get_logger
from dsat_precoding.utils.rng import drop_rng, fading_rng


logger = get_logger(__name__)

# 单个扫描点内可能抛出的计算错误 (记录后继续下一个点)
POINT_ERRORS = (PrecodingError, ValueError, ArithmeticError, np.linalg.LinAlgError)


# ============================================
# 数据结构
# ============================================

@dataclass
class _Drop:
    """一次 UE 投放上的场景快照"""
    index: int
    geometry: Geometry
    effective_set: EffectiveChannelSet
    budget: PowerBudget


@dataclass
class _Metric:
    """一个指标在各次投放上的样本"""
    values: List[float] = field(default_factory=list)
    mc_stderr: List[float] = field(default_factory=list)
    iterations: List[int] = field(default_factory=list)
    wall_ms: float = 0.0

    def add(self, value: float, mc_stderr: float = 0.0, iterations: int = 0) -> None:
        self.values.append(float(value))
        self.mc_stderr.append(float(mc_stderr))
        self.iterations.append(int(iterations))

    def summary(self) -> Tuple[float, float, int]:
        """(均值, 标准误, 平均迭代次数)"""
        values = np.asarray(self.values, dtype=float)
        if values.size > 1:
            stderr = float(values.std(ddof=1) / np.sqrt(values.size))
        else:
            stderr = float(self.mc_stderr[0]) if self.mc_stderr else 0.0
        iters = int(round(float(np.mean(self.iterations)))) if self.iterations else 0
        return float(values.mean()), stderr, iters


@dataclass
class ExperimentResult:
    """一次实验的结果表与元数据"""
    spec: ExperimentSpec
    rows: List[ResultRow]
    metadata: Dict[str, Any]
    failures: List[Dict[str, Any]] = field(default_factory=list)
    files: List[Path] = field(default_factory=list)

    def to_frame(self, timing: bool = False) -> pd.DataFrame:
        columns = result_columns(self.spec.sweep_keys, timing)
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=columns)


# ============================================
# 扫描点解析
# ============================================

def resolve_point(
    scenario: ScenarioConfig,
    spec: ExperimentSpec,
    point: Dict[str, Any],
) -> Tuple[ScenarioConfig, BudgetKind]:
    """
    把扫描点 (边界单位) 应用到基础场景

    Returns:
        (该点的 ScenarioConfig, 功率约束类型)

    Raises:
        ConfigValidationError: 取值非法, 或 total_antennas 不能被 L 整除
    """
    constraint = spec.constraint
    changes: Dict[str, Any] = {}
    for key, value in point.items():
        if key == "constraint":
            constraint = BudgetKind.from_string(value)
            continue
        name, converted = boundary_field(key, value)
        changes[name] = converted

    if spec.total_antennas is not None:
        L = changes.get("L", scenario.L)
        if spec.total_antennas % L:
            raise ConfigValidationError(
                "total_antennas", f"{spec.total_antennas} 不能被 L={L} 整除"
            )
        changes["N"] = spec.total_antennas // L

    return scenario.with_updates(**changes), constraint


def _drops(config: ScenarioConfig, constraint: BudgetKind, spec: ExperimentSpec):
    budget = config.budget(constraint)
    for r in range(spec.realizations):
        geometry = build_geometry(config, drop_rng(spec.seed, r))
        yield _Drop(r, geometry, build_effective_channels(geometry, config), budget)


def _metric_name(kind: PrecoderKind) -> str:
    return f"{kind.value.replace('-', '_')}_sum_rate"


# ============================================
# 各实验的单点评估
# ============================================

def _exact(
    drop: _Drop,
    config: ScenarioConfig,
    precoders: PrecoderSet,
    spec: ExperimentSpec,
    threads: int,
):
    return exact_rate_mc(
        drop.effective_set,
        drop.geometry,
        config.kappa_matrix(),
        precoders,
        config.sigma2,
        spec.trials,
        fading_rng(spec.seed, drop.index),
        threads=threads,
    )


def _eval_approx_validity(config, constraint, spec, threads, failures, point):
    metrics = {"approx_sum_rate": _Metric(), "exact_sum_rate": _Metric()}
    for drop in _drops(config, constraint, spec):
        started = time.perf_counter()
        precoders = mmse_precoding(drop.effective_set, drop.budget, config.sigma2, drop.geometry)
        metrics["approx_sum_rate"].add(approx_rate(drop.effective_set, precoders, config.sigma2).sum)
        metrics["approx_sum_rate"].wall_ms += (time.perf_counter() - started) * 1000

        started = time.perf_counter()
        report = _exact(drop, config, precoders, spec, threads)
        metrics["exact_sum_rate"].add(report.sum, report.sum_stderr)
        metrics["exact_sum_rate"].wall_ms += (time.perf_counter() - started) * 1000
    return metrics


def _eval_singular_ratio(config, constraint, spec, threads, failures, point):
    metric = _Metric()
    for drop in _drops(config, constraint, spec):
        started = time.perf_counter()
        metric.add(stacked_singular_ratio(drop.effective_set.H_tilde[:, 0]))
        metric.wall_ms += (time.perf_counter() - started) * 1000
    return {"singular_ratio": metric}


def _eval_rate_vs_power(config, constraint, spec, threads, failures, point):
    metrics = {"sum_rate": _Metric()}
    if spec.exact:
        metrics["sum_rate_exact"] = _Metric()
    for drop in _drops(config, constraint, spec):
        started = time.perf_counter()
        state = wmmse_solve(drop.effective_set, drop.geometry, config, drop.budget)
        rate = approx_rate(drop.effective_set, state.precoders, config.sigma2)
        metrics["sum_rate"].add(rate.sum, iterations=state.iterations)
        metrics["sum_rate"].wall_ms += (time.perf_counter() - started) * 1000
        if spec.exact:
            started = time.perf_counter()
            report = _exact(drop, config, state.precoders, spec, threads)
            metrics["sum_rate_exact"].add(report.sum, report.sum_stderr, state.iterations)
            metrics["sum_rate_exact"].wall_ms += (time.perf_counter() - started) * 1000
    return metrics


def _eval_baseline_compare(config, constraint, spec, threads, failures, point):
    metrics: Dict[str, _Metric] = {}
    drops = list(_drops(config, constraint, spec))
    for kind in spec.precoders:
        name = _metric_name(kind)
        approx, exact = _Metric(), _Metric()
        try:
            for drop in drops:
                started = time.perf_counter()
                iterations = 0
                if kind == PrecoderKind.WMMSE:
                    state = wmmse_solve(drop.effective_set, drop.geometry, config, drop.budget)
                    precoders, iterations = state.precoders, state.iterations
                else:
                    precoders = build_precoders(
                        kind, drop.effective_set, drop.geometry, config, drop.budget
                    )
                approx.add(
                    approx_rate(drop.effective_set, precoders, config.sigma2).sum,
                    iterations=iterations,
                )
                approx.wall_ms += (time.perf_counter() - started) * 1000
                if spec.exact:
                    started = time.perf_counter()
                    report = _exact(drop, config, precoders, spec, threads)
                    exact.add(report.sum, report.sum_stderr, iterations)
                    exact.wall_ms += (time.perf_counter() - started) * 1000
        except POINT_ERRORS as exc:
            logger.error(f"❌ 预编码 {kind.value} 在 {point} 失败: {exc}")
            failures.append({"point": dict(point), "precoder": kind.value, "error": str(exc)})
            continue
        metrics[name] = approx
        if spec.exact:
            metrics[f"{name}_exact"] = exact
    return metrics


def _eval_single_solve(config, constraint, spec, threads, failures, point):
    metrics: Dict[str, _Metric] = {"sum_rate": _Metric(), "objective": _Metric()}
    per_ue = [_Metric() for _ in range(config.K)]
    iterations = _Metric()
    for drop in _drops(config, constraint, spec):
        started = time.perf_counter()
        state = wmmse_solve(drop.effective_set, drop.geometry, config, drop.budget)
        rate = approx_rate(drop.effective_set, state.precoders, config.sigma2)
        elapsed = (time.perf_counter() - started) * 1000
        metrics["sum_rate"].add(rate.sum, iterations=state.iterations)
        metrics["objective"].add(state.objective, iterations=state.iterations)
        iterations.add(state.iterations, iterations=state.iterations)
        for k, value in enumerate(rate.per_ue):
            per_ue[k].add(value, iterations=state.iterations)
        metrics["sum_rate"].wall_ms += elapsed
    metrics["iterations"] = iterations
    for k, metric in enumerate(per_ue):
        metrics[f"per_ue_rate[{k}]"] = metric
    return metrics


_EVALUATORS: Dict[ExperimentName, Callable] = {
    ExperimentName.APPROX_VALIDITY: _eval_approx_validity,
    ExperimentName.SINGULAR_RATIO: _eval_singular_ratio,
    ExperimentName.RATE_VS_POWER: _eval_rate_vs_power,
    ExperimentName.BASELINE_COMPARE: _eval_baseline_compare,
    ExperimentName.SINGLE_SOLVE: _eval_single_solve,
}


# ============================================
# 主入口
# ============================================

def _run_point(
    scenario: ScenarioConfig,
    spec: ExperimentSpec,
    point: Dict[str, Any],
    mc_threads: int,
) -> Tuple[List[ResultRow], List[Dict[str, Any]]]:
    failures: List[Dict[str, Any]] = []
    try:
        config, constraint = resolve_point(scenario, spec, point)
        metrics = _EVALUATORS[spec.name](config, constraint, spec, mc_threads, failures, point)
    except POINT_ERRORS as exc:
        logger.error(f"❌ 扫描点 {point} 失败: {type(exc).__name__}: {exc}")
        failures.append({"point": dict(point), "error": f"{type(exc).__name__}: {exc}"})
        return [], failures

    rows = []
    for name, metric in metrics.items():
        value, stderr, iters = metric.summary()
        if not np.isfinite(value):
            failures.append({"point": dict(point), "metric": name, "error": f"非有限值 {value}"})
            continue
        rows.append(
            ResultRow(
                params=dict(point),
                metric=name,
                value=value,
                stderr=stderr,
                iters=iters,
                wall_ms=metric.wall_ms,
            )
        )
    logger.info(f"扫描点 {point or '(单点)'}: {len(rows)} 个指标")
    return rows, failures


def run_experiment(
    scenario: ScenarioConfig,
    spec: ExperimentSpec,
    out_dir: Optional[Union[str, Path]] = None,
    fmt: str = "csv",
    timing: bool = False,
    on_point: Optional[Callable[[int, Dict[str, Any]], None]] = None,
) -> ExperimentResult:
    """
    运行一个实验配方

    Args:
        scenario: 基础场景 (扫描点在此基础上修改)
        spec: 实验配方
        out_dir: 给出时写出结果文件
        fmt: csv / json
        timing: 是否输出 wall_ms 列 (该列不具确定性)
        on_point: 每个扫描点完成后的回调 (索引, 扫描点)

    Returns:
        ExperimentResult, 行顺序与扫描顺序一致
    """
    points = spec.points()
    logger.info(
        f"开始实验 {spec.name.value}: {len(points)} 个扫描点 × {spec.realizations} 次投放, "
        f"seed={spec.seed}"
    )
    # 多个扫描点时在点之间并行, 单点时把线程留给 MC
    mc_threads = spec.threads if len(points) == 1 else 1

    def task(item: Tuple[int, Dict[str, Any]]):
        index, point = item
        outcome = _run_point(scenario, spec, point, mc_threads)
        if on_point is not None:
            on_point(index, point)
        return outcome

    started = time.perf_counter()
    if spec.threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            outcomes = list(pool.map(task, enumerate(points)))
    else:
        outcomes = [task(item) for item in enumerate(points)]

    rows: List[ResultRow] = []
    failures: List[Dict[str, Any]] = []
    for point_rows, point_failures in outcomes:
        rows.extend(point_rows)
        failures.extend(point_failures)

    metadata = {
        "experiment": spec.to_dict(),
        "scenario": scenario.to_dict(),
        "seed": spec.seed,
        "version": __version__,
        "points": len(points),
        "failures": failures,
    }
    elapsed = time.perf_counter() - started
    if failures:
        logger.warning(f"⚠️ 实验 {spec.name.value} 完成, {len(failures)} 处失败, 耗时 {elapsed:.1f}s")
    else:
        logger.info(f"✅ 实验 {spec.name.value} 完成: {len(rows)} 行, 耗时 {elapsed:.1f}s")

    result = ExperimentResult(spec=spec, rows=rows, metadata=metadata, failures=failures)
    if out_dir is not None and not rows:
        logger.error(f"❌ 实验 {spec.name.value} 没有任何结果行, 不写出文件")
    elif out_dir is not None:
        result.files = emit_results(
            rows,
            fmt=fmt,
            out_dir=out_dir,
            name=spec.name.value,
            metadata=metadata,
            sweep_keys=spec.sweep_keys,
            timing=timing,
        )
    return result
