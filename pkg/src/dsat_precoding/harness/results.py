"""
结果输出

CSV 表头: 每个扫描参数一列, 然后 metric, value, stderr, iters (开启计时时追加 wall_ms)。
CSV 旁边写 <name>.meta.json 记录完整配置; JSON 格式把元数据与结果行写入同一文件。
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from dsat_precoding.core.errors import ResultsIOError
from dsat_precoding.core.models import ResultRow
from dsat_precoding.utils.logger import get_logger


logger = get_logger(__name__)

RESULT_COLUMNS = ("metric", "value", "stderr", "iters")
FLOAT_FORMAT = "%.15g"
FORMATS = ("csv", "json")


def result_columns(sweep_keys: Sequence[str], timing: bool = False) -> List[str]:
    columns = list(sweep_keys) + list(RESULT_COLUMNS)
    if timing:
        columns.append("wall_ms")
    return columns


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"无法序列化 {type(value).__name__}")


def _write_json(path: Path, payload: Dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, default=_json_default)
        f.write("\n")


def emit_results(
    rows: List[ResultRow],
    fmt: str = "csv",
    out_dir: Union[str, Path] = "results",
    name: str = "results",
    metadata: Optional[Dict[str, Any]] = None,
    sweep_keys: Optional[Sequence[str]] = None,
    timing: bool = False,
) -> List[Path]:
    """
    写出结果表

    Args:
        rows: 结果行 (不能为空)
        fmt: csv / json
        out_dir: 输出目录 (不存在时创建)
        name: 文件名前缀
        metadata: 元数据 (完整配置、种子、版本)
        sweep_keys: 扫描参数列; 默认取首行的参数名
        timing: 是否输出 wall_ms 列

    Returns:
        写出的文件路径列表

    Raises:
        ValueError: rows 为空或格式未知
        ResultsIOError: 目录无法创建或文件无法写入
    """
    if not rows:
        raise ValueError("没有可输出的结果行")
    fmt = fmt.lower()
    if fmt not in FORMATS:
        raise ValueError(f"未知输出格式: {fmt}, 可选: {', '.join(FORMATS)}")
    if sweep_keys is None:
        sweep_keys = list(rows[0].params)

    out_dir = Path(out_dir)
    columns = result_columns(sweep_keys, timing)
    frame = pd.DataFrame([row.to_dict() for row in rows], columns=columns)
    metadata = dict(metadata or {})

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ResultsIOError(f"无法创建输出目录 {out_dir}: {exc}") from exc

    written: List[Path] = []
    target = out_dir / f"{name}.{fmt}"
    try:
        if fmt == "csv":
            frame.to_csv(target, index=False, float_format=FLOAT_FORMAT)
            written.append(target)
            meta_path = out_dir / f"{name}.meta.json"
            _write_json(meta_path, {**metadata, "columns": columns})
            written.append(meta_path)
        else:
            payload = {**metadata, "columns": columns, "rows": frame.to_dict(orient="records")}
            _write_json(target, payload)
            written.append(target)
    except OSError as exc:
        raise ResultsIOError(f"写出结果失败 {target}: {exc}") from exc

    logger.info(f"结果已写出: {', '.join(str(p) for p in written)} ({len(rows)} 行)")
    return written
