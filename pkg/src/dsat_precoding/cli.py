"""
命令行入口

    dsat run --config configs/rate_vs_power.yaml --out results/
    dsat validate --config configs/default.yaml
    dsat describe --config configs/default.yaml

退出码: 0 成功, 1 配置错误, 2 运行错误
"""

import argparse
import sys
from dataclasses import replace
from typing import List, Optional, Tuple

from dotenv import load_dotenv
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn
from rich.table import Table

from dsat_precoding import __version__
from dsat_precoding.core.config import ExperimentSpec, ScenarioConfig
from dsat_precoding.core.errors import ConfigError, PrecodingError
from dsat_precoding.core.types import ExperimentName
from dsat_precoding.harness.loader import load_config, load_config_dict
from dsat_precoding.harness.results import FORMATS
from dsat_precoding.harness.runner import run_experiment
from dsat_precoding.utils.logger import get_logger, setup_file_logging


console = Console()
logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dsat",
        description="多低轨卫星协作下行预编码仿真",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="运行实验")
    run.add_argument("--config", "-c", help="YAML 配置文件 (缺省使用内置默认值)")
    run.add_argument(
        "--experiment", "-e",
        choices=[name.value for name in ExperimentName],
        help="覆盖 experiment.name (扫描网格随之换成该实验的缺省网格, 除非配置显式给出)",
    )
    run.add_argument("--seed", type=int, help="覆盖随机种子")
    run.add_argument("--trials", type=int, help="覆盖 Monte-Carlo 次数")
    run.add_argument("--out", "-o", default="results", help="输出目录 (默认 results/)")
    run.add_argument("--threads", type=int, help="并行线程数")
    run.add_argument("--format", choices=FORMATS, default="csv", help="输出格式")
    run.add_argument("--timing", action="store_true", help="输出 wall_ms 列 (不再逐字节可复现)")
    run.add_argument("--log-dir", default="logs", help="日志目录")

    validate = sub.add_parser("validate", help="只校验配置")
    validate.add_argument("--config", "-c", required=True, help="YAML 配置文件")

    describe = sub.add_parser("describe", help="打印解析后的完整配置")
    describe.add_argument("--config", "-c", help="YAML 配置文件 (缺省打印默认值)")
    describe.add_argument(
        "--experiment", "-e",
        choices=[name.value for name in ExperimentName],
        help="打印该实验的缺省配方",
    )
    return parser


def _load(
    config_path: Optional[str],
    experiment: Optional[str] = None,
) -> Tuple[ScenarioConfig, ExperimentSpec]:
    """读取配置; --experiment 覆盖实验名时按新实验重新解析 experiment 段"""
    if config_path:
        scenario, spec = load_config(config_path)
    else:
        scenario, spec = load_config_dict({})

    if experiment and ExperimentName.from_string(experiment) != spec.name:
        data = spec.to_dict()
        data["name"] = experiment
        for key in ("sweep", "total_antennas"):
            data.pop(key, None)
        spec = ExperimentSpec.from_dict(data, seed=spec.seed)
    return scenario, spec


def _apply_overrides(
    scenario: ScenarioConfig,
    spec: ExperimentSpec,
    args: argparse.Namespace,
) -> Tuple[ScenarioConfig, ExperimentSpec]:
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
        scenario = scenario.with_updates(seed=args.seed)
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.threads is not None:
        changes["threads"] = args.threads
    return scenario, replace(spec, **changes).validate()


def _config_table(scenario: ScenarioConfig, spec: ExperimentSpec) -> Table:
    table = Table(title=f"配置 · {spec.name.value}", show_lines=False)
    table.add_column("段", style="dim")
    table.add_column("键", style="cyan")
    table.add_column("值", justify="right")
    for key, value in scenario.to_dict().items():
        table.add_row("scenario", key, str(value))
    for key, value in spec.to_dict().items():
        table.add_row("experiment", key, str(value))
    table.add_row("experiment", "points", str(len(spec.points())))
    return table


def cmd_run(args: argparse.Namespace) -> int:
    scenario, spec = _load(args.config, args.experiment)
    scenario, spec = _apply_overrides(scenario, spec, args)

    log_path = setup_file_logging(log_dir=args.log_dir, log_file=f"{spec.name.value}.log")
    logger.info(f"日志文件: {log_path}")

    points = spec.points()
    with Progress(
        TextColumn("[bold blue]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
    ) as progress:
        task = progress.add_task(spec.name.value, total=len(points))
        result = run_experiment(
            scenario,
            spec,
            out_dir=args.out,
            fmt=args.format,
            timing=args.timing,
            on_point=lambda index, point: progress.advance(task),
        )

    if not result.rows:
        console.print(f"[red]❌ 所有扫描点均失败 ({len(result.failures)} 处)[/red]")
        return EXIT_RUNTIME
    for path in result.files:
        console.print(f"[green]✅ 已写出[/green] {path}")
    if result.failures:
        console.print(f"[yellow]⚠️ {len(result.failures)} 处失败, 详见元数据[/yellow]")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    scenario, spec = _load(args.config)
    console.print(
        f"[green]✅ 配置有效[/green]: {args.config} "
        f"(实验 {spec.name.value}, {len(spec.points())} 个扫描点)"
    )
    return EXIT_OK


def cmd_describe(args: argparse.Namespace) -> int:
    scenario, spec = _load(args.config, args.experiment)
    console.print(_config_table(scenario, spec))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "validate": cmd_validate,
    "describe": cmd_describe,
}


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        console.print(f"[red]❌ 配置错误[/red]: {exc}")
        return EXIT_CONFIG
    except (PrecodingError, OSError) as exc:
        console.print(f"[red]❌ 运行错误[/red]: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        console.print("⏹ 已中断")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
