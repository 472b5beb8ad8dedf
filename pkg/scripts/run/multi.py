#!/usr/bin/env python3
"""
批量实验启动器: 按 experiments.yaml 依次 (或并行) 运行多个实验

每个实验 = 1 个配置文件 + 1 个进程 + 1 个日志文件
"""

import argparse
import os
import subprocess
import sys
from pathlib import Path
import yaml


def load_experiments(config_path: Path):
    with open(config_path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    launcher = data.get("launcher", {}) or {}
    experiments = data.get("experiments", []) or []
    return launcher, experiments


def main():
    parser = argparse.ArgumentParser(description="Batch experiment launcher")
    parser.add_argument(
        "--config", "-c",
        default="configs/experiments.yaml",
        help="批量实验配置文件路径"
    )
    parser.add_argument("--seed", type=int, help="统一覆盖随机种子")
    args = parser.parse_args()

    config_path = Path(args.config)
    if not config_path.exists():
        print(f"❌ 配置文件不存在: {config_path}")
        sys.exit(1)

    launcher_cfg, experiments = load_experiments(config_path)
    if not experiments:
        print("❌ experiments 列表为空")
        sys.exit(1)

    log_dir = Path(launcher_cfg.get("log_dir", "logs/experiments"))
    log_dir.mkdir(parents=True, exist_ok=True)
    out_dir = launcher_cfg.get("out_dir", "results")
    parallel = bool(launcher_cfg.get("parallel", False))

    procs = []
    failed = 0
    try:
        for exp in experiments:
            name = exp.get("name")
            cfg = exp.get("config_path")
            if not name or not cfg:
                print(f"⚠️ 跳过实验（缺少 name/config_path）: {exp}")
                continue

            log_file = log_dir / f"{name}.log"
            env = os.environ.copy()
            env["LOG_FILE_PATH"] = str(log_file)

            cmd = [
                sys.executable,
                "scripts/run/single.py",
                "run",
                "--config",
                cfg,
                "--out",
                str(Path(out_dir) / name),
            ]
            if args.seed is not None:
                cmd += ["--seed", str(args.seed)]
            print(f"▶️ 启动实验: {name}, config={cfg}, log={log_file}")
            proc = subprocess.Popen(cmd, env=env)
            procs.append((name, proc))
            if not parallel:
                ret = proc.wait()
                failed += ret != 0
                print(f"🔚 实验结束: {name}, code={ret}")

        if parallel:
            for name, proc in procs:
                ret = proc.wait()
                failed += ret != 0
                print(f"🔚 实验结束: {name}, code={ret}")
    except KeyboardInterrupt:
        print("⏹ 收到中断信号，停止所有实验...")
        for _, proc in procs:
            proc.terminate()
    finally:
        for _, proc in procs:
            if proc.poll() is None:
                proc.kill()

    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
