#!/usr/bin/env python3
"""
单实验启动脚本

不安装包时直接运行 CLI (scripts/run/single.py → 项目根目录/src)

    python scripts/run/single.py run -c configs/rate_vs_power.yaml
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent.parent / "src"))

from dsat_precoding.cli import main  # noqa: E402


if __name__ == "__main__":
    sys.exit(main())
