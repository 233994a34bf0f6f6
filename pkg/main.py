"""
一致性最大化基准工具
对比平凡分支定界与降维加速的分支定界（ACM），支持基准扫描、单实例求解和数据生成
"""

import argparse
import sys

from src.commands.bench import BenchHandler
from src.commands.generate import GenerateHandler
from src.commands.solve import SolveHandler
from src.core.config import ConfigManager
from src.models.data_models import PROBLEMS
from src.utils.errors import AcmError
from src.utils.log import logger, setup_logging


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON 配置文件")
    parser.add_argument("--log-level", default="INFO", help="日志级别 (默认 INFO)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="acm-consensus", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="对比平凡 BnB 与 ACM 的扫描实验")
    _add_common(bench)
    bench.add_argument("problem", choices=PROBLEMS)
    bench.add_argument("--method", default="both", choices=("plain", "acm", "both"))
    bench.add_argument("--sweep", help="扫描值，如 0.1:0.9:0.1,0.91:0.95:0.01")
    bench.add_argument("--trials", type=int)
    bench.add_argument("--points", type=int)
    bench.add_argument("--eps", type=float)
    bench.add_argument("--max-depth", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--out", default="results.csv")
    bench.add_argument("--summary", help="JSON 汇总输出路径")
    bench.add_argument("--ply", help="无对应配准使用的真实点云")
    bench.add_argument("--voxel", type=float)
    bench.add_argument("--tau-frac", type=float)
    bench.add_argument("--trace", help="界轨迹 CSV 输出路径")

    solve = sub.add_parser("solve", help="求解单个实例")
    _add_common(solve)
    solve.add_argument("problem", choices=PROBLEMS)
    solve.add_argument("input", help="对应点 CSV，或无对应配准的源点集")
    solve.add_argument("--target", help="无对应配准的目标点集")
    solve.add_argument("--method", default="acm", choices=("plain", "acm"))
    solve.add_argument("--eps", type=float)
    solve.add_argument("--max-depth", type=int)
    solve.add_argument("--prior", type=float, nargs=2, metavar=("BETA", "GAMMA"))
    solve.add_argument("--truth", help="gen 命令写出的 truth.json")

    gen = sub.add_parser("gen", help="生成合成实例")
    _add_common(gen)
    gen.add_argument("problem", choices=PROBLEMS)
    gen.add_argument("--ratio", type=float, default=0.5, help="外点率；无对应配准为重叠率")
    gen.add_argument("--out-dir", default="instance")
    gen.add_argument("--seed", type=int)
    return parser


HANDLERS = {"bench": BenchHandler, "solve": SolveHandler, "gen": GenerateHandler}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    try:
        config_manager = ConfigManager.from_file(args.config)
        return HANDLERS[args.command](config_manager).run(args)
    except AcmError as e:
        logger.error(f"❌ {e}")
        return 2
    except OSError as e:
        logger.error(f"❌ 文件读写失败：{e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
