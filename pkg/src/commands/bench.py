"""
基准测试命令处理模块
"""

from ..models.data_models import METHODS
from ..core.config import section_of
from ..reports.generators import ReportGenerator, summarize, write_csv, write_json, write_trace_csv
from ..scheduler.sweep_runner import SweepRunner
from ..utils.errors import ConfigurationError
from ..utils.helpers import parse_sweep
from ..utils.log import logger


class BenchHandler:
    """基准测试命令处理器"""

    def __init__(self, config_manager, sweep_runner=None, report_generator=None):
        self.config_manager = config_manager
        self.sweep_runner = sweep_runner or SweepRunner(config_manager)
        self.report_generator = report_generator or ReportGenerator(config_manager)

    @staticmethod
    def resolve_methods(method: str) -> tuple[str, ...]:
        if method == "both":
            return METHODS
        if method in METHODS:
            return (method,)
        raise ConfigurationError(f"无效的方法：{method}，支持：plain, acm, both")

    @staticmethod
    def collect_overrides(problem: str, args) -> dict:
        """命令行参数转为 'section.key' 配置覆盖，未给出的参数不覆盖"""
        section = section_of(problem)
        mapping = {
            f"{section}.n_points": getattr(args, "points", None),
            f"{section}.eps": getattr(args, "eps", None),
            "engine.max_depth": getattr(args, "max_depth", None),
            "bench.seed": getattr(args, "seed", None),
            "reg3d_corrless.ply": getattr(args, "ply", None),
            "reg3d_corrless.voxel": getattr(args, "voxel", None),
            "reg3d_corrless.tau_frac": getattr(args, "tau_frac", None),
        }
        return {key: value for key, value in mapping.items() if value is not None}

    def run(self, args) -> int:
        """执行基准测试并写出结果，返回进程退出码"""
        problem = args.problem
        methods = self.resolve_methods(args.method)
        sweep = parse_sweep(args.sweep or self.config_manager.get_sweep(problem))
        trials = args.trials if args.trials is not None else self.config_manager.get_trials()
        overrides = self.collect_overrides(problem, args)

        records = self.sweep_runner.run_sweep(
            problem,
            methods,
            sweep,
            trials,
            overrides,
            collect_traces=bool(getattr(args, "trace", None)),
        )

        write_csv(records, args.out)
        summary = summarize(records)
        if getattr(args, "summary", None):
            write_json(summary, args.summary)
        if getattr(args, "trace", None):
            write_trace_csv(self.sweep_runner.traces, args.trace)

        print(self.report_generator.generate_text_report(summary, title=problem))

        n_failed = sum(1 for r in records if not r.ok)
        if n_failed:
            logger.warning(f"[bench] {n_failed}/{len(records)} 条记录求解失败")
        return 0 if n_failed < len(records) else 1
