"""
扫描执行器模块
把 (扫描值, 试验) 任务分发到受限并发的工作线程，并按固定顺序合并结果
"""

import asyncio

from ..core.config import ConfigManager
from ..models.data_models import PROBLEMS, RunRecord, TraceEntry
from ..utils.errors import ConfigurationError
from ..utils.helpers import derive_seed
from ..utils.log import logger
from .trials import TrialOutcome, create_trial, error_records


class SweepRunner:
    """扫描执行器"""

    def __init__(self, config_manager: ConfigManager):
        self.config_manager = config_manager
        # (method, sweep_value) → 第 0 次试验的界轨迹
        self.traces: dict[tuple[str, float], list[TraceEntry]] = {}

    def _config_with_overrides(self, overrides: dict | None) -> ConfigManager:
        if not overrides:
            return self.config_manager
        merged = ConfigManager(self.config_manager.config)
        for key, value in overrides.items():
            merged.set_value(key, value)
        return merged

    def run_sweep(
        self,
        problem: str,
        methods: list[str] | tuple[str, ...],
        sweep: list[float],
        trials: int,
        overrides: dict | None = None,
        *,
        collect_traces: bool = False,
    ) -> list[RunRecord]:
        """同步入口，见 run_sweep_async"""
        return asyncio.run(
            self.run_sweep_async(
                problem, methods, sweep, trials, overrides, collect_traces=collect_traces
            )
        )

    async def run_sweep_async(
        self,
        problem: str,
        methods: list[str] | tuple[str, ...],
        sweep: list[float],
        trials: int,
        overrides: dict | None = None,
        *,
        collect_traces: bool = False,
    ) -> list[RunRecord]:
        """
        执行一次完整扫描

        Args:
            problem: 问题名
            methods: 参与比较的方法
            sweep: 扫描值（外点率或重叠率）
            trials: 每个扫描值的试验次数
            overrides: 'section.key' 形式的配置覆盖
            collect_traces: 是否记录第 0 次试验的界轨迹

        Returns:
            trials × |sweep| × |methods| 条记录，按 (扫描值, 试验, 方法) 排序
        """
        if trials < 1:
            raise ConfigurationError(f"trials 必须 ≥ 1: {trials}")
        if not methods:
            raise ConfigurationError("至少需要一个方法")
        if problem not in PROBLEMS:
            raise ConfigurationError(f"未知问题: {problem}，可选: {', '.join(PROBLEMS)}")

        config = self._config_with_overrides(overrides)
        runner = create_trial(problem, config)
        base_seed = config.get_seed()
        problem_index = PROBLEMS.index(problem)
        record_trace_always = config.get_record_trace()

        max_concurrent = config.get_threads()
        logger.info(
            f"[{problem}] 扫描开始：{len(sweep)} 个扫描值 × {trials} 次试验 × {len(methods)} 个方法，并发数 {max_concurrent}"
        )
        sem = asyncio.Semaphore(max_concurrent)

        async def safe_run_trial(sweep_index: int, sweep_value: float, trial: int) -> TrialOutcome:
            seed = derive_seed(base_seed, problem_index, sweep_index, trial)
            record_trace = record_trace_always or (collect_traces and trial == 0)
            async with sem:
                return await asyncio.to_thread(
                    runner.run, methods, sweep_value, trial, seed, record_trace=record_trace
                )

        keys = [
            (sweep_index, float(sweep_value), trial)
            for sweep_index, sweep_value in enumerate(sweep)
            for trial in range(trials)
        ]
        tasks = [
            asyncio.create_task(
                safe_run_trial(*key), name=f"{problem}_sweep{key[0]}_trial{key[2]}"
            )
            for key in keys
        ]

        # 单个试验失败不影响其它试验
        results = await asyncio.gather(*tasks, return_exceptions=True)

        records: list[RunRecord] = []
        success_count = 0
        error_count = 0
        for (_, sweep_value, trial), result in zip(keys, results):
            if isinstance(result, Exception):
                logger.error(
                    f"[{problem}] 试验异常 sweep={sweep_value:g} trial={trial}: {result}",
                    exc_info=result,
                )
                records.extend(
                    error_records(
                        problem, methods, sweep_value, trial, f"{type(result).__name__}: {result}"
                    )
                )
                error_count += 1
                continue
            records.extend(result.records)
            if all(r.ok for r in result.records):
                success_count += 1
            else:
                error_count += 1
            if collect_traces and trial == 0:
                for method, trace in result.traces.items():
                    self.traces[(method, sweep_value)] = trace

        method_order = {m: k for k, m in enumerate(methods)}
        records.sort(key=lambda r: (r.sweep_value, r.trial, method_order.get(r.method, len(methods))))
        logger.info(
            f"[{problem}] 扫描完成 - 成功：{success_count}, 失败：{error_count}, 总计：{len(keys)}"
        )
        return records
