"""
报告生成器模块
负责汇总运行记录并输出 CSV、JSON 和文本报告
"""

import csv
import json
import math
import statistics
from collections import defaultdict
from dataclasses import asdict
from datetime import datetime
from pathlib import Path

from ..models.data_models import METHODS, MethodStats, RunRecord, Summary, SummaryRow, TraceEntry
from ..utils.log import logger

SCHEMA_VERSION = 1

RECORD_COLUMNS = (
    "problem",
    "method",
    "sweep_value",
    "trial",
    "time_s",
    "iterations",
    "cardinality",
    "err_primary",
    "err_secondary",
    "build_time_s",
    "n_constraints",
    "n_inlier_constraints",
    "error",
)

SUMMARY_COLUMNS = (
    "problem",
    "sweep_value",
    "method",
    "n_runs",
    "n_errors",
    "mean_time",
    "median_time",
    "mean_iterations",
    "mean_cardinality",
    "mean_err_primary",
    "mean_err_secondary",
    "speedup",
)

TRACE_COLUMNS = ("method", "sweep_value", "iteration", "best_lower", "popped_upper", "queue_len")


def _mean(values: list[float]) -> float | None:
    # fsum 精确舍入，结果与输入顺序无关
    finite = [v for v in values if v is not None and math.isfinite(v)]
    return math.fsum(finite) / len(finite) if finite else None


def _median(values: list[float]) -> float | None:
    finite = sorted(v for v in values if v is not None and math.isfinite(v))
    return statistics.median(finite) if finite else None


def _method_stats(method: str, records: list[RunRecord]) -> MethodStats:
    ok = [r for r in records if r.ok]
    return MethodStats(
        method=method,
        n_runs=len(records),
        n_errors=len(records) - len(ok),
        mean_time=_mean([r.time_s for r in ok]),
        median_time=_median([r.time_s for r in ok]),
        mean_iterations=_mean([float(r.iterations) for r in ok]),
        mean_cardinality=_mean([float(r.cardinality) for r in ok]),
        mean_err_primary=_mean([r.err_primary for r in ok]),
        mean_err_secondary=_mean([r.err_secondary for r in ok if r.err_secondary is not None]),
    )


def _method_key(method: str):
    return (METHODS.index(method) if method in METHODS else len(METHODS), method)


def summarize(records: list[RunRecord]) -> Summary:
    """
    按 (问题, 扫描值) 聚合

    speedup = 平凡 BnB 平均耗时 / ACM 平均耗时，只有两个方法都有有效耗时才计算
    """
    groups: dict[tuple[str, float], dict[str, list[RunRecord]]] = defaultdict(
        lambda: defaultdict(list)
    )
    for record in records:
        groups[(record.problem, record.sweep_value)][record.method].append(record)

    rows = []
    for problem, sweep_value in sorted(groups):
        by_method = groups[(problem, sweep_value)]
        methods = {
            m: _method_stats(m, by_method[m]) for m in sorted(by_method, key=_method_key)
        }
        speedup = None
        plain, acm = methods.get("plain"), methods.get("acm")
        if plain and acm and plain.mean_time is not None and acm.mean_time:
            speedup = plain.mean_time / acm.mean_time
        rows.append(SummaryRow(problem, sweep_value, methods, speedup))
    return Summary(rows=rows, schema_version=SCHEMA_VERSION)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "" if math.isnan(value) else repr(value)
    return str(value)


def _record_rows(records: list[RunRecord]):
    for record in records:
        yield [_cell(getattr(record, name)) for name in RECORD_COLUMNS]


def _summary_rows(summary: Summary):
    for row in summary.rows:
        for stats in row.methods.values():
            values = asdict(stats)
            yield [
                _cell(row.problem),
                _cell(row.sweep_value),
                *(_cell(values[name]) for name in SUMMARY_COLUMNS[2:-1]),
                _cell(row.speedup),
            ]


def write_csv(data: list[RunRecord] | Summary, path: str | Path):
    """
    写出运行记录或汇总

    运行记录列顺序见 RECORD_COLUMNS，汇总每个 (扫描值, 方法) 一行，列顺序见 SUMMARY_COLUMNS。
    空值写为空字符串；路径不可写时抛出 OSError。
    """
    if isinstance(data, Summary):
        columns, rows = SUMMARY_COLUMNS, _summary_rows(data)
    else:
        columns, rows = RECORD_COLUMNS, _record_rows(list(data))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)
    logger.info(f"已写出 CSV: {path}")


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_json_safe(v) for v in value]
    return value


def summary_to_dict(summary: Summary) -> dict:
    return _json_safe(
        {
            "schema_version": summary.schema_version,
            "rows": [
                {
                    "problem": row.problem,
                    "sweep_value": row.sweep_value,
                    "speedup": row.speedup,
                    "methods": {m: asdict(s) for m, s in row.methods.items()},
                }
                for row in summary.rows
            ],
        }
    )


def write_json(summary: Summary, path: str | Path):
    Path(path).write_text(
        json.dumps(summary_to_dict(summary), ensure_ascii=False, indent=2, allow_nan=False),
        encoding="utf-8",
    )
    logger.info(f"已写出 JSON 汇总: {path}")


def write_trace_csv(traces: dict[tuple[str, float], list[TraceEntry]], path: str | Path):
    """界轨迹：每个 (方法, 扫描值) 的逐次出队记录"""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for (method, sweep_value) in sorted(traces, key=lambda k: (k[1], _method_key(k[0]))):
            for entry in traces[(method, sweep_value)]:
                writer.writerow([method, repr(float(sweep_value)), *entry])
    logger.info(f"已写出界轨迹: {path}")


class ReportGenerator:
    """报告生成器"""

    def __init__(self, config_manager=None):
        self.config_manager = config_manager

    @staticmethod
    def _fmt(value: float | None, spec: str = ".4g") -> str:
        return "-" if value is None else format(value, spec)

    def generate_text_report(self, summary: Summary, title: str = "") -> str:
        """生成文本格式的对比报告"""
        report = f"""
🎯 一致性最大化基准测试报告 {title}
📅 {datetime.now().strftime("%Y年%m月%d日 %H:%M")}

"""
        if not summary.rows:
            return report + "（没有记录）\n"

        for row in summary.rows:
            report += f"📊 {row.problem}  扫描值 {row.sweep_value:g}\n"
            for stats in row.methods.values():
                report += (
                    f"• {stats.method}: 平均耗时 {self._fmt(stats.mean_time)} s，"
                    f"中位耗时 {self._fmt(stats.median_time)} s，"
                    f"平均迭代 {self._fmt(stats.mean_iterations, '.1f')}，"
                    f"平均内点数 {self._fmt(stats.mean_cardinality, '.1f')}，"
                    f"主误差 {self._fmt(stats.mean_err_primary)}"
                )
                if stats.mean_err_secondary is not None:
                    report += f"，次误差 {self._fmt(stats.mean_err_secondary)}"
                if stats.n_errors:
                    report += f"（失败 {stats.n_errors}/{stats.n_runs}）"
                report += "\n"
            if row.speedup is not None:
                report += f"🚀 加速比 {row.speedup:.2f}×\n"
            report += "\n"
        return report
