"""
报告生成模块
"""

from .generators import ReportGenerator, summarize, write_csv, write_json, write_trace_csv

__all__ = ["ReportGenerator", "summarize", "write_csv", "write_json", "write_trace_csv"]
