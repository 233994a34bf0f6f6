"""
数据模型模块
"""

from .data_models import (
    Cube,
    GroundTruth,
    Interval,
    IntervalSet,
    RunRecord,
    SceneConfig,
    SolveReport,
    StabResult,
    Summary,
)

__all__ = [
    "Interval",
    "IntervalSet",
    "StabResult",
    "Cube",
    "SolveReport",
    "SceneConfig",
    "GroundTruth",
    "RunRecord",
    "Summary",
]
