"""
调度模块
负责单次试验流程和扫描任务的并发执行
"""

from .sweep_runner import SweepRunner
from .trials import (
    BaseTrial,
    PlanarTrial,
    Reg3dCorrlessTrial,
    Reg3dCorrTrial,
    ResectionTrial,
    create_trial,
)

__all__ = [
    "SweepRunner",
    "BaseTrial",
    "ResectionTrial",
    "PlanarTrial",
    "Reg3dCorrTrial",
    "Reg3dCorrlessTrial",
    "create_trial",
]
