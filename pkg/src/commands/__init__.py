"""
命令处理模块
"""

from .bench import BenchHandler
from .generate import GenerateHandler
from .solve import SolveHandler

__all__ = ["BenchHandler", "SolveHandler", "GenerateHandler"]
