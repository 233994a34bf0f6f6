"""
核心功能模块
包含配置管理、区间运算和分支定界引擎
"""

from .config import ConfigManager
from .engine import BranchAndBound, leaf_diameter, solve, split

__all__ = ["ConfigManager", "BranchAndBound", "solve", "split", "leaf_diameter"]
