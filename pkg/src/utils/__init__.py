"""
工具函数模块
包含日志、异常定义和通用工具函数
"""

from .errors import (
    AcmError,
    ConfigurationError,
    CorrespondenceFormatError,
    IntervalDomainError,
    PlyParseError,
)
from .helpers import angle_error_deg, axial_error_deg, derive_seed, parse_sweep, wrap_angle
from .log import logger, setup_logging

__all__ = [
    "logger",
    "setup_logging",
    "AcmError",
    "ConfigurationError",
    "IntervalDomainError",
    "PlyParseError",
    "CorrespondenceFormatError",
    "parse_sweep",
    "wrap_angle",
    "angle_error_deg",
    "axial_error_deg",
    "derive_seed",
]
