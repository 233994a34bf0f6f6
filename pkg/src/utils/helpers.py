"""
通用工具函数模块
扫描参数解析、角度误差和随机种子派生
"""

import math

import numpy as np

from .errors import ConfigurationError

# 浮点步进累计误差的容忍量
_STEP_TOLERANCE = 1e-9


def _parse_segment(segment: str) -> list[float]:
    parts = [p.strip() for p in segment.split(":")]
    try:
        numbers = [float(p) for p in parts]
    except ValueError:
        raise ConfigurationError(f"无法解析扫描段: {segment!r}") from None

    if len(numbers) == 1:
        return numbers
    if len(numbers) != 3:
        raise ConfigurationError(f"扫描段格式应为 start:stop:step，实际为 {segment!r}")

    start, stop, step = numbers
    if step <= 0:
        raise ConfigurationError(f"扫描步长必须为正数: {segment!r}")
    if stop < start:
        raise ConfigurationError(f"扫描段终点小于起点: {segment!r}")
    count = int(math.floor((stop - start) / step + _STEP_TOLERANCE)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def parse_sweep(text: str) -> list[float]:
    """
    解析扫描参数

    逗号分隔的若干段，每段是单个数值或闭区间 start:stop:step，
    例如 "0.1:0.9:0.1,0.91:0.95:0.01" 得到 14 个值。
    结果保持出现顺序并去重。

    Raises:
        ConfigurationError: 格式错误或结果为空
    """
    values: list[float] = []
    for segment in str(text).split(","):
        if not segment.strip():
            continue
        for value in _parse_segment(segment):
            if not any(abs(value - v) <= _STEP_TOLERANCE for v in values):
                values.append(value)
    if not values:
        raise ConfigurationError(f"扫描参数为空: {text!r}")
    return values


def wrap_angle(angle: float) -> float:
    """归约到 [-π, π)"""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def angle_error_deg(estimate: float, truth: float) -> float:
    """两个角度之差的绝对值（度），考虑 2π 周期"""
    return abs(math.degrees(wrap_angle(estimate - truth)))


def axial_error_deg(estimate: float, truth: float) -> float:
    """以 π 为周期的角度误差（度），用于只能确定到符号的方向角"""
    diff = (estimate - truth) % math.pi
    return math.degrees(min(diff, math.pi - diff))


def derive_seed(base_seed: int, *keys: int) -> int:
    """由基础种子和 (问题, 扫描点, 试验) 等下标派生独立的子种子"""
    sequence = np.random.SeedSequence([int(base_seed), *(int(k) for k in keys)])
    return int(sequence.generate_state(1, dtype=np.uint32)[0])
