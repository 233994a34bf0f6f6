"""
数据模型定义
包含区间、分支定界、各问题约束以及基准测试相关的数据结构
"""

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..utils.errors import ConfigurationError, IntervalDomainError

# ---------------------------------------------------------------------------
# 区间
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """闭区间 [lo, hi]"""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise IntervalDomainError(f"区间端点必须有限: [{lo}, {hi}]")
        if lo > hi:
            raise IntervalDomainError(f"区间下界大于上界: [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class IntervalSet:
    """
    互不相交的闭区间并集
    构造时自动排序并合并重叠或相接的区间
    """

    parts: tuple[Interval, ...] = ()

    def __post_init__(self):
        ordered = sorted(self.parts, key=lambda iv: (iv.lo, iv.hi))
        merged: list[Interval] = []
        for iv in ordered:
            if merged and iv.lo <= merged[-1].hi:
                last = merged[-1]
                if iv.hi > last.hi:
                    merged[-1] = Interval(last.lo, iv.hi)
            else:
                merged.append(iv)
        object.__setattr__(self, "parts", tuple(merged))

    @classmethod
    def from_bounds(cls, bounds) -> "IntervalSet":
        """从 (lo, hi) 序列构造，忽略 lo > hi 或含 NaN 的项"""
        parts = []
        for lo, hi in bounds:
            if np.isnan(lo) or np.isnan(hi) or lo > hi:
                continue
            parts.append(Interval(lo, hi))
        return cls(tuple(parts))

    @classmethod
    def full(cls, lo: float = -math.pi, hi: float = math.pi) -> "IntervalSet":
        return cls((Interval(lo, hi),))

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    @property
    def is_empty(self) -> bool:
        return not self.parts

    @property
    def measure(self) -> float:
        return sum(iv.width for iv in self.parts)

    def contains(self, x: float) -> bool:
        return any(iv.contains(x) for iv in self.parts)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        result = []
        i = j = 0
        a, b = self.parts, other.parts
        while i < len(a) and j < len(b):
            lo = max(a[i].lo, b[j].lo)
            hi = min(a[i].hi, b[j].hi)
            if lo <= hi:
                result.append(Interval(lo, hi))
            if a[i].hi < b[j].hi:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(result))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(self.parts + other.parts)

    def clip(self, lo: float, hi: float) -> "IntervalSet":
        return self.intersect(IntervalSet.full(lo, hi))


@dataclass(frozen=True)
class StabResult:
    """区间穿刺结果，count 为 0 时 stabber 为 NaN"""

    stabber: float
    count: int


# ---------------------------------------------------------------------------
# 分支定界
# ---------------------------------------------------------------------------


@dataclass
class Cube:
    """轴对齐搜索盒"""

    lo: np.ndarray
    hi: np.ndarray
    depth: int = 0

    def __post_init__(self):
        self.lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise ConfigurationError(
                f"Cube 上下界维度不一致: {self.lo.shape} vs {self.hi.shape}"
            )
        if np.any(self.lo > self.hi):
            raise ConfigurationError(f"Cube 下界大于上界: {self.lo} > {self.hi}")
        if self.depth < 0:
            raise ConfigurationError(f"Cube 深度不能为负: {self.depth}")

    @property
    def n(self) -> int:
        return self.lo.shape[0]

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    @property
    def half_diameter(self) -> float:
        return 0.5 * self.diameter

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.lo <= x) and np.all(x <= self.hi))


@dataclass
class BoundEval:
    """单个 Cube 的上下界评估结果"""

    lower: int
    lower_witness: np.ndarray
    upper: int


class TraceEntry(NamedTuple):
    """界轨迹的一行"""

    iteration: int
    best_lower: int
    popped_upper: int
    queue_len: int


@dataclass
class SolveReport:
    """求解结果与统计"""

    best_param: np.ndarray
    best_count: int
    iterations: int = 0  # 出队次数
    cubes_pruned: int = 0
    cubes_split: int = 0
    max_queue_len: int = 0
    wall_time: float = 0.0  # 秒
    bound_trace: list[TraceEntry] | None = None


# ---------------------------------------------------------------------------
# 各问题的数据与约束
# ---------------------------------------------------------------------------


@dataclass
class Corr3D2D:
    """3D-2D 对应点（世界点 + 归一化像点）"""

    p: np.ndarray
    u: np.ndarray


@dataclass(frozen=True)
class TimConstraint:
    """平移不变量约束 d1·sinα + d2·cosα + d3 = 0"""

    d1: float
    d2: float
    d3: float
    i: int = -1  # 对应点对的下标
    j: int = -1
    valid: bool = True


@dataclass(frozen=True)
class ImuPrior:
    """IMU 提供的俯仰角 beta（绕 y）与横滚角 gamma（绕 x），弧度"""

    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("beta", "gamma"):
            value = getattr(self, name)
            if not (-math.pi <= value <= math.pi):
                raise ConfigurationError(f"IMU 角度 {name}={value} 超出 [-π, π]")


@dataclass
class Corr2D2D:
    """2D-2D 对应点（两视图归一化坐标）"""

    x1: np.ndarray
    x2: np.ndarray


@dataclass(frozen=True)
class PlanarConstraint:
    """平面运动约束 g = A1·sin(θ1+φ1) + A2·sin(θ2+φ2)"""

    A1: float
    phi1: float
    A2: float
    phi2: float


@dataclass
class Corr3D3D:
    """3D-3D 对应点"""

    p: np.ndarray
    q: np.ndarray


@dataclass
class RiPair:
    """旋转不变点对匹配：P 中线段 (p1, p2) 与 Q 中线段 (q1, q2)"""

    p1: np.ndarray
    p2: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    p_index: tuple[int, int] = (-1, -1)
    q_index: tuple[int, int] = (-1, -1)


# ---------------------------------------------------------------------------
# 数据生成
# ---------------------------------------------------------------------------


@dataclass
class SceneConfig:
    """合成场景配置，角度/平移范围为 None 时使用各问题的默认值"""

    n_points: int = 200
    noise_px: float = 2.0  # 均匀噪声幅值（像素）
    focal: float = 800.0
    outlier_ratio: float = 0.0
    seed: int | np.random.SeedSequence = 0
    point_lo: tuple[float, float, float] = (-1.0, -1.0, 4.0)
    point_hi: tuple[float, float, float] = (1.0, 1.0, 8.0)
    angle_range: tuple[float, float] | None = None
    translation_range: tuple[float, float] | None = None
    noise_sigma: float = 0.0  # 3D 高斯噪声标准差

    def __post_init__(self):
        if not (0.0 <= self.outlier_ratio <= 1.0):
            raise ConfigurationError(f"outlier_ratio 必须在 [0, 1]: {self.outlier_ratio}")
        if self.n_points < 0:
            raise ConfigurationError(f"n_points 不能为负: {self.n_points}")
        if self.noise_px < 0 or self.noise_sigma < 0:
            raise ConfigurationError("噪声幅值不能为负")

    @property
    def n_outliers(self) -> int:
        return int(round(self.outlier_ratio * self.n_points))


@dataclass
class GroundTruth:
    """真值：角度参数、旋转矩阵、平移和内点掩码"""

    translation: np.ndarray
    inlier_mask: np.ndarray
    angles: dict[str, float] = field(default_factory=dict)
    rotation: np.ndarray | None = None


# ---------------------------------------------------------------------------
# 基准测试
# ---------------------------------------------------------------------------

PROBLEMS = ("resection1d", "planar2d", "reg3d-corr", "reg3d-corrless")
METHODS = ("plain", "acm")


@dataclass
class RunRecord:
    """一次 (问题, 方法, 扫描值, 试验) 的运行记录"""

    problem: str
    method: str
    sweep_value: float
    trial: int
    time_s: float = float("nan")
    iterations: int = 0
    cardinality: int = 0
    err_primary: float = float("nan")  # 角度误差（度）或相对平移误差
    err_secondary: float | None = None
    build_time_s: float = 0.0
    n_constraints: int = 0
    n_inlier_constraints: int = 0
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class MethodStats:
    """单一方法在某个扫描值下的聚合统计"""

    method: str
    n_runs: int = 0
    n_errors: int = 0
    mean_time: float | None = None
    median_time: float | None = None
    mean_iterations: float | None = None
    mean_cardinality: float | None = None
    mean_err_primary: float | None = None
    mean_err_secondary: float | None = None


@dataclass
class SummaryRow:
    """某个 (问题, 扫描值) 的汇总"""

    problem: str
    sweep_value: float
    methods: dict[str, MethodStats] = field(default_factory=dict)
    speedup: float | None = None  # time(plain) / time(acm)


@dataclass
class Summary:
    """基准测试汇总"""

    rows: list[SummaryRow] = field(default_factory=list)
    schema_version: int = 1
