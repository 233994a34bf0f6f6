"""
一维相机定位（偏航角）求解
IMU 给出俯仰/横滚后，用平移不变量约束求偏航角 α：
ACM-0 一次区间穿刺直接求全局最优，平凡 BnB 在 [-π, π] 上分支
"""

import math

import numpy as np
from scipy.spatial.transform import Rotation

from ..core.engine import angular_cube, solve
from ..core.interval import cos_range, sinusoid_band, stab_bounds
from ..models.data_models import (
    Corr3D2D,
    Cube,
    ImuPrior,
    SolveReport,
    TimConstraint,
)
from ..utils.errors import ConfigurationError
from ..utils.log import logger
from .base_bounder import BaseBounder

DEFAULT_EPS = 0.2
DEGENERATE_TOL = 1e-12


def resection_rotation(alpha: float, prior: ImuPrior) -> np.ndarray:
    """R = Rz(α)·Ry(β)·Rx(γ)"""
    return Rotation.from_euler("ZYX", [alpha, prior.beta, prior.gamma]).as_matrix()


def imu_compensate(points: np.ndarray, prior: ImuPrior) -> np.ndarray:
    """把世界点旋到只差偏航角的坐标系：p' = Ry(β)·Rx(γ)·p"""
    return Rotation.from_euler("YX", [prior.beta, prior.gamma]).apply(
        np.atleast_2d(points)
    )


def _tim_coefficients(pi, pj, ui, uj, normalize: bool = True):
    """
    两组投影方程消去 (t1, t2, t3) 后的系数，支持按行批量计算

    u1·(p'z + t3) = cosα·p'x - sinα·p'y + t1
    u2·(p'z + t3) = sinα·p'x + cosα·p'y + t2
    两点相减消去 t1、t2，再交叉相乘消去 t3。
    normalize 为真时整体除以 √(d1²+d2²)，使 eps 对每个约束含义一致。
    """
    a = ui[..., 0] - uj[..., 0]
    b = ui[..., 1] - uj[..., 1]
    dx = pi[..., 0] - pj[..., 0]
    dy = pi[..., 1] - pj[..., 1]
    e1 = ui[..., 0] * pi[..., 2] - uj[..., 0] * pj[..., 2]
    e2 = ui[..., 1] * pi[..., 2] - uj[..., 1] * pj[..., 2]

    d1 = -(a * dx + b * dy)
    d2 = b * dx - a * dy
    d3 = a * e2 - b * e1
    amp = np.hypot(d1, d2)
    valid = (np.hypot(a, b) > DEGENERATE_TOL) & (amp > DEGENERATE_TOL)
    if normalize:
        scale = np.where(valid, amp, 1.0)
        d1, d2, d3 = d1 / scale, d2 / scale, d3 / scale
    return d1, d2, d3, valid


def build_tim(ci: Corr3D2D, cj: Corr3D2D, prior: ImuPrior, *, normalize: bool = True) -> TimConstraint:
    """由一对 3D-2D 对应点构造平移不变量约束"""
    pts = imu_compensate(np.vstack([ci.p, cj.p]), prior)
    d1, d2, d3, valid = _tim_coefficients(
        pts[0], pts[1], np.asarray(ci.u, dtype=float), np.asarray(cj.u, dtype=float), normalize
    )
    return TimConstraint(float(d1), float(d2), float(d3), valid=bool(valid))


def build_tim_constraints(
    corrs: list[Corr3D2D], prior: ImuPrior, *, drop_invalid: bool = True, normalize: bool = True
) -> list[TimConstraint]:
    """
    相邻配对 (i, i+1) 构造约束，M 个对应点得到 M-1 个约束

    Args:
        corrs: 对应点列表
        prior: IMU 先验
        drop_invalid: 是否丢弃退化约束
        normalize: 是否把 (d1, d2) 归一化为单位幅值
    """
    if len(corrs) < 2:
        return []
    points = imu_compensate(np.array([c.p for c in corrs], dtype=float), prior)
    image = np.array([c.u for c in corrs], dtype=float)
    d1, d2, d3, valid = _tim_coefficients(
        points[:-1], points[1:], image[:-1], image[1:], normalize
    )

    constraints = [
        TimConstraint(float(d1[k]), float(d2[k]), float(d3[k]), i=k, j=k + 1, valid=bool(valid[k]))
        for k in range(len(corrs) - 1)
    ]
    n_invalid = int((~valid).sum())
    if n_invalid:
        logger.warning(f"[resection1d] {n_invalid} 个退化点对约束被标记为无效")
    if drop_invalid:
        constraints = [c for c in constraints if c.valid]
    return constraints


def tim_arrays(constraints: list[TimConstraint]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    usable = [c for c in constraints if c.valid]
    d1 = np.array([c.d1 for c in usable], dtype=float)
    d2 = np.array([c.d2 for c in usable], dtype=float)
    d3 = np.array([c.d3 for c in usable], dtype=float)
    return d1, d2, d3


def tim_residuals(constraints: list[TimConstraint], alpha: float) -> np.ndarray:
    """|d1·sinα + d2·cosα + d3|"""
    d1, d2, d3 = tim_arrays(constraints)
    return np.abs(d1 * math.sin(alpha) + d2 * math.cos(alpha) + d3)


def solve_acm0(constraints: list[TimConstraint], eps: float = DEFAULT_EPS) -> tuple[float, int]:
    """
    ACM-0：每个约束反解出 α 的区间集合，一次穿刺得到全局最优

    Returns:
        (alpha, count)，约束为空时 count 为 0、alpha 为 0
    """
    if not eps > 0:
        raise ConfigurationError(f"eps 必须为正数: {eps}")
    d1, d2, d3 = tim_arrays(constraints)
    if d1.size == 0:
        return 0.0, 0
    starts, ends = sinusoid_band(d1, d2, d3, -eps, eps)
    result = stab_bounds(starts, ends)
    return result.stabber, result.count


class Plain1DBounder(BaseBounder):
    """平凡 1D BnB 的上下界：下界取中心点，上界用 cos 在子弧上的精确值域"""

    n_branch = 1

    def __init__(self, constraints: list[TimConstraint], eps: float = DEFAULT_EPS):
        super().__init__(eps)
        d1, d2, d3 = tim_arrays(constraints)
        self.d1, self.d2, self.d3 = d1, d2, d3
        # d1·sinα + d2·cosα = amp·cos(α - phase)
        self.amp = np.hypot(d1, d2)
        self.phase = np.arctan2(d1, d2)

    @property
    def n_samples(self) -> int:
        return int(self.d1.size)

    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        alpha = float(cube.center[0])
        values = self.d1 * math.sin(alpha) + self.d2 * math.cos(alpha) + self.d3
        return int(np.count_nonzero(np.abs(values) <= self.eps)), np.array([alpha])

    def upper(self, cube: Cube) -> int:
        c_lo, c_hi = cos_range(cube.lo[0] - self.phase, cube.hi[0] - self.phase)
        d_lo = self.amp * c_lo + self.d3
        d_hi = self.amp * c_hi + self.d3
        return int(np.count_nonzero((d_lo <= self.eps) & (d_hi >= -self.eps)))


def solve_plain1d(
    constraints: list[TimConstraint],
    eps: float = DEFAULT_EPS,
    max_depth: int = 10,
    *,
    initial: Cube | None = None,
    record_trace: bool = False,
) -> SolveReport:
    """平凡 1D BnB，默认搜索区间 [-π, π]"""
    bounder = Plain1DBounder(constraints, eps)
    return solve(bounder, initial or angular_cube(), max_depth, record_trace=record_trace)
