"""
平面运动相对位姿求解
对极约束整理为 g(θ1, θ2) = A1·sin(θ1+φ1) + A2·sin(θ2+φ2)，其中 θ1 = θ-φ，θ2 = φ
ACM-1 在 θ1 上分支并对 θ2 做区间穿刺；平凡 BnB 在 (θ1, θ2) 上分支
"""

import math

import numpy as np

from ..core.engine import solve
from ..core.interval import clip_bounds, sin_range, sinusoid_band, stab_bounds
from ..models.data_models import Corr2D2D, Cube, PlanarConstraint, SolveReport
from .base_bounder import BaseBounder

DEFAULT_EPS = 0.02
THETA1_RANGE = (-0.5 * math.pi, 0.5 * math.pi)
THETA2_RANGE = (-math.pi, math.pi)


def _amplitude_phase(a, b):
    """a·sin x + b·cos x = √(a²+b²)·sin(x + atan2(b, a))"""
    return np.hypot(a, b), np.arctan2(b, a)


def planar_arrays(corrs: list[Corr2D2D]) -> tuple[np.ndarray, ...]:
    """批量计算 (A1, φ1, A2, φ2)"""
    if not corrs:
        empty = np.zeros(0)
        return empty, empty, empty, empty
    x1 = np.array([c.x1 for c in corrs], dtype=float)
    x2 = np.array([c.x2 for c in corrs], dtype=float)
    u1, v1 = x1[:, 0], x1[:, 1]
    u2, v2 = x2[:, 0], x2[:, 1]
    # -u2·v1·cosθ1 - v1·sinθ1
    A1, phi1 = _amplitude_phase(-v1, -u2 * v1)
    # u1·v2·cosθ2 - v2·sinθ2
    A2, phi2 = _amplitude_phase(-v2, u1 * v2)
    return A1, phi1, A2, phi2


def build_planar(c: Corr2D2D) -> PlanarConstraint:
    A1, phi1, A2, phi2 = planar_arrays([c])
    return PlanarConstraint(float(A1[0]), float(phi1[0]), float(A2[0]), float(phi2[0]))


def build_planar_constraints(corrs: list[Corr2D2D]) -> list[PlanarConstraint]:
    A1, phi1, A2, phi2 = planar_arrays(corrs)
    return [
        PlanarConstraint(float(a1), float(p1), float(a2), float(p2))
        for a1, p1, a2, p2 in zip(A1, phi1, A2, phi2)
    ]


def planar_residuals(constraints: list[PlanarConstraint], theta1: float, theta2: float) -> np.ndarray:
    """|g(θ1, θ2)|，逐约束"""
    A1, phi1, A2, phi2 = (
        np.array([getattr(c, name) for c in constraints], dtype=float)
        for name in ("A1", "phi1", "A2", "phi2")
    )
    return np.abs(A1 * np.sin(theta1 + phi1) + A2 * np.sin(theta2 + phi2))


def epipolar_residual(c: Corr2D2D, theta: float, phi: float) -> float:
    """对极约束左端的直接形式"""
    u1, v1 = c.x1
    u2, v2 = c.x2
    return (
        u1 * v2 * math.cos(phi)
        - v2 * math.sin(phi)
        - u2 * v1 * math.cos(theta - phi)
        - v1 * math.sin(theta - phi)
    )


class _PlanarBase(BaseBounder):
    def __init__(self, constraints: list[PlanarConstraint], eps: float = DEFAULT_EPS):
        super().__init__(eps)
        self.A1 = np.array([c.A1 for c in constraints], dtype=float)
        self.phi1 = np.array([c.phi1 for c in constraints], dtype=float)
        self.A2 = np.array([c.A2 for c in constraints], dtype=float)
        self.phi2 = np.array([c.phi2 for c in constraints], dtype=float)

    @property
    def n_samples(self) -> int:
        return int(self.A1.size)

    def residuals(self, theta1: float, theta2: float) -> np.ndarray:
        return np.abs(
            self.A1 * np.sin(theta1 + self.phi1) + self.A2 * np.sin(theta2 + self.phi2)
        )

    def count(self, theta1: float, theta2: float) -> int:
        return int(np.count_nonzero(self.residuals(theta1, theta2) <= self.eps))

    def _term1_range(self, lo: float, hi: float):
        s_lo, s_hi = sin_range(lo + self.phi1, hi + self.phi1)
        return self.A1 * s_lo, self.A1 * s_hi


class Plain2DBounder(_PlanarBase):
    """平凡 2D BnB：两个正弦项分别在子弧上取精确值域再做区间加法"""

    n_branch = 2

    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        theta1, theta2 = cube.center
        return self.count(theta1, theta2), np.array([theta1, theta2])

    def upper(self, cube: Cube) -> int:
        k_lo, k_hi = self._term1_range(cube.lo[0], cube.hi[0])
        s_lo, s_hi = sin_range(cube.lo[1] + self.phi2, cube.hi[1] + self.phi2)
        g_lo = k_lo + self.A2 * s_lo
        g_hi = k_hi + self.A2 * s_hi
        return int(np.count_nonzero((g_lo <= self.eps) & (g_hi >= -self.eps)))


class Acm1Bounder(_PlanarBase):
    """
    ACM-1：在 θ1 上分支，θ2 由区间穿刺精确求解

    A2·sin(θ2+φ2) = (A2·cosφ2)·sinθ2 + (A2·sinφ2)·cosθ2
    """

    n_branch = 1

    def __init__(
        self,
        constraints: list[PlanarConstraint],
        eps: float = DEFAULT_EPS,
        theta2_range: tuple[float, float] = THETA2_RANGE,
    ):
        super().__init__(constraints, eps)
        self.theta2_range = theta2_range
        self.s_coef = self.A2 * np.cos(self.phi2)
        self.c_coef = self.A2 * np.sin(self.phi2)

    def _stab(self, lo_bound, hi_bound) -> tuple[float, int]:
        if self.n_samples == 0:
            return 0.0, 0
        starts, ends = sinusoid_band(self.s_coef, self.c_coef, 0.0, lo_bound, hi_bound)
        if self.theta2_range != THETA2_RANGE:
            starts, ends = clip_bounds(starts, ends, *self.theta2_range)
        result = stab_bounds(starts, ends)
        stabber = result.stabber if result.count else 0.0
        return stabber, result.count

    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        theta1 = float(cube.center[0])
        k = self.A1 * np.sin(theta1 + self.phi1)
        theta2, count = self._stab(-self.eps - k, self.eps - k)
        return count, np.array([theta1, theta2])

    def upper(self, cube: Cube) -> int:
        k_lo, k_hi = self._term1_range(cube.lo[0], cube.hi[0])
        _, count = self._stab(-self.eps - k_hi, self.eps - k_lo)
        return count


def plain2d_cube(
    theta1_range: tuple[float, float] = THETA1_RANGE,
    theta2_range: tuple[float, float] = THETA2_RANGE,
) -> Cube:
    return Cube(
        np.array([theta1_range[0], theta2_range[0]]),
        np.array([theta1_range[1], theta2_range[1]]),
    )


def acm1_cube(theta1_range: tuple[float, float] = THETA1_RANGE) -> Cube:
    return Cube(np.array([theta1_range[0]]), np.array([theta1_range[1]]))


def bounds_plain2d(constraints: list[PlanarConstraint], eps: float = DEFAULT_EPS) -> Plain2DBounder:
    return Plain2DBounder(constraints, eps)


def bounds_acm1(
    constraints: list[PlanarConstraint],
    eps: float = DEFAULT_EPS,
    theta2_range: tuple[float, float] = THETA2_RANGE,
) -> Acm1Bounder:
    return Acm1Bounder(constraints, eps, theta2_range)


def solve_plain2d(
    constraints: list[PlanarConstraint],
    eps: float = DEFAULT_EPS,
    max_depth: int = 10,
    *,
    theta1_range: tuple[float, float] = THETA1_RANGE,
    theta2_range: tuple[float, float] = THETA2_RANGE,
    record_trace: bool = False,
) -> SolveReport:
    return solve(
        bounds_plain2d(constraints, eps),
        plain2d_cube(theta1_range, theta2_range),
        max_depth,
        record_trace=record_trace,
    )


def solve_acm1(
    constraints: list[PlanarConstraint],
    eps: float = DEFAULT_EPS,
    max_depth: int = 10,
    *,
    theta1_range: tuple[float, float] = THETA1_RANGE,
    theta2_range: tuple[float, float] = THETA2_RANGE,
    record_trace: bool = False,
) -> SolveReport:
    return solve(
        bounds_acm1(constraints, eps, theta2_range),
        acm1_cube(theta1_range),
        max_depth,
        record_trace=record_trace,
    )


def to_pose(param: np.ndarray) -> tuple[float, float]:
    """(θ1, θ2) → (θ, φ)"""
    theta1, theta2 = float(param[0]), float(param[1])
    return theta1 + theta2, theta2
