"""
三维点集配准的平移搜索
残差只依赖平移：h(t) = | ||q|| - ||p + t|| |
有对应版本逐点计数；无对应版本使用旋转不变点对（RI pair）的 ∞-范数约束
ACM-2 在 (t1, t2) 上分支并对 t3 做区间穿刺；平凡 BnB 在 (t1, t2, t3) 上分支
"""

import math
from collections import defaultdict

import numpy as np
from scipy.spatial.distance import pdist

from ..core.engine import solve
from ..core.interval import (
    clip_bounds,
    intersect_bounds,
    sq_bounds,
    square_band,
    stab_bounds,
    union_bounds,
)
from ..models.data_models import Corr3D3D, Cube, RiPair, SolveReport
from ..utils.errors import ConfigurationError
from ..utils.log import logger
from .base_bounder import BaseBounder

DEFAULT_EPS_CORR = 0.3
DEFAULT_EPS_CORRLESS = 1e-3
DEFAULT_KEEP = 1000

# ---------------------------------------------------------------------------
# 残差与初始盒
# ---------------------------------------------------------------------------


def corr_arrays(corrs: list[Corr3D3D]) -> tuple[np.ndarray, np.ndarray]:
    if not corrs:
        return np.zeros((0, 3)), np.zeros((0, 3))
    p = np.array([c.p for c in corrs], dtype=float)
    q = np.array([c.q for c in corrs], dtype=float)
    return p, q


def corr_residuals(corrs: list[Corr3D3D], t) -> np.ndarray:
    p, q = corr_arrays(corrs)
    t = np.asarray(t, dtype=float)
    return np.abs(np.linalg.norm(q, axis=1) - np.linalg.norm(p + t, axis=1))


def ri_pair_arrays(pairs: list[RiPair]) -> tuple[np.ndarray, ...]:
    if not pairs:
        empty = np.zeros((0, 3))
        return empty, empty, empty, empty
    return tuple(
        np.array([getattr(pair, name) for pair in pairs], dtype=float)
        for name in ("p1", "p2", "q1", "q2")
    )


def ri_pair_residuals(pairs: list[RiPair], t) -> np.ndarray:
    """每个 RI pair 两个子残差的 ∞-范数"""
    p1, p2, q1, q2 = ri_pair_arrays(pairs)
    t = np.asarray(t, dtype=float)
    r1 = np.abs(np.linalg.norm(p1 + t, axis=1) - np.linalg.norm(q1, axis=1))
    r2 = np.abs(np.linalg.norm(p2 + t, axis=1) - np.linalg.norm(q2, axis=1))
    return np.maximum(r1, r2)


def score_unique_matches(pairs: list[RiPair], t, eps: float) -> int:
    """
    每个 Q 中线段只计一次的目标：只要它的候选匹配中有一个满足约束就计 1
    """
    satisfied = ri_pair_residuals(pairs, t) <= eps
    groups: dict[tuple[int, int], bool] = defaultdict(bool)
    for pair, ok in zip(pairs, satisfied):
        groups[tuple(sorted(pair.q_index))] |= bool(ok)
    return sum(groups.values())


def default_translation_box(P: np.ndarray, Q: np.ndarray, eps: float) -> Cube:
    """逐分量 [min(q) - max(p), max(q) - min(p)]，两侧各放宽 eps"""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    lo = Q.min(axis=0) - P.max(axis=0) - eps
    hi = Q.max(axis=0) - P.min(axis=0) + eps
    return Cube(lo, hi)


def branch_box(box: Cube) -> Cube:
    """ACM 的分支空间：取前两维"""
    return Cube(box.lo[:2], box.hi[:2])


# ---------------------------------------------------------------------------
# RI pair 构造
# ---------------------------------------------------------------------------


def _longest_pairs(points: np.ndarray, keep: int) -> tuple[np.ndarray, np.ndarray]:
    """返回距离最大的 keep 个点对下标 (K, 2) 及其长度"""
    n = points.shape[0]
    lengths = pdist(points)
    rows, cols = np.triu_indices(n, k=1)
    if keep < lengths.size:
        chosen = np.argpartition(-lengths, keep - 1)[:keep]
    else:
        chosen = np.arange(lengths.size)
    chosen = chosen[np.argsort(-lengths[chosen], kind="stable")]
    return np.stack([rows[chosen], cols[chosen]], axis=1), lengths[chosen]


def build_ri_pairs(
    P: np.ndarray, Q: np.ndarray, tau: float, keep: int = DEFAULT_KEEP
) -> list[RiPair]:
    """
    构造旋转不变点对匹配

    每个点集各取距离最大的 keep 个点对，长度差不超过 tau 的 (Q 线段, P 线段)
    组合都保留。线段无方向，两种端点对应方式分别输出。
    """
    if not tau > 0:
        raise ConfigurationError(f"tau 必须为正数: {tau}")
    if keep < 1:
        raise ConfigurationError(f"keep 必须 ≥ 1: {keep}")
    P = np.atleast_2d(np.asarray(P, dtype=float))
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    if P.shape[0] < 2 or Q.shape[0] < 2:
        return []

    p_idx, p_len = _longest_pairs(P, keep)
    q_idx, q_len = _longest_pairs(Q, keep)

    order = np.argsort(p_len, kind="stable")
    sorted_len = p_len[order]
    left = np.searchsorted(sorted_len, q_len - tau, side="left")
    right = np.searchsorted(sorted_len, q_len + tau, side="right")

    pairs: list[RiPair] = []
    for m in range(q_idx.shape[0]):
        qa, qb = q_idx[m]
        for n in order[left[m] : right[m]]:
            if abs(q_len[m] - p_len[n]) > tau:
                continue
            pa, pb = p_idx[n]
            pairs.append(RiPair(P[pa], P[pb], Q[qa], Q[qb], (int(pa), int(pb)), (int(qa), int(qb))))
            pairs.append(RiPair(P[pb], P[pa], Q[qa], Q[qb], (int(pb), int(pa)), (int(qa), int(qb))))
    logger.debug(f"[reg3d] RI pair: {len(pairs)} 个匹配 (keep={keep}, tau={tau:g})")
    return pairs


# ---------------------------------------------------------------------------
# 有对应
# ---------------------------------------------------------------------------


class _RingTerms:
    """||p + t|| 落在半径环 [max(0, ||q||-eps), ||q||+eps] 内"""

    def __init__(self, p: np.ndarray, q_norm: np.ndarray, eps: float):
        self.p = p
        self.q_norm = q_norm
        self.ring_lo = np.maximum(0.0, q_norm - eps) ** 2
        self.ring_hi = (q_norm + eps) ** 2

    def h1_point(self, t1: float, t2: float) -> np.ndarray:
        return (self.p[:, 0] + t1) ** 2 + (self.p[:, 1] + t2) ** 2

    def h1_box(self, cube: Cube):
        x_lo, x_hi = sq_bounds(self.p[:, 0] + cube.lo[0], self.p[:, 0] + cube.hi[0])
        y_lo, y_hi = sq_bounds(self.p[:, 1] + cube.lo[1], self.p[:, 1] + cube.hi[1])
        return x_lo + y_lo, x_hi + y_hi

    def t3_sets_point(self, t1: float, t2: float):
        """(t1, t2) 固定时每个点的 t3 解集"""
        h1 = self.h1_point(t1, t2)
        return square_band(self.ring_lo - h1, self.ring_hi - h1, self.p[:, 2])

    def t3_sets_box(self, cube: Cube):
        """(t1, t2) 在盒内变化时 t3 解集的松弛"""
        h1_lo, h1_hi = self.h1_box(cube)
        return square_band(self.ring_lo - h1_hi, self.ring_hi - h1_lo, self.p[:, 2])


class Plain3DCorrBounder(BaseBounder):
    """平凡 3D BnB（有对应）"""

    n_branch = 3

    def __init__(self, corrs: list[Corr3D3D], eps: float = DEFAULT_EPS_CORR):
        super().__init__(eps)
        self.p, q = corr_arrays(corrs)
        self.q_norm = np.linalg.norm(q, axis=1)

    @property
    def n_samples(self) -> int:
        return int(self.p.shape[0])

    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        t = cube.center
        h = np.abs(self.q_norm - np.linalg.norm(self.p + t, axis=1))
        return int(np.count_nonzero(h <= self.eps)), t

    def upper(self, cube: Cube) -> int:
        r = cube.half_diameter
        center_norm = np.linalg.norm(self.p + cube.center, axis=1)
        # ||p+t|| ∈ [c - r, c + r]，h 的下界是 ||q|| 到该区间的距离
        h_lo = np.maximum.reduce(
            [np.zeros_like(center_norm), center_norm - r - self.q_norm, self.q_norm - center_norm - r]
        )
        return int(np.count_nonzero(h_lo <= self.eps))


class Acm2CorrBounder(BaseBounder):
    """ACM-2（有对应）：在 (t1, t2) 上分支，t3 由区间穿刺精确求解"""

    n_branch = 2

    def __init__(
        self,
        corrs: list[Corr3D3D],
        eps: float = DEFAULT_EPS_CORR,
        t3_range: tuple[float, float] | None = None,
    ):
        super().__init__(eps)
        p, q = corr_arrays(corrs)
        self.ring = _RingTerms(p, np.linalg.norm(q, axis=1), self.eps)
        self.t3_range = t3_range

    @property
    def n_samples(self) -> int:
        return int(self.ring.p.shape[0])

    def _stab(self, starts, ends):
        if self.t3_range is not None:
            starts, ends = clip_bounds(starts, ends, *self.t3_range)
        return stab_bounds(starts, ends)

    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        t1, t2 = cube.center
        result = self._stab(*self.ring.t3_sets_point(t1, t2))
        t3 = result.stabber if result.count else 0.0
        return result.count, np.array([t1, t2, t3])

    def upper(self, cube: Cube) -> int:
        return self._stab(*self.ring.t3_sets_box(cube)).count


# ---------------------------------------------------------------------------
# 无对应
# ---------------------------------------------------------------------------


class Plain3DCorrlessBounder(BaseBounder):
    """
    平凡 3D BnB（无对应）

    c_u = ||p_u + t_c|| - ||q_u||，盒内 ||p_u + t|| 至多偏离 r，
    因此子残差下界为 c_u^l = max(0, |c_u| - r)。
    """

    n_branch = 3

    def __init__(self, pairs: list[RiPair], eps: float = DEFAULT_EPS_CORRLESS):
        super().__init__(eps)
        self.p1, self.p2, q1, q2 = ri_pair_arrays(pairs)
        self.q1_norm = np.linalg.norm(q1, axis=1)
        self.q2_norm = np.linalg.norm(q2, axis=1)

    @property
    def n_samples(self) -> int:
        return int(self.p1.shape[0])

    def _centers(self, t):
        c_u = np.linalg.norm(self.p1 + t, axis=1) - self.q1_norm
        c_v = np.linalg.norm(self.p2 + t, axis=1) - self.q2_norm
        return c_u, c_v

    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        t = cube.center
        c_u, c_v = self._centers(t)
        ok = np.maximum(np.abs(c_u), np.abs(c_v)) <= self.eps
        return int(np.count_nonzero(ok)), t

    def upper(self, cube: Cube) -> int:
        r = cube.half_diameter
        c_u, c_v = self._centers(cube.center)
        c_u_lo = np.maximum(0.0, np.abs(c_u) - r)
        c_v_lo = np.maximum(0.0, np.abs(c_v) - r)
        return int(np.count_nonzero(np.maximum(c_u_lo, c_v_lo) <= self.eps))


class Acm2CorrlessBounder(BaseBounder):
    """
    ACM-2（无对应）

    每个 RI pair 的两个子约束各自反解出 t3 集合；∞-范数要求两者同时成立，
    所以默认取交集。union_mode=True 时取并集，用于对比实验。
    """

    n_branch = 2

    def __init__(
        self,
        pairs: list[RiPair],
        eps: float = DEFAULT_EPS_CORRLESS,
        *,
        union_mode: bool = False,
        t3_range: tuple[float, float] | None = None,
    ):
        super().__init__(eps)
        p1, p2, q1, q2 = ri_pair_arrays(pairs)
        self.sub_u = _RingTerms(p1, np.linalg.norm(q1, axis=1), eps)
        self.sub_v = _RingTerms(p2, np.linalg.norm(q2, axis=1), eps)
        self.union_mode = union_mode
        self.t3_range = t3_range

    @property
    def n_samples(self) -> int:
        return int(self.sub_u.p.shape[0])

    def _combine_and_stab(self, sets_u, sets_v):
        if self.n_samples == 0:
            return stab_bounds([], [])
        combine = union_bounds if self.union_mode else intersect_bounds
        starts, ends = combine(*sets_u, *sets_v)
        if self.t3_range is not None:
            starts, ends = clip_bounds(starts, ends, *self.t3_range)
        return stab_bounds(starts, ends)

    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        t1, t2 = cube.center
        result = self._combine_and_stab(
            self.sub_u.t3_sets_point(t1, t2), self.sub_v.t3_sets_point(t1, t2)
        )
        t3 = result.stabber if result.count else 0.0
        return result.count, np.array([t1, t2, t3])

    def upper(self, cube: Cube) -> int:
        result = self._combine_and_stab(
            self.sub_u.t3_sets_box(cube), self.sub_v.t3_sets_box(cube)
        )
        return result.count


# ---------------------------------------------------------------------------
# 构造与求解入口
# ---------------------------------------------------------------------------


def bounds_plain3d_corr(corrs, eps=DEFAULT_EPS_CORR) -> Plain3DCorrBounder:
    return Plain3DCorrBounder(corrs, eps)


def bounds_acm2_corr(corrs, eps=DEFAULT_EPS_CORR, t3_range=None) -> Acm2CorrBounder:
    return Acm2CorrBounder(corrs, eps, t3_range)


def bounds_plain3d_corrless(pairs, eps=DEFAULT_EPS_CORRLESS) -> Plain3DCorrlessBounder:
    return Plain3DCorrlessBounder(pairs, eps)


def bounds_acm2_corrless(
    pairs, eps=DEFAULT_EPS_CORRLESS, *, union_mode=False, t3_range=None
) -> Acm2CorrlessBounder:
    return Acm2CorrlessBounder(pairs, eps, union_mode=union_mode, t3_range=t3_range)


def _t3_range(box: Cube, restrict: bool):
    return (float(box.lo[2]), float(box.hi[2])) if restrict else None


def solve_reg3d_corr(
    corrs: list[Corr3D3D],
    method: str,
    eps: float = DEFAULT_EPS_CORR,
    max_depth: int = 10,
    *,
    box: Cube | None = None,
    restrict_t3: bool = True,
    record_trace: bool = False,
) -> SolveReport:
    """
    有对应平移搜索

    Args:
        method: "plain" 或 "acm"
        box: 三维初始平移盒，默认由数据范围推出
        restrict_t3: ACM 的 t3 是否限制在 box 的第三维内
    """
    p, q = corr_arrays(corrs)
    if box is None:
        box = default_translation_box(p, q, eps) if len(corrs) else Cube(-np.ones(3), np.ones(3))
    if method == "plain":
        return solve(bounds_plain3d_corr(corrs, eps), box, max_depth, record_trace=record_trace)
    if method == "acm":
        bounder = bounds_acm2_corr(corrs, eps, _t3_range(box, restrict_t3))
        return solve(bounder, branch_box(box), max_depth, record_trace=record_trace)
    raise ConfigurationError(f"未知方法: {method}")


def solve_reg3d_corrless(
    pairs: list[RiPair],
    method: str,
    box: Cube,
    eps: float = DEFAULT_EPS_CORRLESS,
    max_depth: int = 10,
    *,
    union_mode: bool = False,
    restrict_t3: bool = True,
    record_trace: bool = False,
) -> SolveReport:
    """无对应平移搜索，box 为三维初始平移盒"""
    if method == "plain":
        return solve(bounds_plain3d_corrless(pairs, eps), box, max_depth, record_trace=record_trace)
    if method == "acm":
        bounder = bounds_acm2_corrless(
            pairs, eps, union_mode=union_mode, t3_range=_t3_range(box, restrict_t3)
        )
        return solve(bounder, branch_box(box), max_depth, record_trace=record_trace)
    raise ConfigurationError(f"未知方法: {method}")


def relative_translation_error(t_hat, t_gt) -> float:
    t_hat = np.asarray(t_hat, dtype=float)
    t_gt = np.asarray(t_gt, dtype=float)
    norm = float(np.linalg.norm(t_gt))
    diff = float(np.linalg.norm(t_hat - t_gt))
    return diff / norm if norm > 0 else diff


def translation_leaf_size(box: Cube, max_depth: int) -> float:
    return box.diameter / 2.0**max_depth if box.n else math.nan
