"""
区间运算模块
负责区间算术、区间穿刺以及正弦型/二次型约束到区间集合的闭式反解

标量接口操作 Interval / IntervalSet；以 *_bounds / *_band 结尾的函数是
向量化版本，输入输出都是 numpy 数组，缺失的区间片段用 NaN 表示。
"""

import math
from collections.abc import Iterable, Sequence

import numpy as np

from ..models.data_models import Interval, IntervalSet, StabResult
from ..utils.errors import IntervalDomainError

TWO_PI = 2.0 * math.pi

# ---------------------------------------------------------------------------
# 区间算术
# ---------------------------------------------------------------------------


def mul_bounds(a, b, c, d):
    """[a, b]·[c, d] 的端点，支持数组"""
    products = np.stack(np.broadcast_arrays(a * c, a * d, b * c, b * d))
    return products.min(axis=0), products.max(axis=0)


def sq_bounds(lo, hi):
    """{x² : x ∈ [lo, hi]} 的最紧包络，支持数组"""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo2, hi2 = lo * lo, hi * hi
    upper = np.maximum(lo2, hi2)
    lower = np.where((lo <= 0.0) & (hi >= 0.0), 0.0, np.minimum(lo2, hi2))
    return lower, upper


def interval_add(x: Interval, y: Interval) -> Interval:
    return Interval(x.lo + y.lo, x.hi + y.hi)


def interval_sub(x: Interval, y: Interval) -> Interval:
    return Interval(x.lo - y.hi, x.hi - y.lo)


def interval_mul(x: Interval, y: Interval) -> Interval:
    lo, hi = mul_bounds(x.lo, x.hi, y.lo, y.hi)
    return Interval(float(lo), float(hi))


def interval_div(x: Interval, y: Interval) -> Interval:
    """X / Y，要求 Y 严格为正"""
    if y.lo <= 0.0:
        raise IntervalDomainError(f"除数区间必须严格为正: [{y.lo}, {y.hi}]")
    return Interval(min(x.lo / y.lo, x.lo / y.hi), max(x.hi / y.lo, x.hi / y.hi))


def interval_min(x: Interval, y: Interval) -> Interval:
    return Interval(min(x.lo, y.lo), min(x.hi, y.hi))


def interval_max(x: Interval, y: Interval) -> Interval:
    return Interval(max(x.lo, y.lo), max(x.hi, y.hi))


def interval_sq(x: Interval) -> Interval:
    lo, hi = sq_bounds(x.lo, x.hi)
    return Interval(float(lo), float(hi))


# ---------------------------------------------------------------------------
# 三角函数的区间映射
# ---------------------------------------------------------------------------


def cos_range(lo, hi):
    """
    cos 在子弧 [lo, hi] 上的精确值域

    端点值取 min/max，若弧内包含 2kπ 则上界为 1，包含 π+2kπ 则下界为 -1。
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    c_lo, c_hi = np.cos(lo), np.cos(hi)
    vmin = np.minimum(c_lo, c_hi)
    vmax = np.maximum(c_lo, c_hi)
    has_peak = np.floor(hi / TWO_PI) >= np.ceil(lo / TWO_PI)
    has_trough = np.floor((hi - math.pi) / TWO_PI) >= np.ceil((lo - math.pi) / TWO_PI)
    return np.where(has_trough, -1.0, vmin), np.where(has_peak, 1.0, vmax)


def sin_range(lo, hi):
    """sin 在子弧 [lo, hi] 上的精确值域"""
    half_pi = 0.5 * math.pi
    return cos_range(np.asarray(lo, dtype=float) - half_pi, np.asarray(hi, dtype=float) - half_pi)


# ---------------------------------------------------------------------------
# 区间穿刺
# ---------------------------------------------------------------------------


def stab_bounds(starts, ends) -> StabResult:
    """
    对端点数组做排序扫描，返回被最多区间覆盖的点

    同一坐标处左端点先于右端点处理，因此在一点相接的闭区间都会被计入。
    NaN 或 lo > hi 的项被忽略。
    """
    starts = np.asarray(starts, dtype=float).ravel()
    ends = np.asarray(ends, dtype=float).ravel()
    valid = ~(np.isnan(starts) | np.isnan(ends)) & (starts <= ends)
    starts, ends = starts[valid], ends[valid]
    if starts.size == 0:
        return StabResult(stabber=math.nan, count=0)

    coords = np.concatenate([starts, ends])
    kinds = np.concatenate(
        [np.zeros(starts.size, dtype=np.int8), np.ones(ends.size, dtype=np.int8)]
    )
    order = np.lexsort((kinds, coords))
    deltas = np.where(kinds[order] == 0, 1, -1)
    running = np.cumsum(deltas)
    best = int(np.argmax(running))
    return StabResult(stabber=float(coords[order][best]), count=int(running[best]))


def stab(intervals: Sequence[Interval]) -> StabResult:
    """Interval 列表上的区间穿刺，O(L log L)"""
    if not intervals:
        return StabResult(stabber=math.nan, count=0)
    starts = np.fromiter((iv.lo for iv in intervals), dtype=float, count=len(intervals))
    ends = np.fromiter((iv.hi for iv in intervals), dtype=float, count=len(intervals))
    return stab_bounds(starts, ends)


def stab_sets(sets: Iterable[IntervalSet]) -> StabResult:
    """
    IntervalSet 列表上的区间穿刺

    同一集合的各片段互不相交且不相接，所以每个集合最多贡献 1。
    """
    flattened = [iv for interval_set in sets for iv in interval_set]
    return stab(flattened)


# ---------------------------------------------------------------------------
# 约束反解
# ---------------------------------------------------------------------------


def _arc_to_line(start, length):
    """把圆弧 (start, length) 展开到 [-π, π] 上，最多两段"""
    s = np.mod(start + math.pi, TWO_PI) - math.pi
    e = s + length
    wraps = e > math.pi
    first = (s, np.where(wraps, math.pi, e))
    second = (
        np.where(wraps, -math.pi, np.nan),
        np.where(wraps, e - TWO_PI, np.nan),
    )
    return first, second


def sinusoid_band(a1, a2, a3, lo, hi):
    """
    向量化求解 lo ≤ a1·sinα + a2·cosα + a3 ≤ hi，α ∈ [-π, π]

    余弦形式：a1·sinα + a2·cosα = R·cos(α - β)，β = atan2(a1, a2)。
    解集是以 β 为中心、|α - β| ∈ [c3, c4] 的至多两段圆弧，再展开到直线上。

    Returns:
        (starts, ends)，形状 (M, 4)，缺失片段为 NaN
    """
    a1, a2, a3, lo, hi = (
        np.atleast_1d(np.asarray(v, dtype=float))
        for v in np.broadcast_arrays(a1, a2, a3, lo, hi)
    )
    m = a1.shape[0]
    starts = np.full((m, 4), np.nan)
    ends = np.full((m, 4), np.nan)

    amp = np.hypot(a1, a2)
    degenerate = amp == 0.0
    safe_amp = np.where(degenerate, 1.0, amp)
    x_lo = (lo - a3) / safe_amp
    x_hi = (hi - a3) / safe_amp

    empty = (x_lo > 1.0) | (x_hi < -1.0) | (lo > hi)
    top_open = x_hi >= 1.0  # c3 = 0
    bottom_open = x_lo <= -1.0  # c4 = π
    c3 = np.where(top_open, 0.0, np.arccos(np.clip(x_hi, -1.0, 1.0)))
    c4 = np.where(bottom_open, math.pi, np.arccos(np.clip(x_lo, -1.0, 1.0)))
    beta = np.arctan2(a1, a2)

    full = top_open & bottom_open
    single_peak = top_open & ~bottom_open
    single_trough = bottom_open & ~top_open
    two_arcs = ~(top_open | bottom_open)

    arc1_start = np.select(
        [single_peak, single_trough, two_arcs], [beta - c4, beta + c3, beta - c4], np.nan
    )
    arc1_len = np.select(
        [single_peak, single_trough, two_arcs],
        [2.0 * c4, 2.0 * (math.pi - c3), c4 - c3],
        np.nan,
    )
    arc2_start = np.where(two_arcs, beta + c3, np.nan)
    arc2_len = np.where(two_arcs, c4 - c3, np.nan)

    for col, (arc_start, arc_len) in ((0, (arc1_start, arc1_len)), (2, (arc2_start, arc2_len))):
        (s1, e1), (s2, e2) = _arc_to_line(arc_start, arc_len)
        starts[:, col], ends[:, col] = s1, e1
        starts[:, col + 1], ends[:, col + 1] = s2, e2

    starts[full, 0], ends[full, 0] = -math.pi, math.pi
    starts[full, 1:], ends[full, 1:] = np.nan, np.nan

    # 振幅为 0 时约束退化为常数判断
    const_ok = degenerate & (lo <= a3) & (a3 <= hi)
    starts[degenerate], ends[degenerate] = np.nan, np.nan
    starts[const_ok, 0], ends[const_ok, 0] = -math.pi, math.pi

    dead = empty & ~degenerate
    starts[dead], ends[dead] = np.nan, np.nan
    return starts, ends


def solve_sinusoid_leq(a1: float, a2: float, a3: float, lo: float, hi: float) -> IntervalSet:
    """求解 lo ≤ a1·sinα + a2·cosα + a3 ≤ hi 在 [-π, π] 上的精确解集"""
    starts, ends = sinusoid_band(a1, a2, a3, lo, hi)
    return IntervalSet.from_bounds(zip(starts[0], ends[0]))


def solve_sinusoid_leq_sine(a1: float, a2: float, a3: float, lo: float, hi: float) -> IntervalSet:
    """
    正弦形式的同一反解，只用于交叉验证

    a1·sinα + a2·cosα = R·sin(α + β)，β = atan2(a2, a1)
    """
    amp = math.hypot(a1, a2)
    if amp == 0.0:
        return IntervalSet.full() if lo <= a3 <= hi else IntervalSet()
    x_lo, x_hi = (lo - a3) / amp, (hi - a3) / amp
    if x_lo > 1.0 or x_hi < -1.0 or lo > hi:
        return IntervalSet()
    c5 = math.asin(max(-1.0, min(1.0, x_lo)))
    c6 = math.asin(max(-1.0, min(1.0, x_hi)))
    beta = math.atan2(a2, a1)

    bounds = []
    for k in range(-2, 2):
        shift = TWO_PI * k - beta
        bounds.append((c5 + shift, c6 + shift))
        bounds.append((math.pi - c6 + shift, math.pi - c5 + shift))
    clipped = [
        (max(s, -math.pi), min(e, math.pi)) for s, e in bounds if e >= -math.pi and s <= math.pi
    ]
    return IntervalSet.from_bounds(clipped)


def square_band(lo, hi, shift):
    """
    向量化求解 lo ≤ (t + shift)² ≤ hi

    保留正负两支 ±[c3, c4] - shift；c3 = 0 时两支合并为一段。

    Returns:
        (starts, ends)，形状 (M, 2)，缺失片段为 NaN
    """
    lo, hi, shift = (
        np.atleast_1d(np.asarray(v, dtype=float)) for v in np.broadcast_arrays(lo, hi, shift)
    )
    m = lo.shape[0]
    starts = np.full((m, 2), np.nan)
    ends = np.full((m, 2), np.nan)

    feasible = (hi >= 0.0) & (hi >= lo)
    c3 = np.sqrt(np.clip(lo, 0.0, None))
    c4 = np.sqrt(np.clip(hi, 0.0, None))
    merged = feasible & (c3 == 0.0)
    split = feasible & (c3 > 0.0)

    starts[merged, 0] = -c4[merged] - shift[merged]
    ends[merged, 0] = c4[merged] - shift[merged]
    starts[split, 0] = -c4[split] - shift[split]
    ends[split, 0] = -c3[split] - shift[split]
    starts[split, 1] = c3[split] - shift[split]
    ends[split, 1] = c4[split] - shift[split]
    return starts, ends


def solve_square_band(lo: float, hi: float, shift: float) -> IntervalSet:
    starts, ends = square_band(lo, hi, shift)
    return IntervalSet.from_bounds(zip(starts[0], ends[0]))


def clip_bounds(starts, ends, lo: float, hi: float):
    """把片段裁剪到 [lo, hi]，裁空的片段置 NaN"""
    starts = np.maximum(starts, lo)
    ends = np.minimum(ends, hi)
    dead = ~(starts <= ends)
    return np.where(dead, np.nan, starts), np.where(dead, np.nan, ends)


def intersect_bounds(starts_a, ends_a, starts_b, ends_b):
    """
    两组逐行区间集合的交集

    每行的片段两两求交，输出形状 (M, Ka·Kb)。输入各行片段互不相交时，
    输出各行片段也互不相交。
    """
    s = np.maximum(starts_a[:, :, None], starts_b[:, None, :])
    e = np.minimum(ends_a[:, :, None], ends_b[:, None, :])
    m = starts_a.shape[0]
    s = s.reshape(m, -1)
    e = e.reshape(m, -1)
    dead = ~(s <= e)
    return np.where(dead, np.nan, s), np.where(dead, np.nan, e)


def union_bounds(starts_a, ends_a, starts_b, ends_b):
    """
    两组逐行区间集合的并集（逐行合并，保证每行片段互不相接）

    逐行走 IntervalSet，只在比较实验中使用。
    """
    m = starts_a.shape[0]
    width = starts_a.shape[1] + starts_b.shape[1]
    out_s = np.full((m, width), np.nan)
    out_e = np.full((m, width), np.nan)
    for row in range(m):
        merged = IntervalSet.from_bounds(
            list(zip(starts_a[row], ends_a[row])) + list(zip(starts_b[row], ends_b[row]))
        )
        for col, iv in enumerate(merged):
            out_s[row, col], out_e[row, col] = iv.lo, iv.hi
    return out_s, out_e


def bounds_to_sets(starts, ends) -> list[IntervalSet]:
    """逐行转换为 IntervalSet 列表"""
    return [IntervalSet.from_bounds(zip(s_row, e_row)) for s_row, e_row in zip(starts, ends)]
