"""
分支定界引擎
在轴对齐 Cube 上做最优优先搜索，上下界由具体问题的 Bounder 提供
"""

import heapq
import itertools
import math
import time
from typing import TYPE_CHECKING

import numpy as np

from ..models.data_models import Cube, SolveReport, TraceEntry
from ..utils.errors import ConfigurationError
from ..utils.log import logger

if TYPE_CHECKING:
    from ..problems.base_bounder import BaseBounder

MAX_DEPTH_LIMIT = 30


def split(cube: Cube) -> list[Cube]:
    """把 Cube 每条边对半分，得到 2^n 个子 Cube"""
    mid = cube.center
    children = []
    for choice in itertools.product((False, True), repeat=cube.n):
        upper_half = np.array(choice, dtype=bool)
        lo = np.where(upper_half, mid, cube.lo)
        hi = np.where(upper_half, cube.hi, mid)
        children.append(Cube(lo, hi, cube.depth + 1))
    return children


def leaf_diameter(initial: Cube, depth: int) -> float:
    """深度为 depth 的叶子 Cube 的对角线长度，边长为 L0 的立方体时为 √n·L0/2^d"""
    return initial.diameter / (2.0**depth)


class BranchAndBound:
    """
    最优优先分支定界

    队列按上界从大到小出队；上界相同时深度大的先出，再按入队顺序。
    每个 Cube 的上界只在入队时计算一次，随队列项保存。
    """

    def __init__(
        self,
        bounder: "BaseBounder",
        max_depth: int = 10,
        *,
        exhaustive: bool = False,
        record_trace: bool = False,
    ):
        if not isinstance(max_depth, (int, np.integer)) or not (
            0 <= max_depth <= MAX_DEPTH_LIMIT
        ):
            raise ConfigurationError(
                f"max_depth 必须是 0 到 {MAX_DEPTH_LIMIT} 之间的整数: {max_depth}"
            )
        self.bounder = bounder
        self.max_depth = int(max_depth)
        self.exhaustive = exhaustive
        self.record_trace = record_trace

    def _check_initial(self, initial: Cube):
        if initial.depth != 0:
            raise ConfigurationError(f"初始 Cube 的深度必须为 0: {initial.depth}")
        if initial.n != self.bounder.n_branch:
            raise ConfigurationError(
                f"维度不匹配: Bounder 分支维度 {self.bounder.n_branch}，初始 Cube 维度 {initial.n}"
            )

    def solve(self, initial: Cube) -> SolveReport:
        self._check_initial(initial)
        bounder = self.bounder
        start = time.perf_counter()

        best_lower, best_param = bounder.lower(initial)
        best_param = np.asarray(best_param, dtype=float)
        root_upper = bounder.upper(initial)

        counter = itertools.count()
        # (-上界, -深度, 入队序号, cube, 已算好的下界)
        heap = [(-root_upper, 0, next(counter), initial, (best_lower, best_param))]
        report = SolveReport(
            best_param=best_param,
            best_count=best_lower,
            max_queue_len=1,
            bound_trace=[] if self.record_trace else None,
        )

        while heap:
            neg_upper, _, _, cube, cached = heapq.heappop(heap)
            upper = -neg_upper
            report.iterations += 1

            lower, witness = cached if cached is not None else bounder.lower(cube)
            if lower > best_lower:
                best_lower = lower
                best_param = np.asarray(witness, dtype=float)

            if report.bound_trace is not None:
                report.bound_trace.append(
                    TraceEntry(report.iterations, best_lower, upper, len(heap))
                )

            if not self.exhaustive:
                if upper == best_lower:
                    break
                if upper < best_lower:
                    report.cubes_pruned += 1
                    continue
            if cube.depth >= self.max_depth:
                continue

            report.cubes_split += 1
            for child in split(cube):
                child_upper = bounder.upper(child)
                if not self.exhaustive and child_upper < best_lower:
                    report.cubes_pruned += 1
                    continue
                heapq.heappush(
                    heap, (-child_upper, -child.depth, next(counter), child, None)
                )
            report.max_queue_len = max(report.max_queue_len, len(heap))

        report.best_count = int(best_lower)
        report.best_param = best_param
        report.wall_time = time.perf_counter() - start
        logger.debug(
            f"[BnB] 完成: best={report.best_count} iter={report.iterations} "
            f"split={report.cubes_split} pruned={report.cubes_pruned} "
            f"queue_max={report.max_queue_len} time={report.wall_time:.4f}s"
        )
        return report


def solve(
    bounder: "BaseBounder",
    initial: Cube,
    max_depth: int = 10,
    *,
    exhaustive: bool = False,
    record_trace: bool = False,
) -> SolveReport:
    """用给定 Bounder 在初始 Cube 上求一致性最大化问题的全局最优"""
    engine = BranchAndBound(
        bounder, max_depth, exhaustive=exhaustive, record_trace=record_trace
    )
    return engine.solve(initial)


def pop_count_prune_all(n: int, depth: int) -> int:
    """除最优子 Cube 外全部剪枝时的出队次数 1 + d·2^n"""
    return 1 + depth * 2**n


def pop_count_no_prune(n: int, depth: int) -> int:
    """从不剪枝时的出队次数 Σ (2^n)^k, k = 0..d"""
    return sum((2**n) ** k for k in range(depth + 1))


def angular_cube(lo: float = -math.pi, hi: float = math.pi) -> Cube:
    """一维角度搜索区间"""
    return Cube(np.array([lo]), np.array([hi]))
