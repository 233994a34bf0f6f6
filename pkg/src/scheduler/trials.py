"""
单次试验流程
生成实例 → 构造约束 → 按方法求解 → 与真值比较误差
"""

import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..datagen.pointcloud import downsample
from ..datagen.io import load_points
from ..datagen.synthetic import gen_planar, gen_reg3d_corr, gen_reg3d_corrless, gen_resection
from ..models.data_models import Cube, GroundTruth, RunRecord, SceneConfig, SolveReport
from ..problems import planar2d, reg3d, resection1d
from ..utils.errors import ConfigurationError
from ..utils.helpers import angle_error_deg, axial_error_deg
from ..utils.log import logger


@dataclass
class TrialInstance:
    """一次试验的数据：原始观测、真值和构造好的约束"""

    data: Any
    truth: GroundTruth
    constraints: Any = None
    n_constraints: int = 0
    n_inlier_constraints: int = 0
    build_time_s: float = 0.0
    extra: dict = field(default_factory=dict)


@dataclass
class TrialOutcome:
    records: list[RunRecord]
    traces: dict[str, list] = field(default_factory=dict)


class BaseTrial(ABC):
    """
    试验基类
    子类给出各问题的生成、构造、求解和误差计算，run 负责串联并计时
    """

    problem: str = ""

    def __init__(self, config_manager):
        self.config_manager = config_manager
        self.eps = config_manager.get_eps(self.problem)
        self.max_depth = config_manager.get_max_depth()

    @abstractmethod
    def generate(self, sweep_value: float, seed: int) -> TrialInstance:
        """
        生成一个实例

        Args:
            sweep_value: 外点率或重叠率
            seed: 该试验的随机种子
        """

    @abstractmethod
    def build(self, instance: TrialInstance):
        """构造约束，填入 instance.constraints 和约束计数"""

    @abstractmethod
    def solve(self, instance: TrialInstance, method: str, record_trace: bool) -> SolveReport:
        pass

    @abstractmethod
    def errors(self, instance: TrialInstance, report: SolveReport) -> tuple[float, float | None]:
        """返回 (主误差, 次误差)"""

    def run(
        self,
        methods: list[str] | tuple[str, ...],
        sweep_value: float,
        trial: int,
        seed: int,
        *,
        record_trace: bool = False,
    ) -> TrialOutcome:
        """
        同一实例依次交给每个方法求解，保证方法间配对比较

        单个方法求解失败只生成该方法的错误记录；生成或构造失败的异常向上抛出
        """
        instance = self.generate(sweep_value, seed)
        start = time.perf_counter()
        self.build(instance)
        instance.build_time_s = time.perf_counter() - start

        outcome = TrialOutcome(records=[])
        for method in methods:
            record = RunRecord(
                problem=self.problem,
                method=method,
                sweep_value=float(sweep_value),
                trial=trial,
                build_time_s=instance.build_time_s,
                n_constraints=instance.n_constraints,
                n_inlier_constraints=instance.n_inlier_constraints,
            )
            try:
                start = time.perf_counter()
                report = self.solve(instance, method, record_trace)
                record.time_s = time.perf_counter() - start
                record.iterations = report.iterations
                record.cardinality = report.best_count
                record.err_primary, record.err_secondary = self.errors(instance, report)
                if record_trace and report.bound_trace is not None:
                    outcome.traces[method] = report.bound_trace
            except Exception as e:
                logger.error(
                    f"[{self.problem}] 求解失败 method={method} sweep={sweep_value:g} trial={trial}: {e}",
                    exc_info=True,
                )
                record.error = f"{type(e).__name__}: {e}"
            outcome.records.append(record)
        return outcome

    @staticmethod
    def _check_method(method: str):
        if method not in ("plain", "acm"):
            raise ConfigurationError(f"未知方法: {method}")


class ResectionTrial(BaseTrial):
    """已知重力方向的相机定位：ACM-0 对比 1D 平凡 BnB"""

    problem = "resection1d"

    def generate(self, sweep_value: float, seed: int) -> TrialInstance:
        cm = self.config_manager
        cfg = SceneConfig(
            n_points=cm.get_n_points(self.problem),
            noise_px=cm.get_noise_px(self.problem),
            focal=cm.get_focal(self.problem),
            outlier_ratio=sweep_value,
            seed=seed,
        )
        corrs, prior, truth = gen_resection(cfg)
        return TrialInstance(data=corrs, truth=truth, extra={"prior": prior})

    def build(self, instance: TrialInstance):
        constraints = resection1d.build_tim_constraints(instance.data, instance.extra["prior"])
        instance.constraints = constraints
        instance.n_constraints = len(constraints)
        if constraints:
            residuals = resection1d.tim_residuals(constraints, instance.truth.angles["alpha"])
            instance.n_inlier_constraints = int(np.count_nonzero(residuals <= self.eps))

    def solve(self, instance: TrialInstance, method: str, record_trace: bool) -> SolveReport:
        self._check_method(method)
        if method == "plain":
            return resection1d.solve_plain1d(
                instance.constraints, self.eps, self.max_depth, record_trace=record_trace
            )
        start = time.perf_counter()
        alpha, count = resection1d.solve_acm0(instance.constraints, self.eps)
        # 一次穿刺即得全局最优，记为 1 次迭代
        return SolveReport(
            best_param=np.array([alpha]),
            best_count=count,
            iterations=1,
            wall_time=time.perf_counter() - start,
            bound_trace=[] if record_trace else None,
        )

    def errors(self, instance, report):
        return angle_error_deg(float(report.best_param[0]), instance.truth.angles["alpha"]), None


class PlanarTrial(BaseTrial):
    """平面运动相对位姿：ACM-1 对比 2D 平凡 BnB"""

    problem = "planar2d"

    def __init__(self, config_manager):
        super().__init__(config_manager)
        self.theta1_range = config_manager.get_theta1_range()
        self.theta2_range = config_manager.get_theta2_range()

    def generate(self, sweep_value: float, seed: int) -> TrialInstance:
        cm = self.config_manager
        cfg = SceneConfig(
            n_points=cm.get_n_points(self.problem),
            noise_px=cm.get_noise_px(self.problem),
            focal=cm.get_focal(self.problem),
            outlier_ratio=sweep_value,
            seed=seed,
        )
        corrs, truth = gen_planar(cfg)
        return TrialInstance(data=corrs, truth=truth)

    def build(self, instance: TrialInstance):
        constraints = planar2d.build_planar_constraints(instance.data)
        instance.constraints = constraints
        instance.n_constraints = len(constraints)
        if constraints:
            angles = instance.truth.angles
            residuals = planar2d.planar_residuals(constraints, angles["theta1"], angles["theta2"])
            instance.n_inlier_constraints = int(np.count_nonzero(residuals <= self.eps))

    def solve(self, instance: TrialInstance, method: str, record_trace: bool) -> SolveReport:
        self._check_method(method)
        solver = planar2d.solve_plain2d if method == "plain" else planar2d.solve_acm1
        return solver(
            instance.constraints,
            self.eps,
            self.max_depth,
            theta1_range=self.theta1_range,
            theta2_range=self.theta2_range,
            record_trace=record_trace,
        )

    def errors(self, instance, report):
        theta, phi = planar2d.to_pose(report.best_param)
        angles = instance.truth.angles
        # 平移方向只能确定到符号，φ 按 π 周期比较
        return angle_error_deg(theta, angles["theta"]), axial_error_deg(phi, angles["phi"])


class _Reg3dTrial(BaseTrial):
    def __init__(self, config_manager):
        super().__init__(config_manager)
        lo, hi = config_manager.get_translation_box(self.problem)
        self.box = Cube(np.full(3, lo), np.full(3, hi))
        self.restrict_t3 = config_manager.get_restrict_t3(self.problem)

    def errors(self, instance, report):
        return reg3d.relative_translation_error(report.best_param, instance.truth.translation), None


class Reg3dCorrTrial(_Reg3dTrial):
    """有对应点云配准的平移搜索：ACM-2 对比 3D 平凡 BnB"""

    problem = "reg3d-corr"

    def generate(self, sweep_value: float, seed: int) -> TrialInstance:
        cm = self.config_manager
        cfg = SceneConfig(
            n_points=cm.get_n_points(self.problem),
            noise_px=0.0,
            noise_sigma=cm.get_noise_sigma(),
            outlier_ratio=sweep_value,
            seed=seed,
        )
        corrs, truth = gen_reg3d_corr(cfg)
        return TrialInstance(data=corrs, truth=truth)

    def build(self, instance: TrialInstance):
        instance.constraints = instance.data
        instance.n_constraints = len(instance.data)
        if instance.data:
            residuals = reg3d.corr_residuals(instance.data, instance.truth.translation)
            instance.n_inlier_constraints = int(np.count_nonzero(residuals <= self.eps))

    def solve(self, instance: TrialInstance, method: str, record_trace: bool) -> SolveReport:
        self._check_method(method)
        return reg3d.solve_reg3d_corr(
            instance.constraints,
            method,
            self.eps,
            self.max_depth,
            box=self.box,
            restrict_t3=self.restrict_t3,
            record_trace=record_trace,
        )


class Reg3dCorrlessTrial(_Reg3dTrial):
    """无对应点云配准：RI pair 上的 ACM-2 对比 3D 平凡 BnB，扫描值为重叠率"""

    problem = "reg3d-corrless"

    def __init__(self, config_manager):
        super().__init__(config_manager)
        self.tau = config_manager.get_tau_frac() * self.eps
        self.keep = config_manager.get_keep()
        self.union_mode = config_manager.get_union_mode()
        self.base_points = None
        ply_path = config_manager.get_ply_path()
        if ply_path:
            points = load_points(ply_path)
            self.base_points = downsample(points, config_manager.get_voxel())
            logger.info(
                f"[{self.problem}] 使用点云 {ply_path}: {points.shape[0]} → {self.base_points.shape[0]} 个点"
            )

    def generate(self, sweep_value: float, seed: int) -> TrialInstance:
        cfg = SceneConfig(n_points=self.config_manager.get_n_points(self.problem), seed=seed)
        P, Q, truth = gen_reg3d_corrless(cfg, sweep_value, self.base_points)
        return TrialInstance(data=(P, Q), truth=truth)

    def build(self, instance: TrialInstance):
        P, Q = instance.data
        pairs = reg3d.build_ri_pairs(P, Q, self.tau, self.keep)
        instance.constraints = pairs
        instance.n_constraints = len(pairs)
        if pairs:
            residuals = reg3d.ri_pair_residuals(pairs, instance.truth.translation)
            instance.n_inlier_constraints = int(np.count_nonzero(residuals <= self.eps))

    def solve(self, instance: TrialInstance, method: str, record_trace: bool) -> SolveReport:
        self._check_method(method)
        return reg3d.solve_reg3d_corrless(
            instance.constraints,
            method,
            self.box,
            self.eps,
            self.max_depth,
            union_mode=self.union_mode,
            restrict_t3=self.restrict_t3,
            record_trace=record_trace,
        )


TRIAL_TYPES: dict[str, type[BaseTrial]] = {
    cls.problem: cls for cls in (ResectionTrial, PlanarTrial, Reg3dCorrTrial, Reg3dCorrlessTrial)
}


def create_trial(problem: str, config_manager) -> BaseTrial:
    try:
        trial_type = TRIAL_TYPES[problem]
    except KeyError:
        raise ConfigurationError(
            f"未知问题: {problem}，可选: {', '.join(TRIAL_TYPES)}"
        ) from None
    return trial_type(config_manager)


def error_records(problem: str, methods, sweep_value: float, trial: int, message: str) -> list[RunRecord]:
    """生成或构造阶段失败时，为每个方法补一条错误记录"""
    return [
        RunRecord(problem=problem, method=m, sweep_value=float(sweep_value), trial=trial, error=message)
        for m in methods
    ]
