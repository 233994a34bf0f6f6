"""
单实例求解命令处理模块
"""

import json
import time
from pathlib import Path

import numpy as np

from ..datagen import io
from ..models.data_models import Cube, ImuPrior, SolveReport
from ..problems import planar2d, reg3d, resection1d
from ..utils.errors import ConfigurationError
from ..utils.helpers import angle_error_deg, axial_error_deg
from ..utils.log import logger


class SolveHandler:
    """单实例求解命令处理器"""

    def __init__(self, config_manager):
        self.config_manager = config_manager

    @staticmethod
    def _load_truth(path: str | None) -> dict | None:
        """读取 gen 写出的 truth.json；平面运动也接受 theta,phi 两列的真值 CSV"""
        if not path:
            return None
        if Path(path).suffix.lower() == ".csv":
            theta, phi = io.read_planar_gt(path)
            return {"angles": {"theta": theta, "phi": phi}}
        try:
            return json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"读取真值文件失败 {path}: {e}") from e

    def _prior(self, args, truth: dict | None) -> ImuPrior:
        if args.prior is not None:
            return ImuPrior(*args.prior)
        if truth and "prior" in truth:
            return ImuPrior(truth["prior"]["beta"], truth["prior"]["gamma"])
        raise ConfigurationError("resection1d 需要 --prior BETA GAMMA 或包含 prior 的 --truth 文件")

    def solve(self, args) -> tuple[SolveReport, str]:
        """
        按问题类型读取输入并求解

        Returns:
            (求解结果, 位姿描述)
        """
        cm = self.config_manager
        problem, method = args.problem, args.method
        eps = args.eps if args.eps is not None else cm.get_eps(problem)
        max_depth = args.max_depth if args.max_depth is not None else cm.get_max_depth()
        truth = self._load_truth(getattr(args, "truth", None))

        if problem == "resection1d":
            corrs = io.read_corr3d2d_csv(args.input)
            constraints = resection1d.build_tim_constraints(corrs, self._prior(args, truth))
            if method == "acm":
                start = time.perf_counter()
                alpha, count = resection1d.solve_acm0(constraints, eps)
                report = SolveReport(
                    np.array([alpha]), count, iterations=1, wall_time=time.perf_counter() - start
                )
            else:
                report = resection1d.solve_plain1d(constraints, eps, max_depth)
            alpha = float(report.best_param[0])
            pose = f"α = {alpha:.6f} rad"
            if truth and "alpha" in truth.get("angles", {}):
                pose += f"（误差 {angle_error_deg(alpha, truth['angles']['alpha']):.4f}°）"
            return report, pose

        if problem == "planar2d":
            constraints = planar2d.build_planar_constraints(io.read_corr2d2d_csv(args.input))
            solver = planar2d.solve_acm1 if method == "acm" else planar2d.solve_plain2d
            report = solver(
                constraints,
                eps,
                max_depth,
                theta1_range=cm.get_theta1_range(),
                theta2_range=cm.get_theta2_range(),
            )
            theta, phi = planar2d.to_pose(report.best_param)
            pose = f"θ = {theta:.6f} rad, φ = {phi:.6f} rad"
            if truth and "theta" in truth.get("angles", {}):
                angles = truth["angles"]
                pose += (
                    f"（误差 θ {angle_error_deg(theta, angles['theta']):.4f}°，"
                    f"φ {axial_error_deg(phi, angles['phi']):.4f}°）"
                )
            return report, pose

        if problem == "reg3d-corr":
            corrs = io.read_corr3d3d_csv(args.input)
            report = reg3d.solve_reg3d_corr(
                corrs, method, eps, max_depth, restrict_t3=cm.get_restrict_t3(problem)
            )
        elif problem == "reg3d-corrless":
            if not args.target:
                raise ConfigurationError("reg3d-corrless 需要 --target 目标点集")
            P = io.load_points(args.input)
            Q = io.load_points(args.target)
            pairs = reg3d.build_ri_pairs(P, Q, cm.get_tau_frac() * eps, cm.get_keep())
            lo, hi = cm.get_translation_box(problem)
            report = reg3d.solve_reg3d_corrless(
                pairs,
                method,
                Cube(np.full(3, lo), np.full(3, hi)),
                eps,
                max_depth,
                union_mode=cm.get_union_mode(),
                restrict_t3=cm.get_restrict_t3(problem),
            )
        else:
            raise ConfigurationError(f"未知问题: {problem}")

        pose = "t = [" + ", ".join(f"{v:.6f}" for v in report.best_param) + "]"
        if truth and "translation" in truth:
            err = reg3d.relative_translation_error(report.best_param, truth["translation"])
            pose += f"（相对误差 {err:.4g}）"
        return report, pose

    def run(self, args) -> int:
        report, pose = self.solve(args)
        logger.info(f"[solve] {args.problem}/{args.method} 完成，用时 {report.wall_time:.4f}s")
        print(
            f"""🎯 {args.problem} ({args.method})
• 最大一致集：{report.best_count}
• {pose}
• 迭代次数：{report.iterations}，剪枝 {report.cubes_pruned}，分裂 {report.cubes_split}
• 用时：{report.wall_time:.4f} s"""
        )
        return 0
