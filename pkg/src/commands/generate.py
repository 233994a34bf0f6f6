"""
数据生成命令处理模块
把合成实例写成 CSV / PLY 文件，真值写入 truth.json
"""

import json
from pathlib import Path

from ..core.config import section_of
from ..datagen import io
from ..datagen.pointcloud import downsample, load_ply, write_ply
from ..datagen.synthetic import gen_planar, gen_reg3d_corr, gen_reg3d_corrless, gen_resection
from ..models.data_models import GroundTruth, SceneConfig
from ..utils.errors import ConfigurationError
from ..utils.log import logger

TRUTH_FILE = "truth.json"


def truth_to_dict(truth: GroundTruth, **extra) -> dict:
    data = {
        "translation": [float(v) for v in truth.translation],
        "angles": {k: float(v) for k, v in truth.angles.items()},
        "n_inliers": int(truth.inlier_mask.sum()),
    }
    if truth.rotation is not None:
        data["rotation"] = [[float(v) for v in row] for row in truth.rotation]
    data.update(extra)
    return data


class GenerateHandler:
    """数据生成命令处理器"""

    def __init__(self, config_manager):
        self.config_manager = config_manager

    def _scene(self, problem: str, ratio: float, seed: int) -> SceneConfig:
        cm = self.config_manager
        kwargs = {"n_points": cm.get_n_points(problem), "seed": seed}
        if problem in ("resection1d", "planar2d"):
            kwargs.update(noise_px=cm.get_noise_px(problem), focal=cm.get_focal(problem))
        if problem == "reg3d-corr":
            kwargs.update(noise_sigma=cm.get_noise_sigma())
        if problem != "reg3d-corrless":
            kwargs["outlier_ratio"] = ratio
        return SceneConfig(**kwargs)

    def generate(self, problem: str, ratio: float, out_dir: str | Path, seed: int | None = None) -> list[Path]:
        """
        生成一个实例并写入 out_dir

        Args:
            problem: 问题名
            ratio: 外点率；reg3d-corrless 为重叠率
            out_dir: 输出目录，不存在时创建
            seed: 随机种子，默认取配置

        Returns:
            写出的文件路径
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        seed = self.config_manager.get_seed() if seed is None else seed
        cfg = self._scene(problem, ratio, seed)
        written: list[Path] = []

        if problem == "resection1d":
            corrs, prior, truth = gen_resection(cfg)
            written.append(out_dir / "corrs.csv")
            io.write_corr3d2d_csv(written[-1], corrs)
            extra = {"prior": {"beta": prior.beta, "gamma": prior.gamma}}
        elif problem == "planar2d":
            corrs, truth = gen_planar(cfg)
            written.append(out_dir / "corrs.csv")
            io.write_corr2d2d_csv(written[-1], corrs)
            written.append(out_dir / "planar_gt.csv")
            io.write_planar_gt(written[-1], truth.angles["theta"], truth.angles["phi"])
            extra = {}
        elif problem == "reg3d-corr":
            corrs, truth = gen_reg3d_corr(cfg)
            written.append(out_dir / "corrs.csv")
            io.write_corr3d3d_csv(written[-1], corrs)
            extra = {}
        elif problem == "reg3d-corrless":
            base = None
            ply_path = self.config_manager.get_ply_path()
            if ply_path:
                base = downsample(load_ply(ply_path), self.config_manager.get_voxel())
            P, Q, truth = gen_reg3d_corrless(cfg, ratio, base)
            written.extend([out_dir / "source.ply", out_dir / "target.ply"])
            write_ply(written[0], P)
            write_ply(written[1], Q)
            extra = {}
        else:
            raise ConfigurationError(f"未知问题: {problem}")

        truth_path = out_dir / TRUTH_FILE
        truth_path.write_text(
            json.dumps(
                truth_to_dict(truth, problem=problem, ratio=ratio, seed=seed, **extra),
                ensure_ascii=False,
                indent=2,
            ),
            encoding="utf-8",
        )
        written.append(truth_path)
        logger.info(f"[gen] {problem} 实例已写入 {out_dir}（{section_of(problem)}, seed={seed}）")
        return written

    def run(self, args) -> int:
        paths = self.generate(args.problem, args.ratio, args.out_dir, args.seed)
        print("✅ 已生成：\n" + "\n".join(f"• {p}" for p in paths))
        return 0
