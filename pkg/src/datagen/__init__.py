"""
数据生成模块
包含合成实例生成、点云读取预处理和 CSV 读写
"""

from .pointcloud import downsample, half_space_crop, load_ply, write_ply
from .synthetic import gen_planar, gen_reg3d_corr, gen_reg3d_corrless, gen_resection

__all__ = [
    "gen_resection",
    "gen_planar",
    "gen_reg3d_corr",
    "gen_reg3d_corrless",
    "load_ply",
    "write_ply",
    "downsample",
    "half_space_crop",
]
