"""
合成数据生成
复现各问题的实验设置：随机场景、像素噪声、外点替换与部分重叠裁剪
"""

import math

import numpy as np
from scipy.spatial.transform import Rotation

from ..models.data_models import (
    Corr2D2D,
    Corr3D2D,
    Corr3D3D,
    GroundTruth,
    ImuPrior,
    SceneConfig,
)
from ..problems.resection1d import resection_rotation
from ..utils.errors import ConfigurationError
from ..utils.log import logger
from .pointcloud import half_space_crop

MIN_DEPTH = 0.1
MAX_RESAMPLE_ROUNDS = 1000

RESECTION_ANGLES = (-0.5 * math.pi, 0.5 * math.pi)
RESECTION_TRANSLATION = (-1.0, 1.0)
PLANAR_ANGLES = (-math.pi / 3.0, math.pi / 3.0)
PLANAR_RHO = (-2.0, 2.0)
REG3D_ANGLES = (-math.pi, math.pi)
REG3D_TRANSLATION = (-1.0, 1.0)


def make_rng(cfg: SceneConfig) -> np.random.Generator:
    return np.random.default_rng(cfg.seed)


def sample_points(rng: np.random.Generator, cfg: SceneConfig, n: int) -> np.ndarray:
    """在 [point_lo, point_hi] 盒内均匀采样"""
    return rng.uniform(cfg.point_lo, cfg.point_hi, size=(n, 3))


def _sample_in_front(rng, cfg, n, to_camera) -> tuple[np.ndarray, np.ndarray]:
    """
    采样场景点并变换到相机系，深度过小的点重新采样

    Returns:
        (场景点, 相机系坐标)
    """
    points = sample_points(rng, cfg, n)
    cam = to_camera(points)
    for _ in range(MAX_RESAMPLE_ROUNDS):
        bad = np.abs(cam[:, 2]) < MIN_DEPTH
        if not bad.any():
            break
        points[bad] = sample_points(rng, cfg, int(bad.sum()))
        cam[bad] = to_camera(points[bad])
    return points, cam


def _orthogonal_basis(bearings: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    helper = np.tile([1.0, 0.0, 0.0], (bearings.shape[0], 1))
    near_x = np.abs(bearings[:, 0]) > 0.9
    helper[near_x] = [0.0, 1.0, 0.0]
    e1 = np.cross(bearings, helper)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(bearings, e1)
    return e1, e2


def project_with_noise(
    rng: np.random.Generator, cam: np.ndarray, noise_px: float, focal: float
) -> np.ndarray:
    """
    在视线方向的正交平面上加 [-noise_px, noise_px] 像素均匀噪声，重新归一化后投影

    Returns:
        归一化像平面坐标 (N, 2)
    """
    bearings = cam / np.linalg.norm(cam, axis=1, keepdims=True)
    noise = rng.uniform(-noise_px, noise_px, size=(cam.shape[0], 2)) / focal
    if noise_px > 0:
        e1, e2 = _orthogonal_basis(bearings)
        bearings = bearings + noise[:, :1] * e1 + noise[:, 1:] * e2
        bearings /= np.linalg.norm(bearings, axis=1, keepdims=True)
    return bearings[:, :2] / bearings[:, 2:3]


def _outlier_indices(rng: np.random.Generator, cfg: SceneConfig) -> np.ndarray:
    mask = np.ones(cfg.n_points, dtype=bool)
    chosen = rng.choice(cfg.n_points, size=cfg.n_outliers, replace=False)
    mask[chosen] = False
    return mask


def gen_resection(cfg: SceneConfig) -> tuple[list[Corr3D2D], ImuPrior, GroundTruth]:
    """
    相机定位数据：点在 [-1,1]²×[4,8]，三个旋转角和平移分量均匀采样，
    外点的像点换成新采样场景点的投影
    """
    rng = make_rng(cfg)
    alpha, beta, gamma = rng.uniform(*(cfg.angle_range or RESECTION_ANGLES), size=3)
    t = rng.uniform(*(cfg.translation_range or RESECTION_TRANSLATION), size=3)
    prior = ImuPrior(float(beta), float(gamma))
    R = resection_rotation(float(alpha), prior)

    def to_camera(points):
        return points @ R.T + t

    points, cam = _sample_in_front(rng, cfg, cfg.n_points, to_camera)
    inlier_mask = _outlier_indices(rng, cfg)
    n_out = int((~inlier_mask).sum())
    if n_out:
        _, cam[~inlier_mask] = _sample_in_front(rng, cfg, n_out, to_camera)
    image = project_with_noise(rng, cam, cfg.noise_px, cfg.focal)

    corrs = [Corr3D2D(p=points[k].copy(), u=image[k].copy()) for k in range(cfg.n_points)]
    gt = GroundTruth(
        translation=t,
        inlier_mask=inlier_mask,
        angles={"alpha": float(alpha), "beta": float(beta), "gamma": float(gamma)},
        rotation=R,
    )
    return corrs, prior, gt


def gen_planar(cfg: SceneConfig) -> tuple[list[Corr2D2D], GroundTruth]:
    """
    平面运动数据：绕 y 轴偏航 θ，平移 ρ·(sinφ, 0, cosφ)，满足 x1 ∝ R·x2 + t
    translation_range 在这里表示 ρ 的范围
    """
    rng = make_rng(cfg)
    theta, phi = rng.uniform(*(cfg.angle_range or PLANAR_ANGLES), size=2)
    rho = rng.uniform(*(cfg.translation_range or PLANAR_RHO))
    R = Rotation.from_euler("y", theta).as_matrix()
    t = rho * np.array([math.sin(phi), 0.0, math.cos(phi)])

    def both_views(points):
        view1 = points @ R.T + t
        # 两个视图都要在相机前方，取较小深度做判断
        depth = np.where(np.abs(view1[:, 2]) < np.abs(points[:, 2]), view1[:, 2], points[:, 2])
        return np.column_stack([view1[:, :2], depth])

    view2, _ = _sample_in_front(rng, cfg, cfg.n_points, both_views)
    view1 = view2 @ R.T + t
    inlier_mask = _outlier_indices(rng, cfg)
    n_out = int((~inlier_mask).sum())
    if n_out:
        view2[~inlier_mask], _ = _sample_in_front(rng, cfg, n_out, lambda p: p)

    x1 = project_with_noise(rng, view1, cfg.noise_px, cfg.focal)
    x2 = project_with_noise(rng, view2, cfg.noise_px, cfg.focal)
    corrs = [Corr2D2D(x1=x1[k].copy(), x2=x2[k].copy()) for k in range(cfg.n_points)]
    gt = GroundTruth(
        translation=t,
        inlier_mask=inlier_mask,
        angles={
            "theta": float(theta),
            "phi": float(phi),
            "theta1": float(theta - phi),
            "theta2": float(phi),
            "rho": float(rho),
        },
        rotation=R,
    )
    return corrs, gt


def random_rotation(rng: np.random.Generator, angle_range=REG3D_ANGLES) -> tuple[np.ndarray, float]:
    """旋转轴在立方体内均匀采样后归一化，角度均匀采样"""
    axis = rng.uniform(-1.0, 1.0, size=3)
    norm = np.linalg.norm(axis)
    axis = axis / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
    angle = float(rng.uniform(*angle_range))
    return Rotation.from_rotvec(axis * angle).as_matrix(), angle


def gen_reg3d_corr(cfg: SceneConfig) -> tuple[list[Corr3D3D], GroundTruth]:
    """
    有对应配准数据：q = R·(p + t)，两侧加 N(0, noise_sigma²) 噪声，
    外点的 q 换成新采样点变换后的位置
    """
    rng = make_rng(cfg)
    R, angle = random_rotation(rng, cfg.angle_range or REG3D_ANGLES)
    t = rng.uniform(*(cfg.translation_range or REG3D_TRANSLATION), size=3)

    p = sample_points(rng, cfg, cfg.n_points)
    q = (p + t) @ R.T
    inlier_mask = _outlier_indices(rng, cfg)
    n_out = int((~inlier_mask).sum())
    if n_out:
        q[~inlier_mask] = (sample_points(rng, cfg, n_out) + t) @ R.T
    if cfg.noise_sigma > 0:
        p = p + rng.normal(0.0, cfg.noise_sigma, size=p.shape)
        q = q + rng.normal(0.0, cfg.noise_sigma, size=q.shape)

    corrs = [Corr3D3D(p=p[k].copy(), q=q[k].copy()) for k in range(cfg.n_points)]
    gt = GroundTruth(translation=t, inlier_mask=inlier_mask, angles={"angle": angle}, rotation=R)
    return corrs, gt


def gen_reg3d_corrless(
    cfg: SceneConfig, overlap: float, base_points: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray, GroundTruth]:
    """
    无对应配准数据

    P 为随机点集（或给定的真实点云），Q 由半空间裁剪出的 overlap 比例的 P
    经刚体变换得到，其余位置用新采样点变换后填充，两个点集大小相同。

    Args:
        cfg: 场景配置，outlier_ratio 在这里不使用
        overlap: 重叠比例 (0, 1]
        base_points: 可选的真实点云
    """
    if not (0.0 <= overlap <= 1.0):
        raise ConfigurationError(f"overlap 必须在 [0, 1]: {overlap}")
    rng = make_rng(cfg)
    R, angle = random_rotation(rng, cfg.angle_range or REG3D_ANGLES)
    t = rng.uniform(*(cfg.translation_range or REG3D_TRANSLATION), size=3)

    if base_points is None:
        P = sample_points(rng, cfg, cfg.n_points)
        filler_lo, filler_hi = np.asarray(cfg.point_lo), np.asarray(cfg.point_hi)
    else:
        P = np.asarray(base_points, dtype=float).copy()
        filler_lo, filler_hi = P.min(axis=0), P.max(axis=0)
    n = P.shape[0]

    kept = half_space_crop(P, overlap, rng)
    n_fill = n - kept.size
    filler = rng.uniform(filler_lo, filler_hi, size=(n_fill, 3))
    Q = np.vstack([(P[kept] + t) @ R.T, (filler + t) @ R.T])
    inlier_mask = np.concatenate([np.ones(kept.size, dtype=bool), np.zeros(n_fill, dtype=bool)])

    order = rng.permutation(n)
    Q, inlier_mask = Q[order], inlier_mask[order]
    logger.debug(f"[datagen] 无对应实例: |P|={n} overlap={overlap:.2f} 重叠点={kept.size}")
    gt = GroundTruth(
        translation=t,
        inlier_mask=inlier_mask,
        angles={"angle": angle, "overlap": float(overlap)},
        rotation=R,
    )
    return P, Q, gt
