"""
点云读取与预处理
ASCII PLY 解析、体素降采样和半空间重叠裁剪
"""

from pathlib import Path

import numpy as np
import open3d as o3d

from ..utils.errors import ConfigurationError, PlyParseError
from ..utils.log import logger

_PLY_SCALAR_TYPES = {
    "char", "uchar", "short", "ushort", "int", "uint", "float", "double",
    "int8", "uint8", "int16", "uint16", "int32", "uint32", "float32", "float64",
}


def _parse_header(lines: list[str]) -> tuple[list[dict], int]:
    """
    解析 PLY 头部

    Returns:
        (元素列表 [{name, count, props, has_list, line_no}], 数据起始行下标)
    """
    if not lines or lines[0].strip() != "ply":
        raise PlyParseError("文件首行必须是 'ply'", 1)

    elements: list[dict] = []
    seen_format = False
    for idx in range(1, len(lines)):
        line_no = idx + 1
        tokens = lines[idx].split()
        if not tokens or tokens[0] in ("comment", "obj_info"):
            continue
        keyword = tokens[0]
        if keyword == "format":
            if len(tokens) != 3 or tokens[1] != "ascii":
                raise PlyParseError(f"只支持 ASCII PLY: {lines[idx].strip()}", line_no)
            seen_format = True
        elif keyword == "element":
            if len(tokens) != 3:
                raise PlyParseError("element 行格式错误", line_no)
            try:
                count = int(tokens[2])
            except ValueError:
                raise PlyParseError(f"element 数量不是整数: {tokens[2]}", line_no) from None
            if count < 0:
                raise PlyParseError(f"element 数量为负: {count}", line_no)
            elements.append(
                {"name": tokens[1], "count": count, "props": [], "has_list": False, "line_no": line_no}
            )
        elif keyword == "property":
            if not elements:
                raise PlyParseError("property 出现在 element 之前", line_no)
            if len(tokens) >= 2 and tokens[1] == "list":
                elements[-1]["has_list"] = True
                elements[-1]["props"].append(tokens[-1])
            elif len(tokens) == 3 and tokens[1] in _PLY_SCALAR_TYPES:
                elements[-1]["props"].append(tokens[2])
            else:
                raise PlyParseError(f"无法识别的 property: {lines[idx].strip()}", line_no)
        elif keyword == "end_header":
            if not seen_format:
                raise PlyParseError("缺少 format 行", line_no)
            return elements, idx + 1
        else:
            raise PlyParseError(f"无法识别的头部关键字: {keyword}", line_no)
    raise PlyParseError("缺少 end_header", len(lines))


def load_ply(path: str | Path) -> np.ndarray:
    """
    读取 ASCII PLY 的顶点坐标

    Returns:
        (N, 3) 点坐标
    """
    text = Path(path).read_text(encoding="utf-8", errors="replace")
    lines = text.splitlines()
    elements, cursor = _parse_header(lines)

    points = np.zeros((0, 3))
    for element in elements:
        if element["name"] != "vertex":
            cursor += element["count"]
            continue
        if element["has_list"]:
            raise PlyParseError("vertex 元素不支持 list 属性", element["line_no"])
        props = element["props"]
        try:
            cols = [props.index(axis) for axis in ("x", "y", "z")]
        except ValueError:
            raise PlyParseError("vertex 元素缺少 x/y/z 属性", element["line_no"]) from None

        points = np.empty((element["count"], 3))
        for k in range(element["count"]):
            line_no = cursor + k + 1
            if cursor + k >= len(lines):
                raise PlyParseError(
                    f"顶点数据不足: 期望 {element['count']} 行，实际 {k} 行", line_no
                )
            tokens = lines[cursor + k].split()
            if len(tokens) < len(props):
                raise PlyParseError(f"顶点属性个数不足: {len(tokens)} < {len(props)}", line_no)
            try:
                points[k] = [float(tokens[c]) for c in cols]
            except ValueError:
                raise PlyParseError(f"顶点坐标不是数字: {lines[cursor + k].strip()}", line_no) from None
        cursor += element["count"]

    logger.info(f"[pointcloud] 读取 {path}: {points.shape[0]} 个点")
    return points


def write_ply(path: str | Path, points: np.ndarray):
    """写出 ASCII PLY（只有顶点）"""
    points = np.atleast_2d(np.asarray(points, dtype=float)).reshape(-1, 3)
    header = [
        "ply",
        "format ascii 1.0",
        f"element vertex {points.shape[0]}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    body = [f"{x:.9g} {y:.9g} {z:.9g}" for x, y, z in points]
    Path(path).write_text("\n".join(header + body) + "\n", encoding="utf-8")


def downsample(points: np.ndarray, voxel: float) -> np.ndarray:
    """
    体素降采样：每个被占据的体素保留一个质心

    体素网格以点云包围盒下角减半个体素为原点（open3d 的约定）。
    voxel ≤ 0 时原样返回（拷贝）。
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if voxel <= 0 or points.shape[0] == 0:
        return points.copy()
    pcd = o3d.geometry.PointCloud()
    pcd.points = o3d.utility.Vector3dVector(points)
    reduced = np.asarray(pcd.voxel_down_sample(voxel).points, dtype=float)
    logger.debug(f"[pointcloud] 体素降采样: {points.shape[0]} -> {reduced.shape[0]} (voxel={voxel})")
    return reduced


def half_space_crop(points: np.ndarray, fraction: float, rng: np.random.Generator) -> np.ndarray:
    """
    随机方向的半空间裁剪，返回落在 {x : d·x ≥ τ} 内的点的下标

    τ 取投影的分位点，使保留的点数恰为 round(fraction·N)。
    """
    if not (0.0 <= fraction <= 1.0):
        raise ConfigurationError(f"裁剪比例必须在 [0, 1]: {fraction}")
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    n = points.shape[0]
    k = int(round(fraction * n))
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    if k == 0:
        return np.zeros(0, dtype=int)
    projections = points @ direction
    return np.sort(np.argsort(-projections, kind="stable")[:k])
