"""
CSV 读写
对应点与点集文件：UTF-8，首行为表头，每行一条记录
"""

import csv
from collections.abc import Callable, Iterable, Sequence
from pathlib import Path

import numpy as np

from ..models.data_models import Corr2D2D, Corr3D2D, Corr3D3D
from ..utils.errors import CorrespondenceFormatError
from .pointcloud import load_ply

CORR3D2D_COLUMNS = ("px", "py", "pz", "ux", "uy")
CORR2D2D_COLUMNS = ("u1", "v1", "u2", "v2")
CORR3D3D_COLUMNS = ("px", "py", "pz", "qx", "qy", "qz")
POINT_COLUMNS = ("x", "y", "z")
PLANAR_GT_COLUMNS = ("theta", "phi")


def read_rows(path: str | Path, columns: Sequence[str]) -> np.ndarray:
    """
    读取指定列为浮点矩阵

    Raises:
        CorrespondenceFormatError: 缺列或数值无法解析，携带行号
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise CorrespondenceFormatError("文件为空，缺少表头", 1) from None
        missing = [c for c in columns if c not in header]
        if missing:
            raise CorrespondenceFormatError(f"表头缺少列: {', '.join(missing)}", 1)
        index = [header.index(c) for c in columns]

        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                rows.append([float(row[k]) for k in index])
            except (IndexError, ValueError):
                raise CorrespondenceFormatError(f"无法解析: {','.join(row)}", line_no) from None
    return np.array(rows, dtype=float).reshape(-1, len(columns))


def write_rows(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[float]]):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])


def _reader(columns: Sequence[str], build: Callable[[np.ndarray], object]):
    def read(path: str | Path) -> list:
        return [build(row) for row in read_rows(path, columns)]

    return read


read_corr3d2d_csv = _reader(CORR3D2D_COLUMNS, lambda r: Corr3D2D(p=r[:3], u=r[3:5]))
read_corr2d2d_csv = _reader(CORR2D2D_COLUMNS, lambda r: Corr2D2D(x1=r[:2], x2=r[2:4]))
read_corr3d3d_csv = _reader(CORR3D3D_COLUMNS, lambda r: Corr3D3D(p=r[:3], q=r[3:6]))


def write_corr3d2d_csv(path: str | Path, corrs: list[Corr3D2D]):
    write_rows(path, CORR3D2D_COLUMNS, (np.concatenate([c.p, c.u]) for c in corrs))


def write_corr2d2d_csv(path: str | Path, corrs: list[Corr2D2D]):
    write_rows(path, CORR2D2D_COLUMNS, (np.concatenate([c.x1, c.x2]) for c in corrs))


def write_corr3d3d_csv(path: str | Path, corrs: list[Corr3D3D]):
    write_rows(path, CORR3D3D_COLUMNS, (np.concatenate([c.p, c.q]) for c in corrs))


def read_planar_gt(path: str | Path) -> tuple[float, float]:
    """读取真值 (theta, phi)，取第一行"""
    rows = read_rows(path, PLANAR_GT_COLUMNS)
    if rows.shape[0] == 0:
        raise CorrespondenceFormatError("真值文件没有数据行", 2)
    return float(rows[0, 0]), float(rows[0, 1])


def write_planar_gt(path: str | Path, theta: float, phi: float):
    write_rows(path, PLANAR_GT_COLUMNS, [(theta, phi)])


def read_points_csv(path: str | Path) -> np.ndarray:
    return read_rows(path, POINT_COLUMNS)


def write_points_csv(path: str | Path, points: np.ndarray):
    write_rows(path, POINT_COLUMNS, np.asarray(points, dtype=float).reshape(-1, 3))


def load_points(path: str | Path) -> np.ndarray:
    """按扩展名读取点集：.ply 走 PLY 解析，其它按 CSV"""
    if Path(path).suffix.lower() == ".ply":
        return load_ply(path)
    return read_points_csv(path)
