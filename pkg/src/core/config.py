"""
配置管理模块
负责读取 JSON 配置、命令行覆盖和环境变量，并提供带默认值的类型化访问
"""

import copy
import json
import math
import os
from pathlib import Path

from ..utils.errors import ConfigurationError
from ..utils.log import logger
from .engine import MAX_DEPTH_LIMIT

MAX_THREADS = 64
THREADS_ENV = "ACM_THREADS"
DEFAULT_SWEEP = "0.1:0.9:0.1,0.91:0.95:0.01"
DEFAULT_CORRLESS_SWEEP = "0.2,0.4,0.6,0.8,1.0"

DEFAULT_CONFIG: dict = {
    "engine": {"max_depth": 10, "record_trace": False},
    "bench": {"trials": 100, "seed": 7, "threads": 4, "sweep": DEFAULT_SWEEP},
    "resection1d": {"eps": 0.2, "n_points": 200, "noise_px": 2.0, "focal": 800.0},
    "planar2d": {
        "eps": 0.02,
        "n_points": 100,
        "noise_px": 2.0,
        "focal": 800.0,
        "theta1_range": [-math.pi / 2, math.pi / 2],
        "theta2_range": [-math.pi, math.pi],
    },
    "reg3d_corr": {
        "eps": 0.3,
        "n_points": 1000,
        "noise_sigma": 0.1,
        "restrict_t3": True,
        "box": [-1.0, 1.0],
    },
    "reg3d_corrless": {
        "eps": 0.001,
        "n_points": 100,
        "tau_frac": 0.1,
        "keep": 1000,
        "union_mode": False,
        "voxel": 0.0,
        "restrict_t3": True,
        "box": [-1.0, 1.0],
        "sweep": DEFAULT_CORRLESS_SWEEP,
    },
}


def section_of(problem: str) -> str:
    """问题名到配置段名：reg3d-corr → reg3d_corr"""
    return problem.replace("-", "_")


class ConfigManager:
    """配置管理器"""

    def __init__(self, config: dict | None = None):
        self.config = copy.deepcopy(DEFAULT_CONFIG)
        self._merge(self.config, config or {})
        self._sentinel = object()

    @classmethod
    def from_file(cls, path: str | Path | None) -> "ConfigManager":
        """从 JSON 文件加载，path 为空时使用默认配置"""
        if path is None:
            return cls()
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigurationError(f"读取配置文件失败 {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"配置文件顶层必须是对象: {path}")
        logger.info(f"已加载配置文件 {path}")
        return cls(data)

    @classmethod
    def _merge(cls, base: dict, update: dict):
        for key, value in update.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                cls._merge(base[key], value)
            else:
                base[key] = value

    def _get_nested(self, path: tuple[str, ...], default=None):
        current = self.config.get(path[0], self._sentinel)
        if current is self._sentinel:
            return default
        for key in path[1:]:
            if not isinstance(current, dict):
                return default
            current = current.get(key, self._sentinel)
            if current is self._sentinel:
                return default
        return current

    def _set_nested(self, path: tuple[str, ...], value):
        current = self.config
        for key in path[:-1]:
            child = current.get(key)
            if not isinstance(child, dict):
                child = {}
                current[key] = child
            current = child
        current[path[-1]] = value

    def set_value(self, dotted_key: str, value):
        """按 'section.key' 设置值，None 表示不覆盖"""
        if value is None:
            return
        self._set_nested(tuple(dotted_key.split(".")), value)

    @staticmethod
    def _normalize_bool(value: object, default: bool) -> bool:
        if isinstance(value, bool):
            return value
        if value is None:
            return default
        raw = str(value).strip().lower()
        if raw in {"1", "true", "yes", "on", "enable", "enabled"}:
            return True
        if raw in {"0", "false", "no", "off", "disable", "disabled"}:
            return False
        return default

    @staticmethod
    def _normalize_int(
        value: object,
        default: int,
        *,
        minimum: int | None = None,
        maximum: int | None = None,
    ) -> int:
        try:
            normalized = int(value)
        except (TypeError, ValueError):
            logger.warning(f"无效的整数配置值 {value!r}，使用默认值 {default}")
            normalized = default
        if minimum is not None:
            normalized = max(minimum, normalized)
        if maximum is not None:
            normalized = min(maximum, normalized)
        return normalized

    @staticmethod
    def _normalize_float(value: object, default: float, *, positive: bool = False) -> float:
        try:
            normalized = float(value)
        except (TypeError, ValueError):
            logger.warning(f"无效的数值配置 {value!r}，使用默认值 {default}")
            return default
        if not math.isfinite(normalized) or (positive and normalized <= 0):
            logger.warning(f"配置值 {value!r} 超出范围，使用默认值 {default}")
            return default
        return normalized

    def _normalize_range(self, path: tuple[str, ...], default: list[float]) -> tuple[float, float]:
        raw = self._get_nested(path, default)
        try:
            lo, hi = (float(v) for v in raw)
        except (TypeError, ValueError):
            logger.warning(f"无效的区间配置 {'.'.join(path)}={raw!r}，使用默认值")
            lo, hi = default
        if lo > hi:
            logger.warning(f"区间配置 {'.'.join(path)} 下界大于上界，使用默认值")
            lo, hi = default
        return lo, hi

    def _default(self, path: tuple[str, ...]):
        current = DEFAULT_CONFIG
        for key in path:
            current = current[key]
        return current

    # ------------------------------------------------------------------
    # 引擎
    # ------------------------------------------------------------------

    def get_max_depth(self) -> int:
        return self._normalize_int(
            self._get_nested(("engine", "max_depth"), 10), 10, minimum=0, maximum=MAX_DEPTH_LIMIT
        )

    def get_record_trace(self) -> bool:
        return self._normalize_bool(self._get_nested(("engine", "record_trace")), False)

    # ------------------------------------------------------------------
    # 基准测试
    # ------------------------------------------------------------------

    def get_trials(self) -> int:
        return self._normalize_int(self._get_nested(("bench", "trials"), 100), 100, minimum=1)

    def get_seed(self) -> int:
        return self._normalize_int(self._get_nested(("bench", "seed"), 7), 7, minimum=0)

    def get_threads(self) -> int:
        """工作线程数：环境变量 ACM_THREADS 优先"""
        env_value = os.environ.get(THREADS_ENV)
        raw = env_value if env_value not in (None, "") else self._get_nested(("bench", "threads"), 4)
        return self._normalize_int(raw, 4, minimum=1, maximum=MAX_THREADS)

    def get_sweep(self, problem: str | None = None) -> str:
        if problem is not None:
            specific = self._get_nested((section_of(problem), "sweep"))
            if specific:
                return str(specific)
        return str(self._get_nested(("bench", "sweep"), DEFAULT_SWEEP) or DEFAULT_SWEEP)

    # ------------------------------------------------------------------
    # 问题参数
    # ------------------------------------------------------------------

    def get_eps(self, problem: str) -> float:
        path = (section_of(problem), "eps")
        return self._normalize_float(self._get_nested(path), self._default(path), positive=True)

    def get_n_points(self, problem: str) -> int:
        path = (section_of(problem), "n_points")
        default = self._default(path)
        return self._normalize_int(self._get_nested(path, default), default, minimum=0)

    def get_noise_px(self, problem: str) -> float:
        path = (section_of(problem), "noise_px")
        value = self._normalize_float(self._get_nested(path, 2.0), 2.0)
        return max(0.0, value)

    def get_focal(self, problem: str) -> float:
        path = (section_of(problem), "focal")
        return self._normalize_float(self._get_nested(path, 800.0), 800.0, positive=True)

    def get_noise_sigma(self) -> float:
        value = self._normalize_float(self._get_nested(("reg3d_corr", "noise_sigma"), 0.1), 0.1)
        return max(0.0, value)

    def get_theta1_range(self) -> tuple[float, float]:
        return self._normalize_range(("planar2d", "theta1_range"), [-math.pi / 2, math.pi / 2])

    def get_theta2_range(self) -> tuple[float, float]:
        return self._normalize_range(("planar2d", "theta2_range"), [-math.pi, math.pi])

    def get_restrict_t3(self, problem: str) -> bool:
        return self._normalize_bool(self._get_nested((section_of(problem), "restrict_t3")), True)

    def get_tau_frac(self) -> float:
        return self._normalize_float(
            self._get_nested(("reg3d_corrless", "tau_frac"), 0.1), 0.1, positive=True
        )

    def get_keep(self) -> int:
        return self._normalize_int(
            self._get_nested(("reg3d_corrless", "keep"), 1000), 1000, minimum=1
        )

    def get_union_mode(self) -> bool:
        return self._normalize_bool(self._get_nested(("reg3d_corrless", "union_mode")), False)

    def get_voxel(self) -> float:
        value = self._normalize_float(self._get_nested(("reg3d_corrless", "voxel"), 0.0), 0.0)
        return max(0.0, value)

    def get_ply_path(self) -> str | None:
        value = self._get_nested(("reg3d_corrless", "ply"))
        return str(value) if value else None

    def get_translation_box(self, problem: str) -> tuple[float, float]:
        """基准测试中三维平移搜索盒每一维的范围"""
        return self._normalize_range((section_of(problem), "box"), [-1.0, 1.0])
