import numpy as np
import pytest

from src.core.config import ConfigManager
from src.models.data_models import BoundEval, Cube
from src.problems.base_bounder import BaseBounder


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


@pytest.fixture
def config_manager(monkeypatch) -> ConfigManager:
    """小规模配置：少量点、浅深度、单线程"""
    monkeypatch.delenv("ACM_THREADS", raising=False)
    return ConfigManager(
        {
            "engine": {"max_depth": 8},
            "bench": {"trials": 2, "seed": 11, "threads": 2},
            "resection1d": {"n_points": 40},
            "planar2d": {"n_points": 30},
            "reg3d_corr": {"n_points": 40, "noise_sigma": 0.0, "eps": 0.05},
            "reg3d_corrless": {"n_points": 20, "keep": 60, "eps": 0.01},
        }
    )


@pytest.fixture
def count_in_grid():
    """在参数网格上直接计数，用作穷举对照"""

    def _count(residual_fn, grids, eps):
        mesh = np.meshgrid(*grids, indexing="ij")
        points = np.stack([m.ravel() for m in mesh], axis=1)
        best = 0
        for point in points:
            best = max(best, int(np.count_nonzero(residual_fn(point) <= eps)))
        return best

    return _count


class RecordingBounder(BaseBounder):
    """包装一个 Bounder，记录引擎每次出队时对 Cube 的完整评估"""

    def __init__(self, inner: BaseBounder):
        super().__init__(inner.eps)
        self.inner = inner
        self.n_branch = inner.n_branch
        self.visited: list[tuple[Cube, BoundEval]] = []

    @property
    def n_samples(self) -> int:
        return self.inner.n_samples

    def lower(self, cube):
        evaluation = self.inner.evaluate(cube)
        self.visited.append((cube, evaluation))
        return evaluation.lower, evaluation.lower_witness

    def upper(self, cube):
        return self.inner.upper(cube)


@pytest.fixture
def recording():
    return RecordingBounder
