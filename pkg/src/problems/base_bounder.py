"""
Bounder 抽象类
定义分支定界引擎需要的上下界接口
"""

from abc import ABC, abstractmethod

import numpy as np

from ..models.data_models import BoundEval, Cube
from ..utils.errors import ConfigurationError


class BaseBounder(ABC):
    """
    上下界计算器抽象类

    upper(cube) 不小于 cube 内（ACM 时另一维自由）可达到的最大一致集大小；
    lower(cube) 返回一个真实可达的一致集大小及达到它的完整参数。
    """

    #: 分支空间维度
    n_branch: int = 1

    def __init__(self, eps: float):
        """
        Args:
            eps: 内点阈值，残差 ≤ eps 视为内点
        """
        if not eps > 0:
            raise ConfigurationError(f"eps 必须为正数: {eps}")
        self.eps = float(eps)

    @abstractmethod
    def lower(self, cube: Cube) -> tuple[int, np.ndarray]:
        """
        计算下界

        Returns:
            (一致集大小, 完整参数向量)
        """

    @abstractmethod
    def upper(self, cube: Cube) -> int:
        """计算上界"""

    @property
    @abstractmethod
    def n_samples(self) -> int:
        """约束数量"""

    def evaluate(self, cube: Cube) -> BoundEval:
        """同时计算上下界，供检查和调试使用"""
        lower, witness = self.lower(cube)
        return BoundEval(lower=lower, lower_witness=witness, upper=self.upper(cube))
