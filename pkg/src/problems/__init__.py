"""
问题模块
各几何视觉问题的约束构造与上下界计算
"""

from .base_bounder import BaseBounder
from .planar2d import Acm1Bounder, Plain2DBounder
from .reg3d import (
    Acm2CorrBounder,
    Acm2CorrlessBounder,
    Plain3DCorrBounder,
    Plain3DCorrlessBounder,
)
from .resection1d import Plain1DBounder

__all__ = [
    "BaseBounder",
    "Plain1DBounder",
    "Plain2DBounder",
    "Acm1Bounder",
    "Plain3DCorrBounder",
    "Acm2CorrBounder",
    "Plain3DCorrlessBounder",
    "Acm2CorrlessBounder",
]
