"""
异常定义模块
库函数抛出这些异常，由调度层和命令层统一捕获
"""


class AcmError(Exception):
    """所有项目异常的基类"""


class ConfigurationError(AcmError, ValueError):
    """配置或参数错误（维度不匹配、非法 eps、未知问题类型等）"""


class IntervalDomainError(AcmError, ValueError):
    """区间运算定义域错误"""


class _LineError(AcmError, ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        self.line_no = line_no
        if line_no is not None:
            message = f"第 {line_no} 行: {message}"
        super().__init__(message)


class PlyParseError(_LineError):
    """PLY 文件格式错误，携带行号"""


class CorrespondenceFormatError(_LineError):
    """对应点 CSV 文件格式错误，携带行号"""
