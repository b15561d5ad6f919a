"""
异常定义模块
"""
from typing import Optional, Sequence


class SolverError(Exception):
    """求解器异常基类

    category 用于命令行入口生成退出码和诊断类别。
    """

    category = 'solver'

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class InvalidOrderError(SolverError):
    """多项式阶数非法"""

    category = 'config'


class DimensionError(SolverError):
    """数组长度或形状不匹配"""

    category = 'config'


class DegenerateElementError(SolverError):
    """单元映射退化（雅可比非正）"""

    category = 'mesh'

    def __init__(self, message: str, element: Optional[int] = None, node: Optional[Sequence[int]] = None):
        detail = message
        if element is not None:
            detail += f" (单元 {element}"
            if node is not None:
                detail += f", 节点 {tuple(int(i) for i in node)}"
            detail += ")"
        super().__init__(detail)
        self.element = element
        self.node = node


class TopologyError(SolverError):
    """网格拓扑错误"""

    category = 'mesh'


class MeshFormatError(SolverError):
    """网格文件格式错误"""

    category = 'mesh'

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"第{line}行: {message}" if line is not None else message)
        self.line = line


class ConfigError(SolverError):
    """配置错误"""

    category = 'config'

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"第{line}行: {message}" if line is not None else message)
        self.line = line


class SingularSpreadingFactorError(SolverError):
    """铺展系数为零"""

    category = 'config'


class NonphysicalDensityError(SolverError):
    """混合密度非物理"""

    category = 'numerical'

    def __init__(self, message: str, element: Optional[int] = None, node: Optional[Sequence[int]] = None,
                 value: Optional[float] = None):
        detail = message
        if element is not None:
            detail += f" (单元 {element}, 节点 {tuple(int(i) for i in node)}, rho={value:.6e})"
        super().__init__(detail)
        self.element = element
        self.node = node
        self.value = value


class DegenerateWaveError(SolverError):
    """Riemann 解分母为零"""

    category = 'numerical'


class ConvergenceError(SolverError):
    """迭代不收敛"""

    category = 'numerical'

    def __init__(self, message: str, residual: float = float('nan'), iterate=None):
        super().__init__(f"{message} (残差 {residual:.3e})")
        self.residual = residual
        self.iterate = iterate


class InconsistentInflowError(SolverError):
    """入口条件物理上不一致"""

    category = 'config'


class SynthesisError(SolverError):
    """制造解源项与差分校验不一致"""

    category = 'numerical'


class SolverSetupError(SolverError):
    """线性系统准备失败"""

    category = 'numerical'


# 退出码
EXIT_CODES = {
    'config': 2,
    'mesh': 3,
    'numerical': 4,
    'solver': 1,
}


def exit_code_for(error: Exception) -> int:
    """根据异常类别返回退出码

    Args:
        error: 捕获到的异常

    Returns:
        int: 退出码
    """
    if isinstance(error, SolverError):
        return EXIT_CODES.get(error.category, 1)
    return 1
