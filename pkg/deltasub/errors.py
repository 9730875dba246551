"""
异常定义

库函数只负责抛出，命令层捕获 DeltaSubError 后记录日志并映射为退出码
"""

from typing import Any, Dict, List, Optional


class DeltaSubError(Exception):
    """所有 deltasub 异常的基类"""

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self)}


class NotPositiveDefinite(DeltaSubError):
    """矩阵非正定（Cholesky 主元非正）"""


class NonConvergence(DeltaSubError):
    """Jacobi 扫描预算耗尽仍未收敛"""


class DimensionMismatch(DeltaSubError, ValueError):
    """向量或矩阵维度不一致"""


class InvalidBudget(DeltaSubError, ValueError):
    """预算 k 或试验次数非法"""


class InvalidParameter(DeltaSubError, ValueError):
    """参数超出允许范围"""


class TooLarge(DeltaSubError):
    """地面集规模超过穷举上限"""


class ZeroDenominator(DeltaSubError):
    """
    g_S(a) 为 0 而 f_S(a) 为正，散度无界
    """

    def __init__(self, mask: int, element: int, numerator: float, denominator: float):
        self.mask = mask
        self.element = element
        self.numerator = numerator
        self.denominator = denominator
        super().__init__(
            f"分母为零: S={mask}, a={element}, f_S(a)={numerator:.6g}, g_S(a)={denominator:.6g}"
        )

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update(
            {
                "mask": self.mask,
                "element": self.element,
                "numerator": self.numerator,
                "denominator": self.denominator,
            }
        )
        return data


class AllSingletonsDegenerate(DeltaSubError):
    """所有单元素取值都不超过 ε_den，总曲率无定义"""


class DenominatorDegenerate(DeltaSubError):
    """贪心曲率计算中出现退化分母"""

    def __init__(self, step: int, element: int, denominator: float):
        self.step = step
        self.element = element
        self.denominator = denominator
        super().__init__(
            f"贪心曲率分母退化: i={step}, a={element}, 分母={denominator:.6g}"
        )

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"step": self.step, "element": self.element, "denominator": self.denominator})
        return data


class NoFeasibleSurrogate(DeltaSubError):
    """候选代理函数中没有满足 δ 的"""


class Unbounded(DeltaSubError):
    """δ 上界为无穷（秩一矩阵最小特征值为 0）"""


class Infeasible(DeltaSubError):
    """可行性条件无法成立"""


class WitnessNotFound(DeltaSubError):
    """固定种子的反例搜索在尝试次数内没有找到非子模实例"""


class ConfigError(DeltaSubError, ValueError):
    """配置校验失败，携带逐条错误信息"""

    def __init__(self, messages: List[str]):
        self.messages = list(messages)
        super().__init__("配置校验失败: " + "; ".join(self.messages))

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data["messages"] = self.messages
        return data


class ParseError(DeltaSubError, ValueError):
    """CSV 解析失败，携带行列位置（从 1 开始）"""

    def __init__(self, message: str, line: int, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f"第 {line} 行" + (f" 第 {column} 列" if column is not None else "")
        super().__init__(f"{location}: {message}")

    def to_dict(self) -> Dict[str, Any]:
        data = super().to_dict()
        data.update({"line": self.line, "column": self.column})
        return data


class UnknownSuite(DeltaSubError, ValueError):
    """未知的校验套件名称"""
