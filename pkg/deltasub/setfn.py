"""
集合函数

地面集与子集表示、集合函数预言机接口、Gramian 谱目标函数，以及测试用的函数族。
所有内置目标都做了归一化 f(∅) = 0，边际不受影响。
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, Iterator, Sequence, Tuple

import numpy as np

from .const import EPS_MONO, MAX_GROUND_SIZE, TABLE_MAX_N
from .errors import DimensionMismatch, InvalidParameter, NotPositiveDefinite, TooLarge
from .matrixcore import SymMatrix, eigenvalues, log_det, trace_inverse
from .rng import SplitMix64
from . import utils


@dataclass(frozen=True)
class Subset:
    """
    地面集 {0..size-1} 上的子集，bits 为成员掩码
    """

    bits: int
    size: int

    def __post_init__(self):
        if not 0 <= self.size <= MAX_GROUND_SIZE:
            raise InvalidParameter(f"地面集规模须在 [0, {MAX_GROUND_SIZE}] 内: {self.size}")
        if self.bits < 0 or self.bits >> self.size:
            raise InvalidParameter(f"掩码 {self.bits} 含有 ≥ {self.size} 的元素")

    @classmethod
    def empty(cls, size: int) -> "Subset":
        return cls(0, size)

    @classmethod
    def full(cls, size: int) -> "Subset":
        return cls((1 << size) - 1, size)

    @classmethod
    def of(cls, elements: Iterable[int], size: int) -> "Subset":
        bits = 0
        for a in elements:
            if not 0 <= a < size:
                raise InvalidParameter(f"元素 {a} 不在地面集 [0, {size}) 内")
            bits |= 1 << a
        return cls(bits, size)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __contains__(self, a: int) -> bool:
        return bool(self.bits >> a & 1)

    def __iter__(self) -> Iterator[int]:
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def elements(self) -> Tuple[int, ...]:
        return tuple(self)

    def add(self, a: int) -> "Subset":
        return Subset(self.bits | (1 << a), self.size)

    def discard(self, a: int) -> "Subset":
        return Subset(self.bits & ~(1 << a), self.size)

    def union(self, other: "Subset") -> "Subset":
        self._same_ground(other)
        return Subset(self.bits | other.bits, self.size)

    def intersection(self, other: "Subset") -> "Subset":
        self._same_ground(other)
        return Subset(self.bits & other.bits, self.size)

    def difference(self, other: "Subset") -> "Subset":
        self._same_ground(other)
        return Subset(self.bits & ~other.bits, self.size)

    def complement(self) -> "Subset":
        return Subset(((1 << self.size) - 1) & ~self.bits, self.size)

    def issubset(self, other: "Subset") -> bool:
        self._same_ground(other)
        return self.bits & ~other.bits == 0

    def _same_ground(self, other: "Subset"):
        if self.size != other.size:
            raise DimensionMismatch(f"地面集规模不一致: {self.size} != {other.size}")


@dataclass(frozen=True)
class OrderedSelection:
    """
    有序选择 (s_1, …, s_k) 及每步边际增益 A(i)
    """

    elements: Tuple[int, ...]
    gains: Tuple[float, ...]
    size: int

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise InvalidParameter(f"选择中有重复元素: {self.elements}")
        if len(self.elements) != len(self.gains) or len(self.elements) > self.size:
            raise InvalidParameter("元素与增益长度不一致或超过地面集规模")

    def __len__(self) -> int:
        return len(self.elements)

    def prefix(self, i: int) -> Subset:
        """S_G^i，i = 0 时为空集"""
        return Subset.of(self.elements[:i], self.size)

    @property
    def subset(self) -> Subset:
        return self.prefix(len(self.elements))

    @property
    def value(self) -> float:
        return float(sum(self.gains))


def clamp_marginal(value: float) -> float:
    """舍入误差造成的微小负边际截断为 0"""
    if -EPS_MONO <= value < 0.0:
        return 0.0
    return value


class SetFunctionOracle(ABC):
    """
    集合函数预言机：evaluate(S)、marginal(S, a)、ground_size()

    实现须在构造后不可变，可被多个工作线程同时调用
    """

    name = "set-function"

    @abstractmethod
    def ground_size(self) -> int: ...

    @abstractmethod
    def evaluate(self, subset: Subset) -> float: ...

    def marginal(self, subset: Subset, a: int) -> float:
        """f_S(a) = f(S ∪ {a}) − f(S)"""
        if a in subset:
            return 0.0
        return clamp_marginal(self.evaluate(subset.add(a)) - self.evaluate(subset))

    def empty_value(self) -> float:
        """未归一化时在 ∅ 上的取值"""
        return 0.0

    def _check(self, subset: Subset):
        if subset.size != self.ground_size():
            raise DimensionMismatch(
                f"子集地面集规模 {subset.size} 与函数 {self.ground_size()} 不一致"
            )


def marginal_set(f: SetFunctionOracle, s: Subset, t: Subset) -> float:
    """f_S(T) = f(S ∪ T) − f(S)"""
    return f.evaluate(s.union(t)) - f.evaluate(s)


class ModularFunction(SetFunctionOracle):
    """f(S) = Σ w_s"""

    name = "modular"

    def __init__(self, weights: Sequence[float]):
        self.weights = np.asarray(weights, dtype=np.float64)
        if self.weights.ndim != 1 or len(self.weights) > MAX_GROUND_SIZE:
            raise InvalidParameter("权重须为长度不超过 64 的一维序列")
        if np.any(self.weights < 0.0):
            raise InvalidParameter(f"权重不能为负: {self.weights.tolist()}")
        self.weights.setflags(write=False)

    def ground_size(self) -> int:
        return len(self.weights)

    def evaluate(self, subset: Subset) -> float:
        self._check(subset)
        return float(sum(self.weights[a] for a in subset))

    def marginal(self, subset: Subset, a: int) -> float:
        return 0.0 if a in subset else float(self.weights[a])


class ConcaveModular(SetFunctionOracle):
    """
    f(S) = (Σ w_s)^p，p ≤ 1 为子模，p > 1 单调但非子模
    """

    name = "concave-modular"

    def __init__(self, weights: Sequence[float], power: float = 0.5):
        self.modular = ModularFunction(weights)
        if power <= 0:
            raise InvalidParameter(f"幂次须为正: {power}")
        self.power = float(power)

    def ground_size(self) -> int:
        return self.modular.ground_size()

    def evaluate(self, subset: Subset) -> float:
        return self.modular.evaluate(subset) ** self.power


class TabularFunction(SetFunctionOracle):
    """
    按掩码索引的 2^N 取值表，构造时校验 f(∅) = 0 与单调性
    """

    name = "tabular"

    def __init__(self, values: Sequence[float]):
        values = np.array(values, dtype=np.float64)
        size = int(len(values)).bit_length() - 1
        if values.ndim != 1 or len(values) != 1 << size:
            raise InvalidParameter(f"取值表长度须为 2 的幂: {len(values)}")
        if size > TABLE_MAX_N:
            raise TooLarge(f"TabularFunction 最多支持 N = {TABLE_MAX_N}: {size}")
        if values[0] != 0.0:
            raise InvalidParameter(f"f(∅) 须为 0: {values[0]}")
        masks = np.arange(len(values))
        for a in range(size):
            lower = masks[(masks >> a & 1) == 0]
            drop = values[lower | (1 << a)] - values[lower]
            if np.any(drop < -EPS_MONO):
                worst = int(lower[np.argmin(drop)])
                raise InvalidParameter(f"取值表非单调: S={worst}, a={a}, 边际 {drop.min():.6g}")
        values.setflags(write=False)
        self.values = values
        self._size = size

    @classmethod
    def from_csv(cls, path: str) -> "TabularFunction":
        return cls(utils.load_tabular_csv(path))

    def ground_size(self) -> int:
        return self._size

    def evaluate(self, subset: Subset) -> float:
        self._check(subset)
        return float(self.values[subset.bits])


@dataclass(frozen=True)
class GramianModel:
    """
    W_S = β²·I_n + Σ_{s∈S} x_s x_sᵀ，columns 为 n×N 数据矩阵
    """

    columns: np.ndarray
    beta: float
    normalize_columns: bool = False

    def __post_init__(self):
        x = np.array(self.columns, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise DimensionMismatch(f"数据矩阵须为 n×N, 实际形状 {x.shape}")
        if x.shape[1] > MAX_GROUND_SIZE:
            raise TooLarge(f"地面集规模最多 {MAX_GROUND_SIZE}: {x.shape[1]}")
        if not self.beta > 0:
            raise NotPositiveDefinite(f"β 须为正, Λ0 = β²I 才正定: {self.beta}")
        if self.normalize_columns:
            norms = np.linalg.norm(x, axis=0)
            if np.any(norms == 0.0):
                raise InvalidParameter("存在零列，无法归一化")
            x = x / norms
        x.setflags(write=False)
        object.__setattr__(self, "columns", x)
        object.__setattr__(self, "beta", float(self.beta))

    @classmethod
    def from_csv(cls, path: str, beta: float, normalize_columns: bool = False) -> "GramianModel":
        return cls(utils.load_matrix_csv(path), beta, normalize_columns)

    @property
    def n(self) -> int:
        return self.columns.shape[0]

    @property
    def N(self) -> int:
        return self.columns.shape[1]

    def with_beta(self, beta: float) -> "GramianModel":
        """同一组列、不同 β（列已归一化，不再重复处理）"""
        return GramianModel(self.columns, beta, False)

    def base(self) -> SymMatrix:
        return SymMatrix.identity(self.n, self.beta**2)

    def gramian(self, subset: Subset) -> SymMatrix:
        selected = self.columns[:, list(subset)]
        return SymMatrix(self.beta**2 * np.eye(self.n) + selected @ selected.T)

    def singleton_matrix(self, a: int, include_base: bool = True) -> SymMatrix:
        """W_{a}，include_base 为 False 时只取 x_a x_aᵀ"""
        x = self.columns[:, a]
        outer = np.outer(x, x)
        return SymMatrix(self.beta**2 * np.eye(self.n) + outer if include_base else outer)


def random_gramian_model(
    n: int, N: int, beta: float, seed: int, normalize_columns: bool = True
) -> GramianModel:
    """N(0,1) 高斯数据矩阵，按行填充"""
    columns = SplitMix64(seed).normals(n * N).reshape(n, N)
    return GramianModel(columns, beta, normalize_columns)


def random_scaled_gramian_model(n: int, N: int, beta: float, seed: int, decades: float) -> GramianModel:
    """
    方向均匀、列范数在 10^{±decades/2} 内对数均匀的数据矩阵
    """
    rng = SplitMix64(seed)
    directions = rng.normals(n * N).reshape(n, N)
    norms = np.linalg.norm(directions, axis=0)
    if np.any(norms == 0.0):
        raise InvalidParameter("存在零列，无法归一化")
    scales = 10.0 ** (decades * (rng.floats(N) - 0.5))
    return GramianModel(directions / norms * scales, beta)


class GramianObjective(SetFunctionOracle):
    """
    Gramian 谱目标的公共部分：f(S) = h(W_S) − h(W_∅)
    """

    def __init__(self, model: GramianModel):
        self.model = model
        self._offset = self._raw(model.base())

    def _raw(self, matrix: SymMatrix) -> float:
        raise NotImplementedError

    def ground_size(self) -> int:
        return self.model.N

    def evaluate(self, subset: Subset) -> float:
        self._check(subset)
        if not subset.bits:
            return 0.0
        return self._raw(self.model.gramian(subset)) - self._offset

    def empty_value(self) -> float:
        return self._offset


class NegTraceInverse(GramianObjective):
    """Bayesian A-optimality：tr(Λ0⁻¹) − tr(W_S⁻¹)"""

    name = "neg-trace-inv"

    def _raw(self, matrix: SymMatrix) -> float:
        return -trace_inverse(matrix)


class LogDetObjective(GramianObjective):
    """log det(W_S) − log det(Λ0)"""

    name = "log-det"

    def _raw(self, matrix: SymMatrix) -> float:
        return log_det(matrix)


class MinEigenvalue(GramianObjective):
    """λ_1(W_S) − β²"""

    name = "min-eig"

    def _raw(self, matrix: SymMatrix) -> float:
        return eigenvalues(matrix).smallest


class MaxEigenvalue(GramianObjective):
    """λ_n(W_S) − β²"""

    name = "max-eig"

    def _raw(self, matrix: SymMatrix) -> float:
        return eigenvalues(matrix).largest


class TraceObjective(GramianObjective):
    """tr(W_S) − tr(Λ0) = Σ ‖x_s‖²，模函数"""

    name = "trace"

    def __init__(self, model: GramianModel):
        super().__init__(model)
        self._weights = np.sum(model.columns**2, axis=0)

    def _raw(self, matrix: SymMatrix) -> float:
        return matrix.trace()

    def evaluate(self, subset: Subset) -> float:
        self._check(subset)
        return float(sum(self._weights[a] for a in subset))

    def marginal(self, subset: Subset, a: int) -> float:
        return 0.0 if a in subset else float(self._weights[a])


def neg_trace_inv(model: GramianModel) -> SetFunctionOracle:
    return NegTraceInverse(model)


def log_det_objective(model: GramianModel) -> SetFunctionOracle:
    return LogDetObjective(model)


def min_eig_objective(model: GramianModel) -> SetFunctionOracle:
    return MinEigenvalue(model)


def max_eig_objective(model: GramianModel) -> SetFunctionOracle:
    return MaxEigenvalue(model)


def trace_objective(model: GramianModel) -> SetFunctionOracle:
    return TraceObjective(model)


def modular_objective(weights: Sequence[float]) -> SetFunctionOracle:
    return ModularFunction(weights)


# CLI 名称到构造函数的映射
OBJECTIVES: Dict[str, Callable[[GramianModel], SetFunctionOracle]] = {
    "neg-trace-inv": neg_trace_inv,
    "min-eig": min_eig_objective,
    "log-det": log_det_objective,
    "trace": trace_objective,
    "max-eig": max_eig_objective,
}


def tabulate(f: SetFunctionOracle) -> np.ndarray:
    """
    全部 2^N 个子集的取值表（N ≤ 16）
    """
    if isinstance(f, TabularFunction):
        return f.values
    size = f.ground_size()
    if size > TABLE_MAX_N:
        raise TooLarge(f"穷举取值表最多支持 N = {TABLE_MAX_N}: {size}")
    values = np.fromiter(
        (f.evaluate(Subset(mask, size)) for mask in range(1 << size)),
        dtype=np.float64,
        count=1 << size,
    )
    values.setflags(write=False)
    return values


def random_monotone_table(size: int, seed: int) -> TabularFunction:
    """
    随机严格单调取值表：f(S) = max_{a∈S} f(S∖a) + u，u ∈ (0, 1]
    """
    rng = SplitMix64(seed)
    values = np.zeros(1 << size)
    for mask in range(1, 1 << size):
        best = max(values[mask & ~(1 << a)] for a in range(size) if mask >> a & 1)
        values[mask] = best + (1.0 - rng.next_float())
    return TabularFunction(values)
