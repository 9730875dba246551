"""
求解器：贪心选择、穷举最优解、随机基线
"""

from dataclasses import dataclass
from itertools import combinations
from typing import List, Optional, Tuple

import numpy as np

from .const import EXHAUSTIVE_OPT_MAX_N
from .errors import InvalidBudget, TooLarge
from .rng import SplitMix64
from .setfn import OrderedSelection, SetFunctionOracle, Subset
from . import logger


@dataclass(frozen=True)
class GreedyTrace:
    """
    贪心轨迹，candidate_values[i] 为第 i 步所有候选的边际（已选元素为 nan）
    """

    selection: OrderedSelection
    candidate_values: Optional[Tuple[np.ndarray, ...]] = None

    def __len__(self) -> int:
        return len(self.selection)

    @property
    def value(self) -> float:
        return self.selection.value


@dataclass(frozen=True)
class OptResult:
    best_set: Subset
    best_value: float


@dataclass(frozen=True)
class BaselineSummary:
    """随机 k 子集取值的分布摘要，samples 为 (掩码, 取值)"""

    k: int
    trials: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float
    samples: Tuple[Tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "trials": self.trials,
            "min": self.minimum,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.maximum,
            "mean": self.mean,
        }


def _check_budget(f: SetFunctionOracle, k: int):
    size = f.ground_size()
    if not 1 <= k <= size:
        raise InvalidBudget(f"预算 k 须在 [1, {size}] 内: {k}")


def greedy(f: SetFunctionOracle, k: int, record_candidates: bool = False) -> GreedyTrace:
    """
    贪心选择：每步取边际最大的元素，并列时取下标最小者

    Args:
        f: 集合函数
        k: 预算，1 ≤ k ≤ N
        record_candidates: 是否记录每步全部候选边际

    Raises:
        InvalidBudget: k 越界
    """
    _check_budget(f, k)
    size = f.ground_size()
    current = Subset.empty(size)
    elements: List[int] = []
    gains: List[float] = []
    candidates: List[np.ndarray] = []

    for _ in range(k):
        best_a, best_gain = -1, -np.inf
        row = np.full(size, np.nan)
        for a in range(size):
            if a in current:
                continue
            gain = f.marginal(current, a)
            row[a] = gain
            # 严格大于，保证并列时保留最小下标
            if gain > best_gain:
                best_a, best_gain = a, gain
        elements.append(best_a)
        gains.append(float(best_gain))
        current = current.add(best_a)
        if record_candidates:
            row.setflags(write=False)
            candidates.append(row)

    selection = OrderedSelection(tuple(elements), tuple(gains), size)
    logger.debug(f"贪心完成 {f.name}: 选择 {selection.elements}, 取值 {selection.value:.6g}")
    return GreedyTrace(selection, tuple(candidates) if record_candidates else None)


def exhaustive_opt(f: SetFunctionOracle, k: int) -> OptResult:
    """
    枚举所有 |S| = k 的子集求 OPT，并列时取掩码最小者

    Raises:
        TooLarge: N 超过枚举上限
        InvalidBudget: k 越界
    """
    size = f.ground_size()
    if size > EXHAUSTIVE_OPT_MAX_N:
        raise TooLarge(f"穷举最优解最多支持 N = {EXHAUSTIVE_OPT_MAX_N}: {size}")
    _check_budget(f, k)

    best_mask, best_value = -1, -np.inf
    for combo in combinations(range(size), k):
        subset = Subset.of(combo, size)
        value = f.evaluate(subset)
        if value > best_value or (value == best_value and subset.bits < best_mask):
            best_mask, best_value = subset.bits, value
    return OptResult(Subset(best_mask, size), float(best_value))


def random_baseline(f: SetFunctionOracle, k: int, trials: int, seed: int) -> BaselineSummary:
    """
    均匀抽取 trials 个 k 子集（Fisher–Yates 部分洗牌），汇总 f 的分布

    分位数取样本中的实际值（inverted_cdf），同一种子结果确定
    """
    _check_budget(f, k)
    if trials < 1:
        raise InvalidBudget(f"试验次数须 ≥ 1: {trials}")
    size = f.ground_size()
    rng = SplitMix64(seed)
    samples = []
    for _ in range(trials):
        subset = Subset.of(rng.sample_subset(size, k), size)
        samples.append((subset.bits, f.evaluate(subset)))
    values = np.array([value for _, value in samples])
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75], method="inverted_cdf")
    return BaselineSummary(
        k=k,
        trials=trials,
        minimum=float(values.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        maximum=float(values.max()),
        mean=float(values.mean()),
        samples=tuple(samples),
    )
