"""
子模性接近程度度量

散度、子模比、总曲率/广义曲率/贪心曲率、穷举子模性检验、ROS 成员判定、
三个命题的 δ 界、α_δ 选择，以及贪心逐步不等式检查。

穷举路径先把 f 展开成 2^N 取值表，再在表上做向量化的 min/max 归约，
结果与划分方式无关。
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .const import (
    CHECK_TOL,
    EPS_DEN,
    EPS_MONO,
    EXHAUSTIVE_OPT_MAX_N,
    PAIR_MAX_N,
    TABLE_MAX_N,
    WITNESS_MIN_GAP,
)
from .errors import (
    AllSingletonsDegenerate,
    DenominatorDegenerate,
    DimensionMismatch,
    InvalidParameter,
    NoFeasibleSurrogate,
    TooLarge,
    Unbounded,
    ZeroDenominator,
)
from .matrixcore import eigenvalues
from .rng import SplitMix64
from .setfn import (
    OBJECTIVES,
    GramianModel,
    SetFunctionOracle,
    Subset,
    random_gramian_model,
    random_scaled_gramian_model,
    tabulate,
)
from .solvers import GreedyTrace, OptResult, exhaustive_opt, greedy
from . import logger

INCLUDE_BASE = "include-base"
RANK1_ONLY = "rank1-only"
INTERPRETATIONS = (INCLUDE_BASE, RANK1_ONLY)


# ===== 取值表工具 =====
def _same_ground(f: SetFunctionOracle, g: SetFunctionOracle) -> int:
    if f.ground_size() != g.ground_size():
        raise DimensionMismatch(f"地面集规模不一致: {f.ground_size()} != {g.ground_size()}")
    return f.ground_size()


def _guard(size: int, limit: int, what: str):
    if size > limit:
        raise TooLarge(f"{what} 的穷举路径最多支持 N = {limit}: {size}")


def _marginal_table(values: np.ndarray, size: int, clamp: bool = True) -> np.ndarray:
    """
    (2^N, N) 边际表，a ∈ S 处为 nan
    """
    masks = np.arange(1 << size)
    table = np.full((1 << size, size), np.nan)
    for a in range(size):
        lower = masks[(masks >> a & 1) == 0]
        diff = values[lower | (1 << a)] - values[lower]
        if clamp:
            diff = np.where((diff < 0.0) & (diff >= -EPS_MONO), 0.0, diff)
        table[lower, a] = diff
    return table


def _bit_matrix(size: int) -> np.ndarray:
    masks = np.arange(1 << size)
    return ((masks[:, None] >> np.arange(size)) & 1).astype(np.float64)


# ===== δ 界 =====
class DeltaForm(str, Enum):
    SYMMETRIC = "symmetric"
    ASYMMETRIC = "asymmetric"
    ONE_SIDED = "one-sided"


@dataclass(frozen=True)
class DeltaBounds:
    """
    δ_l·g_S(a) ≤ f_S(a) ≤ δ_u·g_S(a)，form 对应三种近似结构
    """

    delta_l: float
    delta_u: float
    form: DeltaForm = DeltaForm.ASYMMETRIC
    delta: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.delta_l) and math.isfinite(self.delta_u)):
            raise InvalidParameter(f"δ 界须有限: ({self.delta_l}, {self.delta_u})")
        if self.delta_l < 0.0 or self.delta_u <= 0.0 or self.delta_u < self.delta_l:
            raise InvalidParameter(
                f"须满足 0 ≤ δ_l ≤ δ_u 且 δ_u > 0: ({self.delta_l}, {self.delta_u})"
            )

    @classmethod
    def symmetric(cls, delta: float) -> "DeltaBounds":
        if not 0.0 <= delta < 1.0:
            raise InvalidParameter(f"对称形式要求 δ ∈ [0, 1): {delta}")
        return cls(1.0 - delta, 1.0 + delta, DeltaForm.SYMMETRIC, float(delta))

    @classmethod
    def asymmetric(cls, delta_l: float, delta_u: float) -> "DeltaBounds":
        return cls(float(delta_l), float(delta_u), DeltaForm.ASYMMETRIC)

    @classmethod
    def one_sided(cls, delta: float) -> "DeltaBounds":
        if not delta >= 1.0:
            raise InvalidParameter(f"单边形式要求 δ ≥ 1: {delta}")
        return cls(1.0, float(delta), DeltaForm.ONE_SIDED, float(delta))

    @property
    def ratio(self) -> float:
        """r = δ_l / δ_u"""
        return self.delta_l / self.delta_u

    @property
    def spread(self) -> float:
        """与对称形式可比的单一 δ：max(δ_u − 1, 1 − δ_l)"""
        if self.form is DeltaForm.SYMMETRIC:
            return self.delta
        return max(self.delta_u - 1.0, 1.0 - self.delta_l)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "form": self.form.value,
            "delta": self.delta,
            "delta_l": self.delta_l,
            "delta_u": self.delta_u,
        }


# ===== 散度 =====
def _divergence_pair(fm: float, gm: float, mask: int, a: int) -> Optional[float]:
    if gm <= EPS_DEN:
        if fm > EPS_DEN:
            raise ZeroDenominator(mask, a, fm, gm)
        return None
    return abs(fm / gm - 1.0)


def divergence_exact(f: SetFunctionOracle, g: SetFunctionOracle) -> float:
    """
    d(f, g) = max_{S, a∉S} |f_S(a)/g_S(a) − 1|

    Raises:
        ZeroDenominator: g_S(a) ≤ ε_den 而 f_S(a) > ε_den
    """
    size = _same_ground(f, g)
    _guard(size, TABLE_MAX_N, "divergence")
    fm = _marginal_table(tabulate(f), size)
    gm = _marginal_table(tabulate(g), size)
    valid = ~np.isnan(fm)
    flat_g = np.where(valid, gm, np.inf)
    flat_f = np.where(valid, fm, 0.0)
    blow = (flat_g <= EPS_DEN) & (flat_f > EPS_DEN)
    if np.any(blow):
        mask, a = map(int, np.argwhere(blow)[0])
        raise ZeroDenominator(mask, a, float(fm[mask, a]), float(gm[mask, a]))
    use = valid & (flat_g > EPS_DEN)
    if not np.any(use):
        return 0.0
    return float(np.max(np.abs(fm[use] / gm[use] - 1.0)))


def divergence_sampled(f: SetFunctionOracle, g: SetFunctionOracle, samples: int, seed: int) -> float:
    """
    随机 (S, a) 对上的散度，是 d(f, g) 的下界；S 在全部子集上均匀，a 在补集上均匀
    """
    size = _same_ground(f, g)
    if samples < 1:
        raise InvalidParameter(f"采样数须 ≥ 1: {samples}")
    rng = SplitMix64(seed)
    best = 0.0
    drawn = 0
    while drawn < samples:
        subset = Subset(rng.random_mask(size), size)
        free = subset.complement().elements()
        if not free:
            continue
        a = free[rng.next_below(len(free))]
        drawn += 1
        value = _divergence_pair(f.marginal(subset, a), g.marginal(subset, a), subset.bits, a)
        if value is not None and value > best:
            best = value
    return best


# ===== 子模比与子模性 =====
def submodularity_ratio_exact(f: SetFunctionOracle) -> float:
    """
    γ_f = min_{S,T: f_S(T) > ε_den} Σ_{t∈T∖S} f_S(t) / f_S(T)

    没有正分母的对时返回 1；结果 > 1 + 1e-9 只记录警告，不截断
    """
    size = f.ground_size()
    _guard(size, PAIR_MAX_N, "submodularity ratio")
    values = tabulate(f)
    marg = np.nan_to_num(_marginal_table(values, size), nan=0.0)
    bits = _bit_matrix(size)
    masks = np.arange(1 << size)

    best = math.inf
    for s in range(1 << size):
        numerator = bits[masks & ~s] @ marg[s]
        denominator = values[masks | s] - values[s]
        ok = denominator > EPS_DEN
        if not np.any(ok):
            continue
        ratio = float(np.min(numerator[ok] / denominator[ok]))
        if ratio < best:
            best = ratio
    if best == math.inf:
        return 1.0
    if best > 1.0 + CHECK_TOL:
        logger.warning(f"子模比 {best:.12g} > 1，单调函数不应出现")
    return best


@dataclass(frozen=True)
class SubmodularityCheck:
    """穷举检验结果；失败时 witness = (S, T, a)，S ⊆ T，a ∉ T"""

    is_submodular: bool
    witness: Optional[Tuple[int, int, int]] = None
    violation: float = 0.0

    def __bool__(self) -> bool:
        return self.is_submodular

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"is_submodular": self.is_submodular}
        if self.witness is not None:
            s, t, a = self.witness
            data["witness"] = {"S": s, "T": t, "a": a}
            data["violation"] = self.violation
        return data


def is_submodular_bruteforce(f: SetFunctionOracle, tol: float = CHECK_TOL) -> SubmodularityCheck:
    """
    边际递减形式：对所有 S ⊆ T、a ∉ T 检查 f_S(a) ≥ f_T(a) − tol
    """
    size = f.ground_size()
    _guard(size, TABLE_MAX_N, "submodularity test")
    marg = _marginal_table(tabulate(f), size)
    masks = np.arange(1 << size)
    # subset_min[T, a] = min_{S⊆T} f_S(a)
    subset_min = np.where(np.isnan(marg), np.inf, marg)
    for b in range(size):
        upper = masks[(masks >> b & 1) == 1]
        subset_min[upper] = np.minimum(subset_min[upper], subset_min[upper ^ (1 << b)])
    gap = np.where(np.isnan(marg), -np.inf, marg - subset_min)
    if not np.any(gap > tol):
        return SubmodularityCheck(True)

    t, a = map(int, np.unravel_index(np.argmax(gap), gap.shape))
    target = subset_min[t, a]
    s = t
    while True:
        if marg[s, a] == target:
            break
        if s == 0:
            break
        s = (s - 1) & t
    return SubmodularityCheck(False, (s, t, a), float(gap[t, a]))


def is_monotone(
    f: SetFunctionOracle, tol: float = EPS_MONO, samples: int = 20000, seed: int = 0
) -> Optional[Tuple[int, int, float]]:
    """
    单调性检查，N ≤ 12 时穷举，否则随机采样；返回 (S, a, 边际) 反例或 None
    """
    size = f.ground_size()
    if size <= PAIR_MAX_N:
        marg = _marginal_table(tabulate(f), size, clamp=False)
        filled = np.where(np.isnan(marg), np.inf, marg)
        if np.min(filled) >= -tol:
            return None
        mask, a = map(int, np.unravel_index(np.argmin(filled), filled.shape))
        return mask, a, float(marg[mask, a])
    rng = SplitMix64(seed)
    for _ in range(samples):
        subset = Subset(rng.random_mask(size), size)
        free = subset.complement().elements()
        if not free:
            continue
        a = free[rng.next_below(len(free))]
        value = f.evaluate(subset.add(a)) - f.evaluate(subset)
        if value < -tol:
            return subset.bits, a, value
    return None


def lemma1_min_delta(gamma_f: float) -> float:
    """f 可被 δ-近似的必要条件 δ ≥ (1 − γ_f)/(1 + γ_f)"""
    if not -CHECK_TOL <= gamma_f <= 1.0 + CHECK_TOL:
        raise InvalidParameter(f"γ_f 须在 [0, 1] 内: {gamma_f}")
    gamma_f = min(max(gamma_f, 0.0), 1.0)
    return (1.0 - gamma_f) / (1.0 + gamma_f)


# ===== 曲率 =====
def total_curvature(g: SetFunctionOracle, empty_value: float = 0.0) -> float:
    """
    α_T = 1 − min_a g_{Ω∖a}(a) / g_∅(a)，O(N) 次预言机调用

    Args:
        g: 集合函数
        empty_value: g 未归一化时在 ∅ 上的取值；非零时分母为单点取值 g({a})

    Raises:
        AllSingletonsDegenerate: 所有单点分母 ≤ ε_den
    """
    size = g.ground_size()
    full = Subset.full(size)
    ratios = []
    skipped = []
    for a in range(size):
        denominator = g.evaluate(Subset.of([a], size)) + empty_value
        if denominator <= EPS_DEN:
            skipped.append(a)
            continue
        ratios.append(g.marginal(full.discard(a), a) / denominator)
    if skipped:
        logger.warning(f"总曲率跳过单点取值退化的元素: {skipped}")
    if not ratios:
        raise AllSingletonsDegenerate(f"{g.name}: 所有单点取值都 ≤ {EPS_DEN}")
    return 1.0 - min(ratios)


def generalized_curvature_exact(f: SetFunctionOracle) -> float:
    """
    α = 1 − min f_{(S∖s)∪T}(s) / f_{S∖s}(s)，对所有 S、T、s ∈ S∖T

    记 R = S∖s、U = R ∪ T，分子取 U ⊇ R 且 s ∉ U 上的最小边际（超集最小值 DP）
    """
    size = f.ground_size()
    _guard(size, TABLE_MAX_N, "generalized curvature")
    marg = _marginal_table(tabulate(f), size)
    masks = np.arange(1 << size)
    superset_min = np.where(np.isnan(marg), np.inf, marg)
    for b in range(size):
        lower = masks[(masks >> b & 1) == 0]
        superset_min[lower] = np.minimum(superset_min[lower], superset_min[lower | (1 << b)])
    use = ~np.isnan(marg) & (np.nan_to_num(marg, nan=0.0) > EPS_DEN)
    if not np.any(use):
        return 0.0
    return float(1.0 - np.min(superset_min[use] / marg[use]))


@dataclass(frozen=True)
class GreedyCurvature:
    """
    贪心曲率；first_term / second_term 为两个内层最小比值（范围为空时为 None）
    """

    value: float
    first_term: Optional[float]
    second_term: Optional[float]

    def to_dict(self) -> Dict[str, Any]:
        return {"alpha_greedy": self.value, "first_term": self.first_term, "second_term": self.second_term}


def greedy_curvature(f: SetFunctionOracle, trace: GreedyTrace, opt: OptResult) -> GreedyCurvature:
    """
    α_G = 1 − min_i { min_{a∈S_G∖(S_G^{i−1}∪Ω*)} f_{S_G^{i−1}∪Ω*}(a)/f_{S_G^{i−1}}(a),
                      min_{a∈(S_G∩Ω*)∖S_G^{i−1}, i≤j≤k} f_{S_G^{j−1}}(s_j)/f_{S_G^{i−1}}(a) }

    Raises:
        DenominatorDegenerate: 某个必需分母 ≤ ε_den
    """
    selection = trace.selection
    k = len(selection)
    if len(opt.best_set) != k:
        raise InvalidParameter(f"|S_G| = {k} 与 |Ω*| = {len(opt.best_set)} 不一致")
    chosen = selection.subset
    optimum = opt.best_set
    gains = selection.gains

    first = math.inf
    second = math.inf
    for i in range(1, k + 1):
        prev = selection.prefix(i - 1)
        with_opt = prev.union(optimum)
        for a in chosen.difference(with_opt):
            denominator = f.marginal(prev, a)
            if denominator <= EPS_DEN:
                raise DenominatorDegenerate(i, a, denominator)
            first = min(first, f.marginal(with_opt, a) / denominator)
        tail = min(gains[i - 1 :])
        for a in chosen.intersection(optimum).difference(prev):
            denominator = f.marginal(prev, a)
            if denominator <= EPS_DEN:
                raise DenominatorDegenerate(i, a, denominator)
            second = min(second, tail / denominator)

    best = min(first, second)
    return GreedyCurvature(
        value=0.0 if best == math.inf else 1.0 - best,
        first_term=None if first == math.inf else first,
        second_term=None if second == math.inf else second,
    )


# ===== ROS =====
@dataclass(frozen=True)
class RosReport:
    member: bool
    g_submodular: bool
    g_monotone: bool
    gamma_f: float
    lower_bound: float
    divergence: float
    delta: float
    reason: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "member": self.member,
            "g_submodular": self.g_submodular,
            "g_monotone": self.g_monotone,
            "gamma_f": self.gamma_f,
            "lemma1_min_delta": self.lower_bound,
            "divergence": self.divergence,
            "delta": self.delta,
            "reason": self.reason,
        }


def ros_membership(f: SetFunctionOracle, g: SetFunctionOracle, delta: float) -> RosReport:
    """
    g ∈ ROS(δ) 当且仅当 g 子模、单调，且 (1−γ_f)/(1+γ_f) ≤ d(f, g) ≤ δ
    """
    size = _same_ground(f, g)
    _guard(size, PAIR_MAX_N, "ROS membership")
    submodular = is_submodular_bruteforce(g).is_submodular
    monotone = is_monotone(g) is None
    gamma_f = submodularity_ratio_exact(f)
    lower = lemma1_min_delta(gamma_f)
    divergence = divergence_exact(f, g)

    if not submodular:
        reason = "g 非子模"
    elif not monotone:
        reason = "g 非单调"
    elif divergence < lower - CHECK_TOL:
        reason = f"d(f,g) = {divergence:.6g} < (1−γ_f)/(1+γ_f) = {lower:.6g}"
    elif divergence > delta + CHECK_TOL:
        reason = f"d(f,g) = {divergence:.6g} > δ = {delta:.6g}"
    else:
        reason = "ok"
    return RosReport(reason == "ok", submodular, monotone, gamma_f, lower, divergence, delta, reason)


# ===== 命题的 δ 界 =====
def _check_interp(interp: str):
    if interp not in INTERPRETATIONS:
        raise InvalidParameter(f"未知的 W_ω 解释: {interp}, 可选 {INTERPRETATIONS}")


def _singleton_extremes(model: GramianModel, interp: str) -> List[Tuple[float, float]]:
    """每个 ω 的 (λ_1(W_ω), λ_n(W_ω))，秩亏造成的舍入级 λ_1 记为 0"""
    _check_interp(interp)
    extremes = []
    for omega in range(model.N):
        spectrum = eigenvalues(model.singleton_matrix(omega, interp == INCLUDE_BASE))
        low, high = spectrum.smallest, spectrum.largest
        if high <= EPS_DEN:
            raise Unbounded(f"λ_n(W_{omega}) = {high:.3g} ≤ ε_den，比值无定义")
        if low <= EPS_DEN * max(1.0, high):
            low = 0.0
        extremes.append((low, high))
    return extremes


def delta_bounds_prop1(model: GramianModel) -> DeltaBounds:
    """
    负逆迹相对 log det：δ_u = 1/λ_1(W_∅)，δ_l = 1/λ_n(W_Ω)
    """
    delta_u = 1.0 / eigenvalues(model.base()).smallest
    delta_l = 1.0 / eigenvalues(model.gramian(Subset.full(model.N))).largest
    if delta_l > delta_u:
        raise InvalidParameter(f"δ_l = {delta_l} > δ_u = {delta_u}")
    return DeltaBounds.asymmetric(delta_l, delta_u)


def delta_bounds_prop2(model: GramianModel, interp: str = INCLUDE_BASE) -> DeltaBounds:
    """
    最小特征值相对迹（模函数）：
    δ_u = 1 − ((n−1)/n)·min λ_1/λ_n，δ_l = (1/n)·min λ_1/λ_n
    """
    ratio = min(low / high for low, high in _singleton_extremes(model, interp))
    n = model.n
    return DeltaBounds.asymmetric(ratio / n, 1.0 - (n - 1) / n * ratio)


def delta_bounds_prop3(model: GramianModel, interp: str = INCLUDE_BASE) -> DeltaBounds:
    """
    最小特征值相对最大特征值：δ_u = max λ_n/λ_1，δ_l = min λ_1/λ_n

    Raises:
        Unbounded: 某个 λ_1(W_ω) 为 0（rank1-only 且 n ≥ 2）
    """
    extremes = _singleton_extremes(model, interp)
    if any(low == 0.0 for low, _ in extremes):
        raise Unbounded("λ_1(W_ω) = 0，δ_u 为无穷")
    delta_u = max(high / low for low, high in extremes)
    delta_l = min(low / high for low, high in extremes)
    return DeltaBounds.asymmetric(delta_l, delta_u)


@dataclass(frozen=True)
class SandwichCheck:
    holds: bool
    pairs: int
    violations: int
    worst: Optional[Dict[str, Any]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"holds": self.holds, "pairs": self.pairs, "violations": self.violations, "worst": self.worst}


def verify_sandwich(
    f: SetFunctionOracle, g: SetFunctionOracle, bounds: DeltaBounds, tol: float = CHECK_TOL
) -> SandwichCheck:
    """
    穷举检查 δ_l·g_S(a) ≤ f_S(a) ≤ δ_u·g_S(a)，两侧容差 tol
    """
    size = _same_ground(f, g)
    _guard(size, TABLE_MAX_N, "sandwich check")
    fm = _marginal_table(tabulate(f), size)
    gm = _marginal_table(tabulate(g), size)
    valid = ~np.isnan(fm)
    excess = np.maximum(bounds.delta_l * gm - fm, fm - bounds.delta_u * gm)
    excess = np.where(valid, excess, -np.inf)
    bad = excess > tol
    violations = int(np.sum(bad))
    worst = None
    if violations:
        mask, a = map(int, np.unravel_index(np.argmax(excess), excess.shape))
        worst = {
            "S": mask,
            "a": a,
            "f_marginal": float(fm[mask, a]),
            "g_marginal": float(gm[mask, a]),
            "excess": float(excess[mask, a]),
        }
    return SandwichCheck(violations == 0, int(np.sum(valid)), violations, worst)


def empirical_delta_bounds(f: SetFunctionOracle, g: SetFunctionOracle) -> DeltaBounds:
    """
    穷举得到最紧的 δ_l = min f_S(a)/g_S(a)、δ_u = max f_S(a)/g_S(a)

    Raises:
        ZeroDenominator: g_S(a) ≤ ε_den 而 f_S(a) > ε_den
        Unbounded: 没有正分母，或比值全为 0
    """
    size = _same_ground(f, g)
    _guard(size, TABLE_MAX_N, "empirical δ bounds")
    fm = _marginal_table(tabulate(f), size)
    gm = _marginal_table(tabulate(g), size)
    valid = ~np.isnan(fm)
    flat_g = np.where(valid, gm, np.inf)
    flat_f = np.where(valid, fm, 0.0)
    blow = (flat_g <= EPS_DEN) & (flat_f > EPS_DEN)
    if np.any(blow):
        mask, a = map(int, np.argwhere(blow)[0])
        raise ZeroDenominator(mask, a, float(fm[mask, a]), float(gm[mask, a]))
    use = valid & (flat_g > EPS_DEN)
    if not np.any(use):
        raise Unbounded("g 的边际全部退化，δ 界无定义")
    ratios = fm[use] / gm[use]
    delta_l, delta_u = max(float(np.min(ratios)), 0.0), float(np.max(ratios))
    if delta_u <= 0.0:
        raise Unbounded("f 的边际全为 0，δ_u 无定义")
    return DeltaBounds.asymmetric(delta_l, delta_u)


# ===== α_δ =====
def alpha_delta(
    f: SetFunctionOracle,
    candidates: Sequence[Tuple[SetFunctionOracle, DeltaBounds]],
    delta: float,
    exact_threshold: int = PAIR_MAX_N,
) -> Tuple[float, int]:
    """
    在给定候选代理中取满足 δ 的最小总曲率

    N ≤ exact_threshold 时要求代理穷举验证为子模且夹逼不等式穷举成立；
    否则信任命题的闭式 δ 界。

    Returns:
        (α_δ, 候选下标)

    Raises:
        NoFeasibleSurrogate: 没有候选满足条件
    """
    if not candidates:
        raise InvalidParameter("候选代理列表为空")
    size = f.ground_size()
    best: Optional[Tuple[float, int]] = None
    for index, (g, bounds) in enumerate(candidates):
        _same_ground(f, g)
        if bounds.spread > delta + CHECK_TOL:
            logger.info(f"候选 {index} ({g.name}) δ = {bounds.spread:.6g} 超过 {delta:.6g}")
            continue
        if size <= exact_threshold:
            if not is_submodular_bruteforce(g):
                logger.info(f"候选 {index} ({g.name}) 非子模，跳过")
                continue
            if not verify_sandwich(f, g, bounds).holds:
                logger.info(f"候选 {index} ({g.name}) 夹逼不等式不成立，跳过")
                continue
        alpha = total_curvature(g)
        if best is None or alpha < best[0]:
            best = (alpha, index)
    if best is None:
        raise NoFeasibleSurrogate(f"没有候选代理满足 δ = {delta}")
    return best


# ===== 逐步不等式 =====
@dataclass(frozen=True)
class StepCheck:
    holds: bool
    steps: Tuple[Dict[str, Any], ...]

    def violations(self) -> List[Dict[str, Any]]:
        return [step for step in self.steps if not step["holds"]]

    def to_dict(self) -> Dict[str, Any]:
        return {"holds": self.holds, "steps": list(self.steps)}


def step_inequality_check(
    f: SetFunctionOracle,
    trace: GreedyTrace,
    opt: OptResult,
    alpha_g: float,
    delta: DeltaBounds,
) -> StepCheck:
    """
    每个 i ∈ {0..k−1} 检查 OPT ≤ α_G·f(S_G^i) + k·(δ_u/δ_l)·A(i+1) + 1e-9

    不成立说明给定的 δ/α 输入不可行，而不是代码错误
    """
    selection = trace.selection
    k = len(selection)
    factor = math.inf if delta.delta_l == 0.0 else delta.delta_u / delta.delta_l
    steps = []
    for i in range(k):
        prefix_value = f.evaluate(selection.prefix(i))
        gain = selection.gains[i]
        slack = k * factor * gain if gain > 0.0 else 0.0
        rhs = alpha_g * prefix_value + slack + CHECK_TOL
        holds = opt.best_value <= rhs
        steps.append(
            {
                "i": i,
                "opt": opt.best_value,
                "prefix_value": prefix_value,
                "gain": gain,
                "rhs": rhs,
                "holds": bool(holds),
            }
        )
        if not holds:
            logger.warning(
                f"逐步不等式在 i={i} 不成立: OPT={opt.best_value:.6g} > {rhs:.6g} "
                f"(α_G={alpha_g:.6g}, δ_u/δ_l={factor:.6g})"
            )
    return StepCheck(all(step["holds"] for step in steps), tuple(steps))


# ===== 汇总报告 =====
@dataclass
class ClosenessReport:
    gamma_f: Optional[float] = None
    alpha_total: Optional[float] = None
    alpha_generalized: Optional[float] = None
    alpha_greedy: Optional[float] = None
    divergence: Optional[float] = None
    lemma1_min_delta: Optional[float] = None
    methods: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gamma_f": self.gamma_f,
            "alpha_total": self.alpha_total,
            "alpha_generalized": self.alpha_generalized,
            "alpha_greedy": self.alpha_greedy,
            "divergence": self.divergence,
            "lemma1_min_delta": self.lemma1_min_delta,
            "methods": dict(self.methods),
        }


def closeness_report(
    f: SetFunctionOracle,
    g: Optional[SetFunctionOracle],
    k: int,
    exact_threshold: int = PAIR_MAX_N,
    samples: int = 20000,
    seed: int = 0,
) -> ClosenessReport:
    """
    按实例规模尽可能计算全部度量，逐项标注 exact / sampled / skipped
    """
    size = f.ground_size()
    exact = size <= min(exact_threshold, PAIR_MAX_N)
    report = ClosenessReport()

    if exact:
        report.gamma_f = submodularity_ratio_exact(f)
        report.lemma1_min_delta = lemma1_min_delta(report.gamma_f)
        report.alpha_generalized = generalized_curvature_exact(f)
        report.methods.update(gamma_f="exact", lemma1_min_delta="exact", alpha_generalized="exact")
    else:
        report.methods.update(gamma_f="skipped", lemma1_min_delta="skipped", alpha_generalized="skipped")

    target = g if g is not None else f
    try:
        report.alpha_total = total_curvature(target)
        report.methods["alpha_total"] = "exact"
    except AllSingletonsDegenerate as e:
        logger.warning(f"总曲率无定义: {str(e)}")
        report.methods["alpha_total"] = "skipped"

    if size <= min(exact_threshold, EXHAUSTIVE_OPT_MAX_N):
        trace = greedy(f, k)
        opt = exhaustive_opt(f, k)
        try:
            report.alpha_greedy = greedy_curvature(f, trace, opt).value
            report.methods["alpha_greedy"] = "exact"
        except DenominatorDegenerate as e:
            logger.warning(f"贪心曲率无定义: {str(e)}")
            report.methods["alpha_greedy"] = "skipped"
    else:
        report.methods["alpha_greedy"] = "skipped"

    if g is not None:
        if size <= min(exact_threshold, TABLE_MAX_N):
            try:
                report.divergence = divergence_exact(f, g)
                report.methods["divergence"] = "exact"
            except ZeroDenominator as e:
                logger.warning(f"散度无界: {str(e)}")
                report.divergence = math.inf
                report.methods["divergence"] = "unbounded"
        else:
            report.divergence = divergence_sampled(f, g, samples, seed)
            report.methods["divergence"] = "sampled"
    else:
        report.methods["divergence"] = "skipped"
    return report


# ===== 反例搜索 =====
@dataclass(frozen=True)
class WitnessSearch:
    seed: int
    attempts: int
    model: GramianModel
    check: SubmodularityCheck


def find_nonsubmodular_witness(
    kind: str, n: int, N: int, beta: float, seed: int, attempts: int = 200, decades: float = 0.0
) -> Optional[WitnessSearch]:
    """
    在随机高斯实例中搜索非子模的目标函数，返回首个反例所用的种子

    decades > 0 时列范数在 10^{±decades/2} 内对数均匀，否则列归一化；
    负逆迹的反例需要量级悬殊且方向相近的两列，单位列几乎搜不到
    """
    if kind not in OBJECTIVES:
        raise InvalidParameter(f"未知目标函数: {kind}")
    _guard(N, PAIR_MAX_N, "witness search")
    rng = SplitMix64(seed)
    for attempt in range(1, attempts + 1):
        instance_seed = rng.next_u64()
        if decades > 0.0:
            model = random_scaled_gramian_model(n, N, beta, instance_seed, decades)
        else:
            model = random_gramian_model(n, N, beta, instance_seed, normalize_columns=True)
        check = is_submodular_bruteforce(OBJECTIVES[kind](model))
        if not check.is_submodular and check.violation >= WITNESS_MIN_GAP:
            logger.info(f"{kind} 在第 {attempt} 次尝试找到非子模实例, seed={instance_seed}")
            return WitnessSearch(instance_seed, attempt, model, check)
    logger.warning(f"{kind} 在 {attempts} 次尝试内未找到非子模实例")
    return None
