"""
性能保证公式

贪心在基数约束下的近似比：总曲率界、子模比界、δ-近似界（对称/非对称/单边三种结构），
有限 k 与 k → ∞ 两种形式，以及各结构的可行性判据。
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from .analysis import DeltaBounds, DeltaForm
from .const import CHECK_TOL, LIMIT, SMALL_ALPHA
from .errors import Infeasible, InvalidBudget, InvalidParameter

Budget = Union[int, str]

THEOREM_CONFORTI = "conforti"
THEOREM_BIAN = "bian"
THEOREM_DELTA = {
    DeltaForm.SYMMETRIC: "delta-symmetric",
    DeltaForm.ASYMMETRIC: "delta-asymmetric",
    DeltaForm.ONE_SIDED: "delta-one-sided",
}


def _check_budget(k: Budget) -> Budget:
    if k == LIMIT:
        return LIMIT
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise InvalidBudget(f"k 须为正整数或 {LIMIT!r}: {k!r}")
    return k


def _check_unit(name: str, value: float) -> float:
    if not 0.0 <= value <= 1.0:
        raise InvalidParameter(f"{name} 须在 [0, 1] 内: {value}")
    return float(value)


def _greedy_ratio(c: float, r: float, k: Budget) -> float:
    """
    (1/c)·(1 − (1 − c·r/k)^k)，极限形式 (1/c)·(1 − e^{−c·r})，结果截断到 [0, 1]

    c < SMALL_ALPHA 时用二阶级数，c → 0 的极限为 r；k = 1 时恰为 r
    """
    return min(1.0, max(0.0, _greedy_ratio_raw(c, r, k)))


def _greedy_ratio_raw(c: float, r: float, k: Budget) -> float:
    if k == 1:
        return r
    x = c * r
    if k == LIMIT:
        if c < SMALL_ALPHA:
            return r * (1.0 - x / 2.0 + x * x / 6.0)
        return -math.expm1(-x) / c
    if c < SMALL_ALPHA:
        return r * (1.0 - (k - 1) / (2.0 * k) * x + (k - 1) * (k - 2) / (6.0 * k * k) * x * x)
    step = x / k
    if step >= 1.0:
        return 1.0 / c
    return -math.expm1(k * math.log1p(-step)) / c


def bound_conforti(alpha: float, k: Budget) -> float:
    """子模 + 总曲率 α：(1/α)(1 − (1 − α/k)^k)"""
    return _greedy_ratio(_check_unit("alpha", alpha), 1.0, _check_budget(k))


def bound_bian(alpha: float, gamma: float, k: Budget) -> float:
    """子模比 γ + 广义曲率 α：(1/α)(1 − (1 − αγ/k)^k)"""
    return _greedy_ratio(_check_unit("alpha", alpha), _check_unit("gamma", gamma), _check_budget(k))


def bound_delta(alpha_delta: float, delta: DeltaBounds, k: Budget) -> float:
    """
    δ-近似子模：r = δ_l/δ_u，C = 1 − r·(1 − α_δ)，返回 (1/C)(1 − (1 − C·r/k)^k)

    Raises:
        InvalidParameter: r > 1
    """
    alpha_delta = _check_unit("alpha_delta", alpha_delta)
    k = _check_budget(k)
    r = delta.ratio
    if r > 1.0:
        raise InvalidParameter(f"δ_l/δ_u = {r} > 1")
    # r = 1 时 C 恰为 α_δ
    c = (1.0 - r) + r * alpha_delta
    return _greedy_ratio(c, r, k)


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    reason: str

    def __bool__(self) -> bool:
        return self.feasible


def feasibility(delta: DeltaBounds, gamma_f: float) -> Feasibility:
    """
    按近似结构检查可行性：
    对称 δ ≥ (1−γ_f)/(1+γ_f)，非对称 δ_l ≤ δ_u·γ_f，单边 δ ≥ 1/γ_f

    Raises:
        Infeasible: 单边结构且 γ_f = 0
    """
    gamma_f = _check_unit("gamma_f", gamma_f)
    if delta.form is DeltaForm.SYMMETRIC:
        need = (1.0 - gamma_f) / (1.0 + gamma_f)
        if delta.delta >= need - CHECK_TOL:
            return Feasibility(True, f"δ = {delta.delta:.6g} ≥ (1−γ_f)/(1+γ_f) = {need:.6g}")
        return Feasibility(False, f"δ = {delta.delta:.6g} < (1−γ_f)/(1+γ_f) = {need:.6g}")
    if delta.form is DeltaForm.ASYMMETRIC:
        cap = delta.delta_u * gamma_f
        if delta.delta_l <= cap + CHECK_TOL:
            return Feasibility(True, f"δ_l = {delta.delta_l:.6g} ≤ δ_u·γ_f = {cap:.6g}")
        return Feasibility(False, f"δ_l = {delta.delta_l:.6g} > δ_u·γ_f = {cap:.6g}")
    if gamma_f == 0.0:
        raise Infeasible("γ_f = 0 时单边结构要求 δ ≥ 1/γ_f = ∞")
    need = 1.0 / gamma_f
    if delta.delta >= need - CHECK_TOL:
        return Feasibility(True, f"δ = {delta.delta:.6g} ≥ 1/γ_f = {need:.6g}")
    return Feasibility(False, f"δ = {delta.delta:.6g} < 1/γ_f = {need:.6g}")


@dataclass(frozen=True)
class BoundInputs:
    """
    各公式的输入，构造时校验取值范围；缺省为 None 的参数对应的界不计算

    alpha_total 仅在函数本身子模时有意义，由调用方决定是否给出
    """

    k: Budget
    alpha_total: Optional[float] = None
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    alpha_delta: Optional[float] = None
    deltas: Tuple[DeltaBounds, ...] = ()
    gamma_f: Optional[float] = None

    def __post_init__(self):
        _check_budget(self.k)
        for name in ("alpha_total", "alpha", "gamma", "alpha_delta", "gamma_f"):
            value = getattr(self, name)
            if value is not None:
                _check_unit(name, value)
        object.__setattr__(self, "deltas", tuple(self.deltas))


@dataclass(frozen=True)
class BoundReport:
    theorem: str
    ratio: float
    inputs: Dict[str, Any] = field(default_factory=dict)
    feasible: bool = True
    reason: str = ""

    def __post_init__(self):
        if not -CHECK_TOL <= self.ratio <= 1.0 + CHECK_TOL:
            raise InvalidParameter(f"{self.theorem} 近似比越界: {self.ratio}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theorem": self.theorem,
            "ratio": self.ratio,
            "inputs": dict(self.inputs),
            "feasible": self.feasible,
            "reason": self.reason,
        }


def bound_reports(inputs: BoundInputs) -> List[BoundReport]:
    """
    给定输入下所有可计算的界

    δ 界在 gamma_f 已知时附带可行性判定，不可行的结构仍输出数值
    """
    k = inputs.k
    alpha_total, alpha, gamma = inputs.alpha_total, inputs.alpha, inputs.gamma
    alpha_delta, gamma_f = inputs.alpha_delta, inputs.gamma_f
    reports = []
    if alpha_total is not None:
        reports.append(
            BoundReport(THEOREM_CONFORTI, bound_conforti(alpha_total, k), {"alpha": alpha_total, "k": k})
        )
    if alpha is not None and gamma is not None:
        reports.append(
            BoundReport(THEOREM_BIAN, bound_bian(alpha, gamma, k), {"alpha": alpha, "gamma": gamma, "k": k})
        )
    if alpha_delta is not None:
        for delta in inputs.deltas:
            echoed = {"alpha_delta": alpha_delta, "k": k, **delta.to_dict()}
            verdict = Feasibility(True, "γ_f 未知，未检查可行性")
            if gamma_f is not None:
                try:
                    verdict = feasibility(delta, gamma_f)
                except Infeasible as e:
                    verdict = Feasibility(False, str(e))
            reports.append(
                BoundReport(
                    THEOREM_DELTA[delta.form],
                    bound_delta(alpha_delta, delta, k),
                    echoed,
                    verdict.feasible,
                    verdict.reason,
                )
            )
    return reports


SWEEP_KINDS = ("conforti", "bian", "delta-symmetric", "delta-ratio")


def sweep_bound(
    kind: str, grid: Iterable[float], k: Budget, alpha: float = 1.0
) -> List[Dict[str, float]]:
    """
    单参数扫描，返回 (parameter, value) 行

    conforti 扫 α；bian 扫 γ；delta-symmetric 扫 δ；delta-ratio 扫 r = δ_l/δ_u（δ_u = 1）
    """
    rows = []
    for parameter in grid:
        if kind == "conforti":
            value = bound_conforti(parameter, k)
        elif kind == "bian":
            value = bound_bian(alpha, parameter, k)
        elif kind == "delta-symmetric":
            value = bound_delta(alpha, DeltaBounds.symmetric(parameter), k)
        elif kind == "delta-ratio":
            value = bound_delta(alpha, DeltaBounds.asymmetric(parameter, 1.0), k)
        else:
            raise InvalidParameter(f"未知扫描类型: {kind}, 可选 {SWEEP_KINDS}")
        rows.append({"parameter": float(parameter), "value": value})
    return rows
