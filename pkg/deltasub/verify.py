"""
可执行的性质检验套件

每个套件在固定种子下生成实例，用穷举预言机检查一个性质，
失败时记录完整的反例数据。
"""

import asyncio
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .analysis import (
    INTERPRETATIONS,
    RANK1_ONLY,
    DeltaBounds,
    WitnessSearch,
    delta_bounds_prop1,
    delta_bounds_prop2,
    delta_bounds_prop3,
    divergence_exact,
    find_nonsubmodular_witness,
    generalized_curvature_exact,
    greedy_curvature,
    is_submodular_bruteforce,
    lemma1_min_delta,
    step_inequality_check,
    submodularity_ratio_exact,
    total_curvature,
    verify_sandwich,
)
from .bounds import bound_bian, bound_conforti, bound_delta
from .config_manager import ExperimentConfig
from .const import CHECK_TOL, LIMIT
from .errors import Unbounded, UnknownSuite, WitnessNotFound
from .experiments import cmd_sensor_select, draw_sensor_noise, monte_carlo_mse
from .job_manager import JobManager
from .matrixcore import SymMatrix, eigenvalues
from .rng import SplitMix64
from .setfn import (
    ConcaveModular,
    GramianModel,
    ModularFunction,
    SetFunctionOracle,
    Subset,
    log_det_objective,
    max_eig_objective,
    min_eig_objective,
    neg_trace_inv,
    random_gramian_model,
    random_monotone_table,
    trace_objective,
)
from .solvers import exhaustive_opt, greedy
from . import logger

"""
单个套件最多保留的反例数
"""
MAX_FAILURES = 20


@dataclass
class SuiteResult:
    name: str
    checks: int = 0
    failures: List[Dict[str, Any]] = field(default_factory=list)
    failed: int = 0
    elapsed: float = 0.0
    # 只记录、不判定通过与否的结果
    observations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failed == 0

    def check(self, ok: bool, witness: Callable[[], Dict[str, Any]]):
        """witness 只在失败时求值"""
        self.checks += 1
        if ok:
            return
        self.failed += 1
        if len(self.failures) < MAX_FAILURES:
            self.failures.append(witness())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": self.checks,
            "failed": self.failed,
            "elapsed_seconds": round(self.elapsed, 3),
            "failures": self.failures,
            "observations": self.observations,
        }


def _relative_slack(value: float) -> float:
    return CHECK_TOL * max(1.0, abs(value))


# ===== 固定反例 =====
@dataclass(frozen=True)
class FrozenWitness:
    """
    反例搜索的全部输入；同一组输入总是找到同一个实例
    """

    kind: str
    n: int
    N: int
    beta: float
    seed: int
    attempts: int = 200
    decades: float = 0.0

    def search(self) -> Optional[WitnessSearch]:
        return find_nonsubmodular_witness(
            self.kind, self.n, self.N, self.beta, self.seed, self.attempts, self.decades
        )


FROZEN_WITNESSES: Dict[str, FrozenWitness] = {
    "neg-trace-inv": FrozenWitness("neg-trace-inv", n=2, N=10, beta=1.0, seed=20240917, attempts=1000, decades=4.0),
    "min-eig": FrozenWitness("min-eig", n=2, N=4, beta=1.0, seed=5, attempts=10),
}


@lru_cache(maxsize=None)
def frozen_witness(kind: str) -> WitnessSearch:
    """
    Raises:
        WitnessNotFound: 记录的种子在尝试次数内没有找到反例
    """
    frozen = FROZEN_WITNESSES[kind]
    found = frozen.search()
    if found is None:
        raise WitnessNotFound(f"{kind}: seed={frozen.seed} 在 {frozen.attempts} 次尝试内没有找到反例")
    return found


def frozen_neg_trace_inv_witness() -> GramianModel:
    return frozen_witness("neg-trace-inv").model


def frozen_min_eig_witness() -> GramianModel:
    """n = 2 时单点的 λ_1 不变，任意两列独立即构成反例"""
    return frozen_witness("min-eig").model


# ===== 实例生成 =====
def _neg_trace_inv_instances(seed: int, count: int = 108):
    rng = SplitMix64(seed)
    for i in range(count):
        k = (2, 3, 4)[i % 3]
        beta = (0.5, 1.0, 2.0)[(i // 3) % 3]
        instance_seed = rng.next_u64()
        yield k, beta, instance_seed, random_gramian_model(4, 10, beta, instance_seed)


def _submodular_surrogates(f: SetFunctionOracle, seed: int) -> Dict[str, SetFunctionOracle]:
    size = f.ground_size()
    weights = [f.evaluate(Subset.of([a], size)) for a in range(size)]
    return {
        "modular": ModularFunction(weights),
        "concave-sqrt": ConcaveModular(weights, 0.5),
        "log-det": log_det_objective(random_gramian_model(3, size, 1.0, seed)),
    }


# ===== 套件 =====
def suite_curvature_bound(
    seed: int, bound: Callable[[float, int], float] = bound_conforti, name: str = "theorem1"
) -> SuiteResult:
    """log det 实例上 greedy ≥ bound(α_T, k)·OPT"""
    result = SuiteResult(name)
    rng = SplitMix64(seed)
    k = 3
    for _ in range(100):
        instance_seed = rng.next_u64()
        g = log_det_objective(random_gramian_model(4, 10, 1.0, instance_seed))
        alpha = total_curvature(g)
        ratio = bound(alpha, k)
        trace = greedy(g, k)
        opt = exhaustive_opt(g, k)
        result.check(
            trace.value >= ratio * opt.best_value - _relative_slack(opt.best_value),
            lambda: {
                "seed": instance_seed,
                "k": k,
                "alpha_total": alpha,
                "bound": ratio,
                "greedy_value": trace.value,
                "greedy_set": list(trace.selection.elements),
                "opt_value": opt.best_value,
                "opt_set": list(opt.best_set),
            },
        )
    return result


def suite_mutation_curvature_bound(seed: int) -> SuiteResult:
    """故意写错的界（恒大于 1），必须失败"""

    def corrupted(alpha: float, k: int) -> float:
        return ((1.0 + alpha / k) ** k - 1.0) / alpha

    return suite_curvature_bound(seed, corrupted, "mutation-theorem1")


def suite_delta_bound(seed: int) -> SuiteResult:
    """负逆迹实例上 greedy ≥ bound_delta(α_δ, δ)·OPT，δ 取闭式界"""
    result = SuiteResult("theorem3")
    for k, beta, instance_seed, model in _neg_trace_inv_instances(seed):
        f = neg_trace_inv(model)
        bounds = delta_bounds_prop1(model)
        alpha = total_curvature(log_det_objective(model))
        ratio = bound_delta(alpha, bounds, k)
        trace = greedy(f, k)
        opt = exhaustive_opt(f, k)
        result.check(
            trace.value >= ratio * opt.best_value - _relative_slack(opt.best_value),
            lambda: {
                "seed": instance_seed,
                "k": k,
                "beta": beta,
                "alpha_delta": alpha,
                "bounds": bounds.to_dict(),
                "bound": ratio,
                "greedy_value": trace.value,
                "opt_value": opt.best_value,
            },
        )
    return result


def suite_step_inequality(seed: int) -> SuiteResult:
    """同一批负逆迹实例上逐步不等式在每次迭代成立"""
    result = SuiteResult("step-inequality")
    for k, beta, instance_seed, model in _neg_trace_inv_instances(seed):
        f = neg_trace_inv(model)
        bounds = delta_bounds_prop1(model)
        trace = greedy(f, k)
        opt = exhaustive_opt(f, k)
        alpha_g = greedy_curvature(f, trace, opt).value
        check = step_inequality_check(f, trace, opt, alpha_g, bounds)
        for step in check.steps:
            result.check(
                step["holds"],
                lambda step=step: {"seed": instance_seed, "k": k, "beta": beta, "alpha_greedy": alpha_g, **step},
            )
    return result


def suite_sandwich(seed: int) -> SuiteResult:
    """负逆迹与 log det 的边际夹逼，全部 (S, a) 穷举"""
    result = SuiteResult("prop1-sandwich")
    rng = SplitMix64(seed)
    for i in range(24):
        beta = (0.5, 1.0, 2.0)[i % 3]
        size = (6, 8, 10, 12)[(i // 3) % 4]
        instance_seed = rng.next_u64()
        model = random_gramian_model(4, size, beta, instance_seed)
        bounds = delta_bounds_prop1(model)
        check = verify_sandwich(neg_trace_inv(model), log_det_objective(model), bounds)
        result.check(
            check.holds,
            lambda: {"seed": instance_seed, "beta": beta, "N": size, "bounds": bounds.to_dict(), **check.to_dict()},
        )
    return result


"""
单独记录的夹逼实例 (n, N, β, seed)
"""
RECORDED_SANDWICH_INSTANCE = (3, 6, 1.0, 11)


def _prop_cases(model: GramianModel):
    """(界, 解释, f, g, δ 界的计算)"""
    yield "prop1", None, neg_trace_inv(model), log_det_objective(model), lambda: delta_bounds_prop1(model)
    for interp in INTERPRETATIONS:
        f = min_eig_objective(model)
        yield "prop2", interp, f, trace_objective(model), lambda interp=interp: delta_bounds_prop2(model, interp)
        yield "prop3", interp, f, max_eig_objective(model), lambda interp=interp: delta_bounds_prop3(model, interp)


def suite_prop_sandwich(seed: int) -> SuiteResult:
    """
    prop1/prop2/prop3 的 δ 界在两种 W_ω 解释下的穷举夹逼

    每个 (界, 解释) 的 holds/violations 都记入 observations。
    判定项只有必然成立的几条：prop1 成立；rank1-only 下 prop2 的 (0, 1) 界成立；
    rank1-only 且 n ≥ 2 时 prop3 无界。include-base 的结果只记录。
    """
    result = SuiteResult("props-sandwich")
    rng = SplitMix64(seed)
    instances = [RECORDED_SANDWICH_INSTANCE]
    for i in range(6):
        instances.append((2 + i % 3, 6 + i % 3, (0.5, 1.0, 2.0)[i % 3], rng.next_u64()))
    for n, size, beta, instance_seed in instances:
        model = random_gramian_model(n, size, beta, instance_seed)
        instance = {"n": n, "N": size, "beta": beta, "seed": instance_seed}
        for prop, interp, f, g, compute in _prop_cases(model):
            record: Dict[str, Any] = {**instance, "prop": prop, "interp": interp}
            try:
                bounds = compute()
            except Unbounded as e:
                record.update({"unbounded": True, "reason": str(e)})
                result.observations.append(record)
                if (prop, interp) == ("prop3", RANK1_ONLY):
                    result.check(n >= 2, lambda record=record: record)
                continue
            check = verify_sandwich(f, g, bounds)
            record.update({"unbounded": False, "bounds": bounds.to_dict(), **check.to_dict()})
            result.observations.append(record)
            if prop == "prop1" or (prop, interp) == ("prop2", RANK1_ONLY):
                result.check(check.holds, lambda record=record: record)
            elif (prop, interp) == ("prop3", RANK1_ONLY):
                result.check(n < 2, lambda record=record: record)
    holding = sum(1 for r in result.observations if r.get("holds"))
    logger.info(f"δ 界夹逼: {holding}/{len(result.observations)} 个 (界, 解释, 实例) 组合成立")
    return result


def suite_large_beta(seed: int) -> SuiteResult:
    """β = 100、n=10、N=30：取值型 α_δ 下的极限界接近 1 − 1/e，δ_u/δ_l ≤ 1.02"""
    result = SuiteResult("large-beta")
    model = random_gramian_model(10, 30, 100.0, seed)
    bounds = delta_bounds_prop1(model)
    g = log_det_objective(model)
    alpha = total_curvature(g, empty_value=g.empty_value())
    value = bound_delta(alpha, bounds, LIMIT)
    target = 1.0 - math.exp(-1.0)
    spread = bounds.delta_u / bounds.delta_l
    witness = lambda: {"seed": seed, "alpha_delta_value": alpha, "bound": value, "ratio_u_l": spread}
    result.check(abs(value - target) <= 0.01, witness)
    result.check(spread <= 1.02, witness)
    return result


def suite_divergence_lower_bound(seed: int) -> SuiteResult:
    """随机单调取值表与子模代理：d(f, g) ≥ (1 − γ_f)/(1 + γ_f)"""
    result = SuiteResult("lemma1")
    rng = SplitMix64(seed)
    for i in range(50):
        size = 4 + i % 5
        instance_seed = rng.next_u64()
        f = random_monotone_table(size, instance_seed)
        gamma = submodularity_ratio_exact(f)
        lower = lemma1_min_delta(min(gamma, 1.0))
        for name, g in _submodular_surrogates(f, instance_seed ^ 0x5DEECE66D).items():
            if not is_submodular_bruteforce(g):
                logger.warning(f"代理 {name} 非子模，跳过 seed={instance_seed}")
                continue
            divergence = divergence_exact(f, g)
            result.check(
                divergence >= lower - CHECK_TOL,
                lambda: {"seed": instance_seed, "N": size, "surrogate": name, "gamma_f": gamma, "lower": lower, "divergence": divergence},
            )
    return result


def suite_curvature_order(seed: int) -> SuiteResult:
    """
    贪心曲率首项 ≤ 广义曲率；子模函数的广义曲率等于总曲率
    """
    result = SuiteResult("curvature-order")
    rng = SplitMix64(seed)
    k = 3
    for i in range(30):
        instance_seed = rng.next_u64()
        if i % 2:
            f: SetFunctionOracle = random_monotone_table(8, instance_seed)
        else:
            f = log_det_objective(random_gramian_model(4, 8, 1.0, instance_seed))
        alpha = generalized_curvature_exact(f)
        trace = greedy(f, k)
        opt = exhaustive_opt(f, k)
        curvature = greedy_curvature(f, trace, opt)
        if curvature.first_term is not None:
            result.check(
                1.0 - curvature.first_term <= alpha + CHECK_TOL,
                lambda: {"seed": instance_seed, "kind": f.name, "alpha_generalized": alpha, **curvature.to_dict()},
            )
        if is_submodular_bruteforce(f):
            alpha_total = total_curvature(f)
            result.check(
                abs(alpha - alpha_total) <= CHECK_TOL,
                lambda: {"seed": instance_seed, "kind": f.name, "alpha_generalized": alpha, "alpha_total": alpha_total},
            )
    return result


def gamma_fixtures(seed: int) -> Dict[str, SetFunctionOracle]:
    rng = SplitMix64(seed)
    fixtures: Dict[str, SetFunctionOracle] = {
        "neg-trace-inv-witness": neg_trace_inv(frozen_neg_trace_inv_witness()),
        "min-eig-witness": min_eig_objective(frozen_min_eig_witness()),
        "modular": ModularFunction([1.0, 2.0, 0.5, 3.0, 1.5]),
        "concave-sqrt": ConcaveModular([1.0, 2.0, 0.5, 3.0, 1.5], 0.5),
        "concave-square": ConcaveModular([1.0, 2.0, 0.5, 3.0, 1.5], 2.0),
        "log-det": log_det_objective(random_gramian_model(3, 7, 1.0, rng.next_u64())),
    }
    for i in range(10):
        fixtures[f"table-{i}"] = random_monotone_table(4 + i % 4, rng.next_u64())
    return fixtures


def suite_gamma_characterization(seed: int) -> SuiteResult:
    """γ_f = 1 当且仅当穷举检验为子模"""
    result = SuiteResult("gamma-characterization")
    for name, f in gamma_fixtures(seed).items():
        gamma = submodularity_ratio_exact(f)
        check = is_submodular_bruteforce(f)
        result.check(
            (abs(gamma - 1.0) <= CHECK_TOL) == check.is_submodular,
            lambda: {"fixture": name, "gamma_f": gamma, **check.to_dict()},
        )
    return result


def suite_formula_reductions(seed: int) -> SuiteResult:
    """公式化简、取值范围、单调性与 k → ∞ 收敛"""
    result = SuiteResult("formula-reductions")
    alphas = np.linspace(0.0, 1.0, 21)
    deltas = np.linspace(0.0, 0.9, 10)
    budgets = (1, 2, 3, 5, 10, 50, LIMIT)
    for alpha in alphas:
        alpha = float(alpha)
        for k in budgets:
            conforti = bound_conforti(alpha, k)
            result.check(bound_bian(alpha, 1.0, k) == conforti, lambda: {"alpha": alpha, "k": k, "check": "bian(gamma=1)"})
            result.check(
                bound_delta(alpha, DeltaBounds.symmetric(0.0), k) == conforti,
                lambda: {"alpha": alpha, "k": k, "check": "delta(symmetric 0)"},
            )
            previous = math.inf
            for delta in deltas:
                delta = float(delta)
                symmetric = bound_delta(alpha, DeltaBounds.symmetric(delta), k)
                asymmetric = bound_delta(alpha, DeltaBounds.asymmetric(1.0 - delta, 1.0 + delta), k)
                result.check(
                    abs(symmetric - asymmetric) <= 1e-12,
                    lambda: {"alpha": alpha, "k": k, "delta": delta, "symmetric": symmetric, "asymmetric": asymmetric},
                )
                result.check(
                    0.0 <= symmetric <= 1.0 and symmetric <= previous + 1e-12,
                    lambda: {"alpha": alpha, "k": k, "delta": delta, "value": symmetric, "previous": previous},
                )
                previous = symmetric
        for gamma in (0.1, 0.5, 0.9):
            far = bound_bian(alpha, gamma, 10**6)
            limit = bound_bian(alpha, gamma, LIMIT)
            result.check(abs(far - limit) <= 1e-5, lambda: {"alpha": alpha, "gamma": gamma, "k": 10**6, "value": far, "limit": limit})
    return result


def suite_numerics(seed: int) -> SuiteResult:
    """特征值之和等于迹、2×2 解析特征值、Weyl 夹逼"""
    result = SuiteResult("numerics")
    rng = SplitMix64(seed)
    for i in range(1000):
        n = 1 + i % 16
        b = rng.normals(n * n).reshape(n, n)
        m = SymMatrix(b @ b.T + np.eye(n))
        total = eigenvalues(m).total()
        result.check(
            abs(total - m.trace()) <= 1e-10 * abs(m.trace()),
            lambda: {"n": n, "eigenvalue_sum": total, "trace": m.trace()},
        )
    for _ in range(200):
        a, b, c = rng.normals(3)
        m = SymMatrix([[a, b], [b, c]])
        mid, radius = (a + c) / 2.0, math.hypot((a - c) / 2.0, b)
        spectrum = eigenvalues(m)
        expected = (mid - radius, mid + radius)
        result.check(
            all(abs(x - y) <= 1e-12 * max(1.0, abs(y)) for x, y in zip(spectrum.eigenvalues, expected)),
            lambda: {"matrix": [[a, b], [b, c]], "eigenvalues": list(spectrum.eigenvalues), "expected": list(expected)},
        )
    for i in range(200):
        n = 2 + i % 8
        p = rng.normals(n * n).reshape(n, n)
        q = rng.normals(n * n).reshape(n, n)
        left, right = SymMatrix(p @ p.T + np.eye(n)), SymMatrix(q @ q.T)
        both = eigenvalues(SymMatrix(left.entries + right.entries))
        sl, sr = eigenvalues(left), eigenvalues(right)
        scale = 1e-10 * max(1.0, both.largest)
        result.check(
            sl.smallest + sr.smallest <= both.smallest + scale and both.largest <= sl.largest + sr.largest + scale,
            lambda: {"n": n, "sum": list(both.eigenvalues), "left": list(sl.eigenvalues), "right": list(sr.eigenvalues)},
        )
    return result


def suite_sensor_selection(seed: int) -> SuiteResult:
    """贪心 MSE 不超过随机选择 MSE 的中位数；正交情形与解析值一致"""
    result = SuiteResult("sensor-selection")
    config = ExperimentConfig(
        seed=seed, n=8, N=20, k=5, beta=1.0, trials=20000, random_trials=100, normalize_columns=False, workers=1
    ).validate()
    report = asyncio.run(cmd_sensor_select(config, JobManager(1)))
    for row in report.rows:
        result.check(
            row["greedy_mse"] <= row["random_mse_median"],
            lambda row=row: {"seed": seed, **{key: row[key] for key in ("k", "greedy_set", "greedy_mse", "greedy_mse_se", "random_mse_median")}},
        )

    model = GramianModel(np.eye(6), 1.0)
    subset = Subset.of([0, 2, 4], 6)
    estimate = monte_carlo_mse(model, subset, draw_sensor_noise(model, 20000, seed))
    analytic = 3 * 0.5 + 3 * 1.0
    result.check(
        abs(estimate.analytic - analytic) <= 1e-12 and abs(estimate.mean - analytic) <= 3.0 * estimate.standard_error,
        lambda: {"seed": seed, "analytic": analytic, **estimate.to_dict()},
    )
    return result


SUITES: Dict[str, Callable[[int], SuiteResult]] = {
    "theorem1": suite_curvature_bound,
    "theorem3": suite_delta_bound,
    "prop1-sandwich": suite_sandwich,
    "props-sandwich": suite_prop_sandwich,
    "large-beta": suite_large_beta,
    "lemma1": suite_divergence_lower_bound,
    "curvature-order": suite_curvature_order,
    "gamma-characterization": suite_gamma_characterization,
    "step-inequality": suite_step_inequality,
    "formula-reductions": suite_formula_reductions,
    "numerics": suite_numerics,
    "sensor-selection": suite_sensor_selection,
    "mutation-theorem1": suite_mutation_curvature_bound,
}
"""
all 不包含故意失败的变异套件
"""
ALL_SUITES = tuple(name for name in SUITES if not name.startswith("mutation-"))


def resolve_suites(name: str) -> List[str]:
    if name == "all":
        return list(ALL_SUITES)
    if name not in SUITES:
        raise UnknownSuite(f"未知套件: {name}, 可选 {', '.join(SUITES)} 或 all")
    return [name]


def run_suite(name: str, seed: int) -> SuiteResult:
    started = time.perf_counter()
    result = SUITES[name](seed)
    result.elapsed = time.perf_counter() - started
    if result.passed:
        logger.info(f"✅ 套件 {name}: {result.checks} 项检查全部通过 ({result.elapsed:.2f}s)")
    else:
        logger.error(f"❌ 套件 {name}: {result.failed}/{result.checks} 项失败")
    return result


async def cmd_verify(suite: str, seed: int, jobs: Optional[JobManager] = None) -> List[SuiteResult]:
    """
    运行一个或全部套件，结果按套件顺序返回
    """
    names = resolve_suites(suite)
    jobs = jobs or JobManager()
    return await jobs.map(lambda name: run_suite(name, seed), names)
