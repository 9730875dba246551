"""
实验驱动：β 扫描、传感器选择、单实例分析

每个命令返回 CommandResult（行表 + 元数据），序列化与写出由 main 负责
"""

import math
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .analysis import (
    DeltaBounds,
    alpha_delta,
    closeness_report,
    delta_bounds_prop1,
    delta_bounds_prop2,
    delta_bounds_prop3,
    empirical_delta_bounds,
    generalized_curvature_exact,
    is_submodular_bruteforce,
    ros_membership,
    submodularity_ratio_exact,
    total_curvature,
)
from .bounds import BoundInputs, Budget, bound_bian, bound_delta, bound_reports, sweep_bound
from .config_manager import ExperimentConfig
from .const import EXHAUSTIVE_OPT_MAX_N, LIMIT, PAIR_MAX_N, TABLE_MAX_N
from .errors import (
    AllSingletonsDegenerate,
    InvalidParameter,
    NoFeasibleSurrogate,
    Unbounded,
    ZeroDenominator,
)
from .job_manager import JobManager
from .matrixcore import log_det, solve, trace_inverse
from .rng import SplitMix64
from .setfn import (
    OBJECTIVES,
    GramianModel,
    SetFunctionOracle,
    Subset,
    TabularFunction,
    log_det_objective,
    random_gramian_model,
)
from .solvers import exhaustive_opt, greedy, random_baseline
from . import logger

SWEEP_COLUMNS = (
    "beta",
    "delta_l",
    "delta_u",
    "alpha_delta",
    "bound_delta",
    "bound_delta_limit",
    "alpha_delta_value",
    "bound_delta_value",
    "bound_delta_value_limit",
    "gamma_f",
    "alpha_generalized",
    "bound_bian",
    "greedy_value",
    "opt_value",
    "greedy_opt_ratio",
)

# 子流编号
_STREAM_THETA = 1
_STREAM_BASELINE = 2


@dataclass
class CommandResult:
    rows: List[Dict[str, Any]]
    metadata: Dict[str, Any] = field(default_factory=dict)
    columns: Optional[Tuple[str, ...]] = None

    def to_dict(self) -> Dict[str, Any]:
        return {"metadata": self.metadata, "rows": self.rows}


# ===== 代理函数与 δ 界 =====
def surrogate_bounds(
    objective: str, surrogate: str, model: GramianModel, interp: str
) -> Tuple[Optional[DeltaBounds], str]:
    """
    目标/代理组合对应的 δ 界及来源；没有闭式界时在 N ≤ 16 下穷举求最紧界

    Returns:
        (DeltaBounds 或 None, 来源说明)
    """
    pair = (objective, surrogate)
    try:
        if pair == ("neg-trace-inv", "log-det"):
            return delta_bounds_prop1(model), "closed-form:neg-trace-inv/log-det"
        if pair == ("min-eig", "trace"):
            return delta_bounds_prop2(model, interp), f"closed-form:min-eig/trace:{interp}"
        if pair == ("min-eig", "max-eig"):
            return delta_bounds_prop3(model, interp), f"closed-form:min-eig/max-eig:{interp}"
    except (Unbounded, InvalidParameter) as e:
        logger.warning(f"{objective}/{surrogate} 闭式 δ 界不可用: {str(e)}")
        return None, f"unbounded: {str(e)}"
    if model.N <= TABLE_MAX_N:
        try:
            f = OBJECTIVES[objective](model)
            g = OBJECTIVES[surrogate](model)
            return empirical_delta_bounds(f, g), "exhaustive"
        except (Unbounded, ZeroDenominator) as e:
            return None, f"unbounded: {str(e)}"
    return None, "skipped"


# ===== β 扫描 =====
def _sweep_point(config: ExperimentConfig, base_model: GramianModel, beta: float) -> Dict[str, Any]:
    model = base_model.with_beta(beta)
    f = OBJECTIVES[config.objective](model)
    if config.objective == "neg-trace-inv":
        g = log_det_objective(model)
        bounds = delta_bounds_prop1(model)
    else:
        g = OBJECTIVES["trace"](model)
        bounds = delta_bounds_prop2(model, config.interp)

    row: Dict[str, Any] = {column: None for column in SWEEP_COLUMNS}
    row.update(beta=beta, delta_l=bounds.delta_l, delta_u=bounds.delta_u)

    alpha = total_curvature(g)
    row.update(
        alpha_delta=alpha,
        bound_delta=bound_delta(alpha, bounds, config.k),
        bound_delta_limit=bound_delta(alpha, bounds, LIMIT),
    )
    # 以未归一化的单点取值为分母的曲率，β < 1 时 log det 单点取值可能非正
    try:
        alpha_value = total_curvature(g, empty_value=g.empty_value())
        if 0.0 <= alpha_value <= 1.0:
            row.update(
                alpha_delta_value=alpha_value,
                bound_delta_value=bound_delta(alpha_value, bounds, config.k),
                bound_delta_value_limit=bound_delta(alpha_value, bounds, LIMIT),
            )
    except AllSingletonsDegenerate:
        logger.debug(f"β={beta:.6g} 时单点取值全部非正，跳过取值型曲率")

    size = model.N
    if size <= min(config.exact_threshold, PAIR_MAX_N):
        gamma = min(submodularity_ratio_exact(f), 1.0)
        alpha_gen = min(max(generalized_curvature_exact(f), 0.0), 1.0)
        row.update(gamma_f=gamma, alpha_generalized=alpha_gen, bound_bian=bound_bian(alpha_gen, gamma, config.k))
    if size <= min(config.exact_threshold, EXHAUSTIVE_OPT_MAX_N):
        trace = greedy(f, config.k)
        opt = exhaustive_opt(f, config.k)
        row.update(greedy_value=trace.value, opt_value=opt.best_value)
        if opt.best_value > 0.0:
            row["greedy_opt_ratio"] = trace.value / opt.best_value
    return row


async def cmd_sweep_beta(config: ExperimentConfig, jobs: Optional[JobManager] = None) -> CommandResult:
    """
    固定一组单位范数高斯列，对 β 网格逐点计算 δ 界、α_δ 与各性能界
    """
    jobs = jobs or JobManager(config.workers)
    grid = config.grid()
    base_model = random_gramian_model(config.n, config.N, grid[0], config.seed, config.normalize_columns)
    logger.info(f"β 扫描: n={config.n}, N={config.N}, k={config.k}, {len(grid)} 个网格点")
    rows = await jobs.map(partial(_sweep_point, config, base_model), list(grid))
    metadata = {
        "command": "sweep-beta",
        "config": config.to_dict(),
        "surrogate": "log-det" if config.objective == "neg-trace-inv" else "trace",
        "bian_parameters": "exhaustive (gamma_f, alpha) on this instance",
        "alpha_delta_value": "total curvature with un-normalised singleton values as denominators",
    }
    return CommandResult(rows, metadata, SWEEP_COLUMNS)


# ===== 传感器选择 =====
@dataclass(frozen=True)
class MonteCarloDraws:
    """公共随机数：theta 为 trials×n，noise 为 trials×N"""

    theta: np.ndarray
    noise: np.ndarray

    @property
    def trials(self) -> int:
        return self.theta.shape[0]


def draw_sensor_noise(model: GramianModel, trials: int, seed: int) -> MonteCarloDraws:
    """θ ~ N(0, β⁻²I)，w ~ N(0, I)"""
    rng = SplitMix64(seed).spawn(_STREAM_THETA)
    theta = rng.normals(trials * model.n).reshape(trials, model.n) / model.beta
    noise = rng.normals(trials * model.N).reshape(trials, model.N)
    return MonteCarloDraws(theta, noise)


@dataclass(frozen=True)
class MseEstimate:
    mean: float
    standard_error: float
    analytic: float
    posterior_logdet: float

    def to_dict(self) -> Dict[str, float]:
        return {
            "mse": self.mean,
            "mse_se": self.standard_error,
            "analytic_mse": self.analytic,
            "posterior_logdet": self.posterior_logdet,
        }


def monte_carlo_mse(model: GramianModel, subset: Subset, draws: MonteCarloDraws) -> MseEstimate:
    """
    y_S = X_Sᵀθ + w_S，θ̂ = W_S⁻¹ X_S y_S，返回 ‖θ̂ − θ‖² 的样本均值与标准误
    """
    elements = list(subset)
    columns = model.columns[:, elements]
    observed = draws.theta @ columns + draws.noise[:, elements]
    gramian = model.gramian(subset)
    estimate = solve(gramian, columns @ observed.T).T
    errors = np.sum((estimate - draws.theta) ** 2, axis=1)
    return MseEstimate(
        mean=float(np.mean(errors)),
        standard_error=float(np.std(errors, ddof=1) / math.sqrt(len(errors))),
        analytic=trace_inverse(gramian),
        posterior_logdet=-log_det(gramian),
    )


def _sensor_budget(
    model: GramianModel,
    f: SetFunctionOracle,
    draws: MonteCarloDraws,
    greedy_sets: List[Subset],
    greedy_values: List[float],
    random_trials: int,
    seed: int,
    budget: int,
) -> Dict[str, Any]:
    chosen = greedy_sets[budget - 1]
    greedy_mse = monte_carlo_mse(model, chosen, draws)
    baseline = random_baseline(f, budget, random_trials, SplitMix64(seed).spawn(_STREAM_BASELINE + budget).next_u64())
    random_mse = np.array(
        [monte_carlo_mse(model, Subset(mask, model.N), draws).mean for mask, _ in baseline.samples]
    )
    q1, median, q3 = np.quantile(random_mse, [0.25, 0.5, 0.75], method="inverted_cdf")
    return {
        "k": budget,
        "greedy_set": list(chosen),
        "greedy_value": greedy_values[budget - 1],
        **{f"greedy_{key}": value for key, value in greedy_mse.to_dict().items()},
        "random_value": baseline.to_dict(),
        "random_mse_q1": float(q1),
        "random_mse_median": float(median),
        "random_mse_q3": float(q3),
        "random_mse_mean": float(np.mean(random_mse)),
    }


async def cmd_sensor_select(
    config: ExperimentConfig,
    jobs: Optional[JobManager] = None,
    model: Optional[GramianModel] = None,
) -> CommandResult:
    """
    贪心与随机传感器选择在预算 1..k 上的目标值与 MMSE 估计误差
    """
    jobs = jobs or JobManager(config.workers)
    if model is None:
        model = random_gramian_model(config.n, config.N, config.beta, config.seed, config.normalize_columns)
    f = OBJECTIVES[config.objective](model)
    logger.info(
        f"传感器选择: n={model.n}, N={model.N}, k={config.k}, 目标 {config.objective}, "
        f"{config.trials} 次蒙特卡洛"
    )
    trace = greedy(f, config.k)
    greedy_sets = [trace.selection.prefix(i) for i in range(1, config.k + 1)]
    greedy_values = [f.evaluate(s) for s in greedy_sets]
    draws = draw_sensor_noise(model, config.trials, config.seed)
    task = partial(
        _sensor_budget, model, f, draws, greedy_sets, greedy_values, config.random_trials, config.seed
    )
    rows = await jobs.map(task, list(range(1, config.k + 1)))
    metadata = {
        "command": "sensor-select",
        "config": config.to_dict(),
        "greedy_order": list(trace.selection.elements),
        "common_random_numbers": True,
    }
    return CommandResult(rows, metadata)


# ===== 单实例分析 =====
def _exact_limit(config: ExperimentConfig) -> int:
    return min(config.exact_threshold, PAIR_MAX_N)


def analyze_instance(
    f: SetFunctionOracle,
    surrogates: List[Tuple[str, SetFunctionOracle, Optional[DeltaBounds], str]],
    config: ExperimentConfig,
) -> Dict[str, Any]:
    """
    对 f 与候选代理计算全部可计算的度量、ROS 判定与性能界

    Args:
        surrogates: (名称, 代理函数, δ 界或 None, δ 界来源)
    """
    size = f.ground_size()
    exact = size <= _exact_limit(config)
    primary = surrogates[0][1] if surrogates else None
    report = closeness_report(f, primary, config.k, config.exact_threshold, config.samples, config.seed)
    submodular = exact and bool(is_submodular_bruteforce(f))
    if submodular and not surrogates:
        surrogates = [("self", f, DeltaBounds.symmetric(0.0), "identity")]

    ros = []
    candidates = []
    names = []
    for name, g, bounds, source in surrogates:
        entry: Dict[str, Any] = {"surrogate": name, "bounds_source": source}
        if bounds is not None:
            entry["bounds"] = bounds.to_dict()
            candidates.append((g, bounds))
            names.append(name)
            if exact:
                try:
                    entry["ros"] = ros_membership(f, g, bounds.spread).to_dict()
                except ZeroDenominator as e:
                    entry["ros"] = {"member": False, "reason": "zero-denominator", **e.to_dict()}
        ros.append(entry)

    chosen = None
    alpha_d = None
    if candidates:
        try:
            alpha_d, index = alpha_delta(f, candidates, math.inf, config.exact_threshold)
            chosen = (names[index], candidates[index][1])
        except NoFeasibleSurrogate as e:
            logger.warning(f"没有可用的代理函数: {str(e)}")
    alpha_d = None if alpha_d is None else min(max(alpha_d, 0.0), 1.0)

    gamma = None if report.gamma_f is None else min(report.gamma_f, 1.0)
    alpha_gen = None if report.alpha_generalized is None else min(max(report.alpha_generalized, 0.0), 1.0)
    bounds_out = {}
    for k in (config.k, LIMIT):
        inputs = BoundInputs(
            k,
            alpha_total=report.alpha_total if submodular else None,
            alpha=alpha_gen,
            gamma=gamma,
            alpha_delta=alpha_d,
            deltas=(chosen[1],) if chosen else (),
            gamma_f=gamma,
        )
        reports = bound_reports(inputs)
        bounds_out[str(k)] = [r.to_dict() for r in reports]

    return {
        "ground_size": size,
        "closeness": report.to_dict(),
        "surrogates": ros,
        "alpha_delta": alpha_d,
        "alpha_delta_surrogate": chosen[0] if chosen else None,
        "bounds": bounds_out,
    }


def cmd_analyze(
    config: ExperimentConfig,
    matrix_path: Optional[str] = None,
    tabular_path: Optional[str] = None,
    surrogate_table_path: Optional[str] = None,
) -> CommandResult:
    """
    从矩阵 CSV（Gramian 目标）或取值表 CSV 读取实例并生成分析报告
    """
    if (matrix_path is None) == (tabular_path is None):
        raise InvalidParameter("须且只能给出 --matrix 或 --tabular 之一")

    if matrix_path is not None:
        model = GramianModel.from_csv(matrix_path, config.beta, config.normalize_columns)
        f = OBJECTIVES[config.objective](model)
        surrogates = []
        for name in config.surrogates:
            bounds, source = surrogate_bounds(config.objective, name, model, config.interp)
            surrogates.append((name, OBJECTIVES[name](model), bounds, source))
        source = {"matrix": matrix_path, "n": model.n, "N": model.N, "beta": model.beta}
    else:
        f = TabularFunction.from_csv(tabular_path)
        surrogates = []
        if surrogate_table_path is not None:
            g = TabularFunction.from_csv(surrogate_table_path)
            try:
                bounds, origin = empirical_delta_bounds(f, g), "exhaustive"
            except (Unbounded, ZeroDenominator) as e:
                bounds, origin = None, f"unbounded: {str(e)}"
            surrogates.append(("table", g, bounds, origin))
        source = {"tabular": tabular_path, "surrogate_table": surrogate_table_path, "N": f.ground_size()}

    size = f.ground_size()
    if config.k > size:
        logger.warning(f"--k={config.k} 超过地面集规模 N={size}，按 k={size} 计算")
        config = config.with_overrides(k=size)
    logger.info(f"分析实例: {source}")
    result = analyze_instance(f, surrogates, config)
    metadata = {"command": "analyze", "input": source, "objective": f.name, "config": config.to_dict()}
    return CommandResult([result], metadata)


# ===== 性能界扫描 =====
BOUNDS_COLUMNS = ("parameter", "value")


def cmd_bounds(kind: str, grid: Sequence[float], k: Budget, alpha: float = 1.0) -> CommandResult:
    """
    单参数扫描某个性能界，每个网格点一行 (parameter, value)
    """
    rows = sweep_bound(kind, grid, k, alpha)
    logger.info(f"性能界扫描 {kind}: {len(rows)} 个网格点, k={k}")
    metadata = {"command": "bounds", "kind": kind, "k": k, "alpha": alpha}
    return CommandResult(rows, metadata, BOUNDS_COLUMNS)
