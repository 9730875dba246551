import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from . import __version__, init_app
from .bounds import SWEEP_KINDS
from .config_manager import (
    FORMAT_CHOICES,
    INTERP_CHOICES,
    OBJECTIVE_CHOICES,
    SURROGATE_CHOICES,
    ConfigManager,
    display_config_overview,
    parse_grid,
)
from .const import EXIT_OK, EXIT_VALIDATION, EXIT_VERIFY_FAILED, LIMIT
from .errors import DeltaSubError
from .experiments import CommandResult, cmd_analyze, cmd_bounds, cmd_sensor_select, cmd_sweep_beta
from .job_manager import JobManager
from .utils import async_write_file, to_csv_text, to_json_text
from .verify import SUITES, cmd_verify


class ArgumentParser(argparse.ArgumentParser):
    """参数错误按校验失败处理，退出码 1"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(
        prog="deltasub",
        description="δ-近似子模函数的贪心最大化、接近度度量与性能界",
    )
    parser.add_argument("--version", action="version", version=f"deltasub {__version__}")
    parser.add_argument("--config", help="YAML 配置文件路径，默认 config/config.yml")
    parser.add_argument("--preset", help="配置文件中的实验预设 id，默认与命令同名")
    parser.add_argument("--log-dir", help="日志目录，启用滚动文件日志")
    parser.add_argument("--verbose", action="store_true", help="输出 DEBUG 日志")
    parser.add_argument("--workers", type=int, help="并行工作线程数")

    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int)
    common.add_argument("--n", type=int, dest="n")
    common.add_argument("--N", type=int, dest="N")
    common.add_argument("--k", type=int)
    common.add_argument("--beta", type=float)
    common.add_argument("--beta-grid", dest="beta_grid", help="start:stop:points,log|lin")
    common.add_argument("--objective", choices=OBJECTIVE_CHOICES)
    common.add_argument("--surrogate", action="append", choices=SURROGATE_CHOICES, dest="surrogates")
    common.add_argument("--trials", type=int)
    common.add_argument("--random-trials", type=int, dest="random_trials")
    common.add_argument("--samples", type=int)
    common.add_argument("--exact-threshold", type=int, dest="exact_threshold")
    common.add_argument("--interp", choices=INTERP_CHOICES)
    common.add_argument("--format", choices=FORMAT_CHOICES)
    common.add_argument("--out", help="结果文件，缺省写到标准输出")
    normalize = common.add_mutually_exclusive_group()
    normalize.add_argument("--normalize-columns", dest="normalize_columns", action="store_true", default=None)
    normalize.add_argument("--raw-columns", dest="normalize_columns", action="store_false")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("sweep-beta", parents=[common], help="β 网格上的 δ 界与性能界对比")
    commands.add_parser("sensor-select", parents=[common], help="贪心与随机传感器选择的 MSE 对比")
    analyze = commands.add_parser("analyze", parents=[common], help="单个实例的接近度报告")
    source = analyze.add_mutually_exclusive_group(required=True)
    source.add_argument("--matrix", help="n×N 数据矩阵 CSV（无表头）")
    source.add_argument("--tabular", help="mask,value 取值表 CSV")
    analyze.add_argument("--surrogate-table", dest="surrogate_table", help="代理函数取值表 CSV")
    verify = commands.add_parser("verify", parents=[common], help="运行性质检验套件")
    verify.add_argument("--suite", default="all", help=f"{', '.join(SUITES)} 或 all")
    bounds = commands.add_parser("bounds", help="单参数性能界扫描，输出 (parameter, value) 行")
    bounds.add_argument("--kind", required=True, choices=SWEEP_KINDS)
    bounds.add_argument("--grid", required=True, help="start:stop:points,lin|log")
    budget = bounds.add_mutually_exclusive_group()
    budget.add_argument("--k", type=int)
    budget.add_argument("--limit", action="store_true", help="k → ∞ 的极限形式")
    bounds.add_argument("--alpha", type=float, default=1.0, help="bian / delta 扫描时固定的 α")
    bounds.add_argument("--format", choices=FORMAT_CHOICES)
    bounds.add_argument("--out", help="结果文件，缺省写到标准输出")
    commands.add_parser("init-config", help="写出默认配置文件")
    return parser


OVERRIDE_KEYS = (
    "seed",
    "n",
    "N",
    "k",
    "beta",
    "beta_grid",
    "objective",
    "surrogates",
    "trials",
    "random_trials",
    "samples",
    "exact_threshold",
    "interp",
    "format",
    "out",
    "workers",
    "normalize_columns",
)


def render(result: CommandResult, fmt: str) -> str:
    if fmt == "csv":
        return to_csv_text(result.rows, result.columns)
    return to_json_text(result.to_dict())


async def emit(text: str, out: Optional[str]):
    if out:
        await async_write_file(out, text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


async def run(args: argparse.Namespace) -> int:
    """
    执行子命令，返回退出码
    """
    manager = ConfigManager(args.config)
    if args.command == "init-config":
        manager.save_defaults()
        return EXIT_OK

    logger = init_app(
        log_dir=args.log_dir or manager.get("log_dir"),
        level=logging.DEBUG if args.verbose else logging.INFO,
    )
    experiment = args.preset or args.command
    display_config_overview(manager, experiment)
    overrides = {key: getattr(args, key, None) for key in OVERRIDE_KEYS}
    if args.command == "bounds":
        # 扫描的 k 与地面集规模无关，不参与配置校验
        overrides.pop("k")
    config = manager.experiment_config(experiment, **overrides)
    jobs = JobManager(config.workers)
    logger.info(f"deltasub v{__version__} 执行 {args.command}")

    if args.command == "sweep-beta":
        result = await jobs.run_job(args.command, lambda: cmd_sweep_beta(config, jobs))
        await emit(render(result, config.format), config.out)
        return EXIT_OK

    if args.command == "sensor-select":
        result = await jobs.run_job(args.command, lambda: cmd_sensor_select(config, jobs))
        await emit(render(result, config.format), config.out)
        return EXIT_OK

    if args.command == "bounds":
        k = LIMIT if args.limit else (args.k if args.k is not None else config.k)
        result = cmd_bounds(args.kind, parse_grid(args.grid), k, args.alpha)
        await emit(render(result, config.format), config.out)
        return EXIT_OK

    if args.command == "analyze":
        result = cmd_analyze(config, args.matrix, args.tabular, args.surrogate_table)
        await emit(to_json_text(result.to_dict()), config.out)
        return EXIT_OK

    results = await jobs.run_job(args.command, lambda: cmd_verify(args.suite, config.seed, jobs))
    passed = all(r.passed for r in results)
    summary = {
        "passed": passed,
        "seed": config.seed,
        "suites": [r.to_dict() for r in results],
    }
    await emit(to_json_text(summary), config.out)
    return EXIT_OK if passed else EXIT_VERIFY_FAILED


def main(argv: Optional[List[str]] = None) -> int:
    """
    命令行入口，返回退出码：0 成功，1 参数/配置/输入错误，2 检验失败
    """
    from . import logger

    args = build_parser().parse_args(argv)
    try:
        return asyncio.run(run(args))
    except DeltaSubError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        sys.stderr.write(to_json_text(e.to_dict()))
        return EXIT_VALIDATION
    except OSError as e:
        logger.error(f"文件读写失败: {str(e)}")
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        logger.info("程序被用户中断")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
