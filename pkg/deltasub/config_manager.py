import os
import yaml
import copy
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Optional, Dict, List, Tuple

import numpy as np

from .const import DEFAULT_EXACT_THRESHOLD, MAX_GROUND_SIZE
from .errors import ConfigError
from . import logger

OBJECTIVE_CHOICES = ("neg-trace-inv", "min-eig")
SURROGATE_CHOICES = ("log-det", "trace", "max-eig")
FORMAT_CHOICES = ("csv", "json")
INTERP_CHOICES = ("include-base", "rank1-only")


def parse_grid(text: str, key: str = "grid", default_scale: str = "lin", positive: bool = False) -> Tuple[float, ...]:
    """
    解析 "start:stop:points,log|lin"，返回严格递增的网格

    positive 为真或刻度为 log 时要求 start > 0

    Raises:
        ConfigError: 格式或取值错误
    """
    try:
        head, _, scale = str(text).partition(",")
        start, stop, points = head.split(":")
        start, stop, points = float(start), float(stop), int(points)
    except ValueError:
        raise ConfigError([f"{key} 格式应为 start:stop:points,log|lin: {text!r}"]) from None
    scale = scale.strip() or default_scale
    problems = []
    if scale not in ("log", "lin"):
        problems.append(f"{key} 刻度须为 log 或 lin: {scale!r}")
    if (positive or scale == "log") and not 0 < start < stop:
        problems.append(f"{key} 须满足 0 < start < stop: {start}, {stop}")
    elif not start < stop:
        problems.append(f"{key} 须满足 start < stop: {start}, {stop}")
    if points < 2:
        problems.append(f"{key} 至少 2 个点: {points}")
    if problems:
        raise ConfigError(problems)
    if scale == "log":
        grid = np.geomspace(start, stop, points)
    else:
        grid = np.linspace(start, stop, points)
    return tuple(float(b) for b in grid)


def parse_beta_grid(text: str) -> Tuple[float, ...]:
    """β 网格，默认对数刻度"""
    return parse_grid(text, "beta_grid", "log", positive=True)


@dataclass(frozen=True)
class ExperimentConfig:
    """
    单次实验的有效配置，由配置文件、预设和命令行参数合并而成
    """

    seed: int = 20190612
    n: int = 10
    N: int = 30
    k: int = 5
    beta: float = 1.0
    beta_grid: str = "0.1:100:13,log"
    objective: str = "neg-trace-inv"
    surrogates: Tuple[str, ...] = ("log-det",)
    trials: int = 500
    random_trials: int = 100
    samples: int = 20000
    exact_threshold: int = DEFAULT_EXACT_THRESHOLD
    interp: str = "include-base"
    format: str = "csv"
    out: Optional[str] = None
    workers: int = 4
    normalize_columns: bool = True

    def validate(self) -> "ExperimentConfig":
        """
        检查全部约束，所有问题一次性汇总为 ConfigError
        """
        problems: List[str] = []
        if not 0 <= self.seed < 1 << 64:
            problems.append(f"seed 须为 64 位无符号整数: {self.seed}")
        for name in ("n", "N", "k", "trials", "random_trials", "samples", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                problems.append(f"{name} 须为正整数: {value!r}")
        if isinstance(self.N, int) and self.N > MAX_GROUND_SIZE:
            problems.append(f"N 最多为 {MAX_GROUND_SIZE}: {self.N}")
        if isinstance(self.k, int) and isinstance(self.N, int) and self.k > self.N:
            problems.append(f"k 不能超过 N: k={self.k}, N={self.N}")
        if not (isinstance(self.beta, (int, float)) and self.beta > 0):
            problems.append(f"beta 须为正: {self.beta!r}")
        try:
            parse_beta_grid(self.beta_grid)
        except ConfigError as e:
            problems.extend(e.messages)
        if self.objective not in OBJECTIVE_CHOICES:
            problems.append(f"objective 须为 {OBJECTIVE_CHOICES} 之一: {self.objective!r}")
        for surrogate in self.surrogates:
            if surrogate not in SURROGATE_CHOICES:
                problems.append(f"surrogate 须为 {SURROGATE_CHOICES} 之一: {surrogate!r}")
        if self.interp not in INTERP_CHOICES:
            problems.append(f"interp 须为 {INTERP_CHOICES} 之一: {self.interp!r}")
        if self.format not in FORMAT_CHOICES:
            problems.append(f"format 须为 {FORMAT_CHOICES} 之一: {self.format!r}")
        if not isinstance(self.exact_threshold, int) or self.exact_threshold < 0:
            problems.append(f"exact_threshold 须为非负整数: {self.exact_threshold!r}")
        if problems:
            raise ConfigError(problems)
        return self

    def grid(self) -> Tuple[float, ...]:
        return parse_beta_grid(self.beta_grid)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """忽略值为 None 的覆盖项"""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["surrogates"] = list(self.surrogates)
        return data


CONFIG_KEYS = tuple(f.name for f in fields(ExperimentConfig) if f.name != "out")


class ConfigManager:
    """
    配置管理类
    负责加载、保存和访问YAML格式的配置文件
    """

    def __init__(self, config_path: Optional[str] = None):
        """初始化配置管理器，文件不存在时使用内置默认值"""
        self._config_path = config_path or os.path.join("config", "config.yml")
        self._config: Dict[str, Any] = {}
        self._loaded_from_file = False
        self._default_config = {
            **{key: getattr(ExperimentConfig(), key) for key in CONFIG_KEYS},
            "surrogates": ["log-det"],
            "log_dir": None,
            "experiments": [
                {"id": "sweep-beta", "normalize_columns": True},
                {
                    "id": "sensor-select",
                    "n": 8,
                    "N": 20,
                    "k": 5,
                    "objective": "neg-trace-inv",
                    "normalize_columns": False,
                    "format": "json",
                },
            ],
        }
        self.load()

    def load(self) -> None:
        """从文件加载配置"""
        if not os.path.exists(self._config_path):
            self._config = copy.deepcopy(self._default_config)
            self._loaded_from_file = False
            logger.debug(f"配置文件不存在，使用内置默认值: {self._config_path}")
            return

        try:
            with open(self._config_path, "r", encoding="utf-8") as f:
                loaded = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            logger.error(f"配置文件格式错误: {str(e)}")
            raise ConfigError([f"配置文件格式错误: {str(e)}"]) from e
        except IOError as e:
            logger.error(f"配置文件读取失败: {str(e)}")
            raise ConfigError([f"配置文件读取失败: {str(e)}"]) from e
        if not isinstance(loaded, dict):
            raise ConfigError([f"配置文件顶层须为映射: {self._config_path}"])
        unknown = [key for key in loaded if key not in self._default_config]
        if unknown:
            raise ConfigError([f"未知配置项: {key}" for key in unknown])
        self._config = loaded
        self._loaded_from_file = True
        logger.info(f"配置文件加载成功: {self._config_path}")

    def save_defaults(self) -> str:
        """把内置默认配置写入配置文件路径"""
        folder = os.path.dirname(self._config_path)
        if folder:
            os.makedirs(folder, exist_ok=True)
        try:
            with open(self._config_path, "w", encoding="utf-8") as f:
                yaml.dump(
                    self._default_config,
                    f,
                    allow_unicode=True,
                    default_flow_style=False,
                    sort_keys=False,
                )
            logger.info(f"默认配置文件已创建: {self._config_path}")
        except IOError as e:
            logger.error(f"创建默认配置文件失败: {str(e)}")
            raise
        return self._config_path

    def get(self, key: str, experiment: Optional[str] = None, default: Any = None) -> Any:
        """获取配置值：实验预设 → 全局 → default → 内置默认值"""
        if experiment is not None:
            preset = self._get_preset(experiment)
            if preset is not None and key in preset:
                return preset[key]

        if key in self._config:
            return self._config[key]

        if default is not None:
            return default

        if key in self._default_config:
            return self._default_config[key]

        logger.warning(f"配置项 {key} 不存在，且无默认值")
        return None

    def _get_preset(self, experiment: str) -> Optional[Dict[str, Any]]:
        presets = self._config.get("experiments", self._default_config["experiments"])
        for preset in presets or []:
            if preset.get("id") == experiment:
                return preset
        return None

    def get_experiment_ids(self) -> List[str]:
        presets = self._config.get("experiments", self._default_config["experiments"])
        return [preset.get("id") for preset in presets or [] if "id" in preset]

    def experiment_config(self, experiment: Optional[str] = None, **overrides: Any) -> ExperimentConfig:
        """
        合并配置与命令行覆盖项并校验

        Raises:
            ConfigError: 任一约束不满足
        """
        values = {key: self.get(key, experiment) for key in CONFIG_KEYS}
        values["surrogates"] = tuple(values["surrogates"] or ())
        config = ExperimentConfig(**values).with_overrides(**overrides)
        if isinstance(config.surrogates, list):
            config = replace(config, surrogates=tuple(config.surrogates))
        return config.validate()

    def get_config_path(self) -> str:
        return self._config_path

    def loaded_from_file(self) -> bool:
        return self._loaded_from_file


def display_config_overview(manager: ConfigManager, experiment: Optional[str] = None) -> None:
    """显示配置概览信息"""
    if manager.loaded_from_file():
        logger.info(f"📁 配置文件路径: {manager.get_config_path()}")
    else:
        logger.info("📁 未找到配置文件，使用内置默认值")
    logger.info(f"  • 随机种子: {manager.get('seed', experiment)}")
    logger.info(
        f"  • 规模: n={manager.get('n', experiment)}, N={manager.get('N', experiment)}, "
        f"k={manager.get('k', experiment)}"
    )
    logger.info(f"  • β 网格: {manager.get('beta_grid', experiment)}")
    logger.info(f"  • 目标函数: {manager.get('objective', experiment)}")
    logger.info(f"  • 代理函数: {', '.join(manager.get('surrogates', experiment) or [])}")
    logger.info(f"  • 精确计算阈值: N ≤ {manager.get('exact_threshold', experiment)}")
    logger.info(f"  • 列归一化: {'✅' if manager.get('normalize_columns', experiment) else '❌'}")
    logger.info(f"  • 工作线程: {manager.get('workers', experiment)}")
    presets = manager.get_experiment_ids()
    logger.info(f"🔧 已配置的实验预设: {', '.join(presets) if presets else '无'}")
