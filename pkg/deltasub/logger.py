import logging
from logging.handlers import RotatingFileHandler
import os
from typing import Optional


class ColoredFormatter(logging.Formatter):
    COLORS = {
        "DEBUG": "\033[94m",
        "INFO": "\033[92m",
        "WARNING": "\033[93m",
        "ERROR": "\033[91m",
        "CRITICAL": "\033[95m",
        "RESET": "\033[0m",
    }

    def format(self, record):
        # 复制一份，避免文件处理器拿到带颜色的级别名
        record = logging.makeLogRecord(record.__dict__)
        levelname = record.levelname
        color = self.COLORS.get(levelname, "")
        record.levelname = f"{color}{levelname}{self.COLORS['RESET']}"
        return super().format(record)


def setup_logger(log_dir: Optional[str] = None, level: int = logging.INFO):
    """
    配置全局日志记录器
    :param log_dir: 日志目录，为空时只输出到控制台（stderr）
    :param level: 日志级别
    :return: 配置好的logger对象
    """
    logger = logging.getLogger("deltasub")
    logger.setLevel(level)
    logger.propagate = False

    # 重复初始化时替换处理器，避免重复输出
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    # 统一的日志格式：[时间] 级别 模块: 消息
    datefmt = "%Y-%m-%d %H:%M:%S"
    fmt = "[%(asctime)s] %(levelname)s %(module)s: %(message)s"

    # 控制台处理器，stdout 留给结果输出
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(ColoredFormatter(fmt, datefmt=datefmt))
    logger.addHandler(console_handler)

    if log_dir:
        if not os.path.exists(log_dir):
            os.makedirs(log_dir)
        # 文件处理器
        file_handler = RotatingFileHandler(
            os.path.join(log_dir, "deltasub.log"),
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=7,
            encoding="utf-8",
        )
        file_handler.setLevel(level)
        file_handler.setFormatter(logging.Formatter(fmt, datefmt=datefmt))
        logger.addHandler(file_handler)

    return logger
