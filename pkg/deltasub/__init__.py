"""
deltasub 包初始化文件

基数约束下单调集合函数的贪心最大化、δ-近似子模性度量与性能界
"""

# 包版本信息
__version__ = "1.0.0"

logger = None


def init_app(log_dir=None, level=None):
    """
    (重新)初始化应用组件

    Args:
        log_dir: 日志目录，为空时只输出到控制台
        level: 日志级别，默认 INFO
    """
    global logger
    import logging
    from .logger import setup_logger

    logger = setup_logger(log_dir=log_dir, level=level or logging.INFO)
    return logger


init_app()
