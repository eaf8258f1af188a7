"""
日志工具模块
统一管理应用的日志配置和记录
"""

import functools
import logging
import logging.handlers
import os
from typing import Optional

from ..config import config


class Logger:
    """日志管理类"""

    _loggers = {}

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        """获取日志记录器"""
        if name not in cls._loggers:
            cls._loggers[name] = cls._setup_logger(name)
        return cls._loggers[name]

    @classmethod
    def _setup_logger(cls, name: str) -> logging.Logger:
        """设置日志记录器"""
        logger = logging.getLogger(name)
        logger.setLevel(getattr(logging, config.log.log_level.upper()))

        # 避免重复添加处理器
        if logger.handlers:
            return logger

        formatter = logging.Formatter(
            config.log.log_format, datefmt=config.log.date_format
        )

        # 控制台处理器写到stderr，stdout留给报告
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        # 仅在配置了日志目录时写文件
        if config.log.log_dir:
            os.makedirs(config.log.log_dir, exist_ok=True)
            file_handler = logging.handlers.RotatingFileHandler(
                os.path.join(config.log.log_dir, config.log.log_file),
                maxBytes=config.log.max_bytes,
                backupCount=config.log.backup_count,
                encoding="utf-8",
            )
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        logger.propagate = False
        return logger

    @classmethod
    def set_level(cls, level: str) -> None:
        """调整所有已创建记录器的级别"""
        for logger in cls._loggers.values():
            logger.setLevel(getattr(logging, level.upper()))

    @classmethod
    def shutdown(cls):
        """关闭所有日志记录器"""
        logging.shutdown()


# 预定义的日志记录器
app_logger = Logger.get_logger("gfcalc")
asym_logger = Logger.get_logger("gfcalc.asymptotics")
quad_logger = Logger.get_logger("gfcalc.smoothfn")
moll_logger = Logger.get_logger("gfcalc.mollifier")
alg_logger = Logger.get_logger("gfcalc.algebra")
plot_logger = Logger.get_logger("gfcalc.plots")


def log_function_call(logger: Optional[logging.Logger] = None):
    """函数调用日志装饰器"""

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            current_logger = app_logger if logger is None else logger

            current_logger.debug(f"调用函数: {func.__name__}")
            try:
                result = func(*args, **kwargs)
                current_logger.debug(f"函数 {func.__name__} 执行成功")
                return result
            except Exception as e:
                current_logger.error(f"函数 {func.__name__} 执行失败: {e}")
                raise

        return wrapper

    return decorator


def log_verdict(operation: str, verdict: str, details: str = ""):
    """记录分类判定结果"""
    message = f"判定 - 操作: {operation}, 结果: {verdict}"
    if details:
        message += f", 详情: {details}"
    alg_logger.info(message)


def log_numerical_event(
    logger: logging.Logger, operation: str, status: str, details: str = ""
):
    """记录数值计算事件（回退、收缩网格、重新生成等）"""
    message = f"数值事件 - 操作: {operation}, 状态: {status}"
    if details:
        message += f", 详情: {details}"
    logger.warning(message)
