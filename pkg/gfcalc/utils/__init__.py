"""
工具模块
包含异常类和日志工具
"""

from .exceptions import *
from .logger import *

__all__ = [
    # 异常类
    "GFCalcException",
    "ValidationException",
    "ParameterValidationError",
    "DimensionError",
    "ParseException",
    "NumericalException",
    "InsufficientSamplesError",
    "QuadratureDepthError",
    "IllConditionedError",
    "DomainException",
    "UnboundedSupportError",
    "NotInCatalogError",
    "NotCompactlySupportedError",
    "OutsideUOmegaError",
    "InvalidRadiusError",
    "CBoundedWitnessError",
    "OmegaMismatchError",
    "SupportOverflowError",
    "PanelGenerationError",
    "ReportWriteError",
    # 日志工具
    "Logger",
    "app_logger",
    "asym_logger",
    "quad_logger",
    "moll_logger",
    "alg_logger",
    "plot_logger",
    "log_function_call",
    "log_verdict",
    "log_numerical_event",
]
