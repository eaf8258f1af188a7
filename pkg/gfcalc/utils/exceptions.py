"""
自定义异常模块
定义项目中使用的所有自定义异常类，每个异常携带错误码与命令行退出码
"""

from typing import Optional


class GFCalcException(Exception):
    """应用基础异常类"""

    exit_code = 1

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message = message
        self.error_code = error_code
        super().__init__(self.message)


class ValidationException(GFCalcException):
    """参数或前置条件验证异常"""

    pass


class ParameterValidationError(ValidationException):
    """参数验证错误"""

    def __init__(self, parameter: str, message: str = ""):
        full_message = f"参数 '{parameter}' 验证失败"
        if message:
            full_message += f": {message}"
        self.parameter = parameter
        super().__init__(full_message, "PARAMETER_VALIDATION_ERROR")


class DimensionError(ValidationException):
    """维度不受支持"""

    def __init__(self, dim: int):
        super().__init__(f"仅支持一维 (dim=1)，收到 dim={dim}", "UNSUPPORTED_DIMENSION")


class ParseException(GFCalcException):
    """迷你语言解析异常"""

    def __init__(self, message: str, text: str = "", position: int = -1):
        self.text = text
        self.position = position
        full_message = message
        if position >= 0:
            full_message += f" (位置 {position}: {text!r})"
        super().__init__(full_message, "PARSE_ERROR")


class NumericalException(GFCalcException):
    """数值计算失败"""

    exit_code = 3


class InsufficientSamplesError(NumericalException):
    """可用于回归的样本不足"""

    def __init__(self, usable: int, required: int):
        message = f"insufficient samples: 可用尾部样本 {usable} 个，至少需要 {required} 个"
        self.usable = usable
        self.required = required
        super().__init__(message, "INSUFFICIENT_SAMPLES")


class QuadratureDepthError(NumericalException):
    """自适应积分超过最大细分深度"""

    def __init__(self, estimate: float, achieved_tol: float, depth: int):
        message = (
            f"积分细分深度超过 {depth}: 最佳估计 {estimate!r}，"
            f"达到的误差 {achieved_tol:.3e}"
        )
        self.estimate = estimate
        self.achieved_tol = achieved_tol
        super().__init__(message, "QUADRATURE_DEPTH_EXCEEDED")


class IllConditionedError(NumericalException):
    """矩方程组病态"""

    def __init__(self, residual: float, size: int):
        message = f"ill-conditioned moment system: 规模 {size}，残差 {residual:.3e}"
        self.residual = residual
        super().__init__(message, "ILL_CONDITIONED")


class DomainException(GFCalcException):
    """数学对象不满足定义域或构造条件"""

    pass


class UnboundedSupportError(DomainException):
    """需要紧支撑但支撑无界"""

    def __init__(self, what: str = "test function"):
        super().__init__(f"{what} 的支撑无界", "UNBOUNDED_SUPPORT")


class NotInCatalogError(DomainException):
    """分布不在目录中"""

    def __init__(self, message: str = "not in catalog"):
        super().__init__(message, "NOT_IN_CATALOG")


class NotCompactlySupportedError(DomainException):
    """广义点的尾部离开紧集"""

    def __init__(self, message: str = "not compactly supported"):
        super().__init__(message, "NOT_COMPACTLY_SUPPORTED")


class OutsideUOmegaError(DomainException):
    """(φ, x) 不属于 U(Ω)"""

    def __init__(self, x: float, interval: tuple):
        message = f"outside U(Ω): x={x!r} 不在 Ω_φ={interval} 中"
        super().__init__(message, "OUTSIDE_U_OMEGA")


class InvalidRadiusError(DomainException):
    """锐球半径不是正可逆广义数"""

    def __init__(self, message: str = "invalid radius"):
        super().__init__(message, "INVALID_RADIUS")


class CBoundedWitnessError(DomainException):
    """复合缺少 c-有界见证"""

    def __init__(self, message: str = "c-bounded witness missing"):
        super().__init__(message, "C_BOUNDED_WITNESS")


class OmegaMismatchError(DomainException):
    """广义函数定义域不一致"""

    def __init__(self, left: tuple, right: tuple):
        super().__init__(f"omega mismatch: {left} != {right}", "OMEGA_MISMATCH")


class SupportOverflowError(DomainException):
    """切片支撑超出扫描窗口"""

    def __init__(self, u: float, box: float):
        message = f"support overflows scan window: u={u!r}，窗口 [-{box}, {box}]"
        super().__init__(message, "SUPPORT_OVERFLOW")


class PanelGenerationError(NumericalException):
    """测试函数面板生成失败"""

    def __init__(self, q: int, attempts: int):
        message = f"𝒜_{q} 面板生成在 {attempts} 次尝试后仍未通过矩认证"
        super().__init__(message, "PANEL_GENERATION_FAILED")


class ReportWriteError(GFCalcException):
    """报告文件写入失败"""

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(f"写入报告 {path} 失败: {reason}", "REPORT_WRITE_FAILED")
