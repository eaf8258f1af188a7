"""
广义数模块
Colombeau 广义数环 ℝ̃ 与（紧支撑）广义点：序、格运算、可逆性、无穷小与锐球
"""

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Union

import numpy as np

from ..config import config
from ..models import Verdict, verdict_and
from ..utils.exceptions import (
    InsufficientSamplesError,
    InvalidRadiusError,
    NotCompactlySupportedError,
    ParameterValidationError,
)
from ..utils.logger import alg_logger, log_verdict
from .asymptotics import (
    EpsGrid,
    LogSample,
    Net,
    as_net,
    default_grid,
    estimate_order,
    is_moderate,
    is_negligible,
    tends_to_zero,
)
from .smoothfn import CompactSet, OpenInterval


class GenNumber:
    """ℝ̃ 的元素，由代表元网给出；相等与序均为语义判定，不提供哈希"""

    __hash__ = None  # type: ignore[assignment]

    def __init__(self, net: Union[Net, float], grid: Optional[EpsGrid] = None):
        self.net = as_net(net)
        self.grid = grid if grid is not None else default_grid()

    @classmethod
    def from_real(cls, c: float, grid: Optional[EpsGrid] = None) -> "GenNumber":
        """ℝ → ℝ̃ 的常数嵌入"""
        return cls(Net.constant(c), grid)

    @classmethod
    def from_rule(
        cls, rule: Callable[[float], float], grid: Optional[EpsGrid] = None, label: str = "net"
    ) -> "GenNumber":
        return cls(Net.from_real(rule, label), grid)

    def samples(self) -> List[LogSample]:
        return self.net.samples(self.grid)

    def __call__(self, eps: float) -> float:
        return self.net(eps)

    def _wrap(self, net: Net) -> "GenNumber":
        return GenNumber(net, self.grid)

    def _other(self, other) -> Net:
        return other.net if isinstance(other, GenNumber) else as_net(other)

    # ---- 环运算 ----

    def __add__(self, other) -> "GenNumber":
        return self._wrap(self.net + self._other(other))

    __radd__ = __add__

    def __sub__(self, other) -> "GenNumber":
        return self._wrap(self.net - self._other(other))

    def __rsub__(self, other) -> "GenNumber":
        return self._wrap(self._other(other) - self.net)

    def __mul__(self, other) -> "GenNumber":
        return self._wrap(self.net * self._other(other))

    __rmul__ = __mul__

    def __neg__(self) -> "GenNumber":
        return self._wrap(-self.net)

    def __abs__(self) -> "GenNumber":
        return self._wrap(abs(self.net))

    def __pow__(self, p: float) -> "GenNumber":
        return self._wrap(self.net**p)

    def __repr__(self) -> str:
        return f"GenNumber[{self.net.label}]"


def add(x: GenNumber, y: GenNumber) -> GenNumber:
    return x + y


def sub(x: GenNumber, y: GenNumber) -> GenNumber:
    return x - y


def mul(x: GenNumber, y: GenNumber) -> GenNumber:
    return x * y


def neg(x: GenNumber) -> GenNumber:
    return -x


def abs_(x: GenNumber) -> GenNumber:
    return abs(x)


def scalar_mul(c: float, x: GenNumber) -> GenNumber:
    return x * float(c)


def inf(x: GenNumber, y: GenNumber) -> GenNumber:
    """[x_ε] ∧ [y_ε] = [min(x_ε, y_ε)]"""
    return x._wrap(x.net.minimum(y.net))


def sup(x: GenNumber, y: GenNumber) -> GenNumber:
    """[x_ε] ∨ [y_ε] = [max(x_ε, y_ε)]"""
    return x._wrap(x.net.maximum(y.net))


# ============================================================
# 判定
# ============================================================


def is_moderate_number(x: GenNumber, N_cap: Optional[int] = None) -> Verdict:
    """x 的代表元是否为适度网（属于 ℝ̃）"""
    return is_moderate(x.samples(), N_cap)


def eq_tilde(x: GenNumber, y: GenNumber, m_max: Optional[int] = None) -> Verdict:
    """(x_ε) ∼ (y_ε)：|x_ε - y_ε| 可忽略"""
    verdict = is_negligible(abs(x - y).samples(), m_max)
    log_verdict("eq_tilde", verdict)
    return verdict


def leq(x: GenNumber, y: GenNumber, m_max: Optional[int] = None) -> Verdict:
    """x ≤ y：max(x_ε - y_ε, 0) 可忽略"""
    verdict = is_negligible((x - y).net.positive_part().samples(x.grid), m_max)
    log_verdict("leq", verdict)
    return verdict


_INVERTIBLE_RESIDUAL_SLACK = 2.0


def is_invertible(x: GenNumber, m_cap: Optional[int] = None) -> Verdict:
    """x ∈ ℝ̃*：存在 m 使尾部 |x_ε| ≥ ε^m"""
    if m_cap is None:
        m_cap = config.tolerance.m_cap
    verdict = _is_invertible(x, m_cap)
    log_verdict("is_invertible", verdict, f"m_cap={m_cap}")
    return verdict


def _is_invertible(x: GenNumber, m_cap: int) -> Verdict:
    if eq_tilde(x, GenNumber.from_real(0.0, x.grid)) == Verdict.YES:
        return Verdict.NO
    samples = x.samples()
    quarter = samples[-max(1, len(samples) // 4) :]
    below = [s for s in quarter if s.is_zero or s.log_abs < m_cap * s.log_eps]
    if 2 * len(below) >= len(quarter):
        return Verdict.NO

    try:
        report = estimate_order(samples)
    except InsufficientSamplesError:
        return Verdict.INCONCLUSIVE
    if (
        report.zeros_dropped == 0
        and math.isfinite(report.slope)
        and report.r2 >= config.tolerance.r2_min
        and report.slope <= m_cap
    ):
        # 拟合线下方的最深偏离不能太大（近零子列）
        residuals = [
            s.log_abs - (report.slope * s.log_eps + report.intercept)
            for s in samples
            if s.eps <= 1.0 / 16 and not s.is_zero
        ]
        if not residuals or min(residuals) >= -_INVERTIBLE_RESIDUAL_SLACK:
            return Verdict.YES
    return Verdict.INCONCLUSIVE


def strict_lt(x: GenNumber, y: GenNumber) -> Verdict:
    """x < y：x ≤ y 且 y - x 可逆"""
    verdict = verdict_and(leq(x, y), is_invertible(y - x))
    log_verdict("strict_lt", verdict)
    return verdict


def is_infinitesimal(x: GenNumber) -> Verdict:
    return tends_to_zero(abs(x).samples())


def approx(x: GenNumber, y: GenNumber) -> Verdict:
    """x ≈ y：x - y 为无穷小"""
    return tends_to_zero(abs(x - y).samples())


def sharp_ball_contains(center: GenNumber, rho: GenNumber, y: GenNumber) -> Verdict:
    """y ∈ B^S_ρ(center)：|y - center| < ρ"""
    zero = GenNumber.from_real(0.0, rho.grid)
    if strict_lt(zero, rho) == Verdict.NO:
        raise InvalidRadiusError(f"invalid radius: {rho!r} 不是正可逆广义数")
    return strict_lt(abs(y - center), rho)


def div(x: GenNumber, y: GenNumber) -> GenNumber:
    """x / y，仅对可逆的 y 定义"""
    if is_invertible(y) != Verdict.YES:
        raise ParameterValidationError("y", "除数不是可逆广义数")
    return x._wrap(x.net / y.net)


# ============================================================
# 广义点
# ============================================================


@dataclass
class GenPoint:
    """Ω 中的广义点；witness 非空时为紧支撑点，threshold 为 ε₀"""

    net: Net
    omega: OpenInterval
    witness: Optional[CompactSet] = None
    threshold: float = 1.0
    grid: EpsGrid = field(default_factory=default_grid)

    def __call__(self, eps: float) -> float:
        return self.net(eps)

    @property
    def is_compactly_supported(self) -> bool:
        return self.witness is not None

    def as_number(self) -> GenNumber:
        return GenNumber(self.net, self.grid)


def make_moderate_point(
    net: Union[Net, Callable[[float], float]],
    omega: OpenInterval,
    grid: Optional[EpsGrid] = None,
) -> GenPoint:
    """Ω_M 中的点：网适度且尾部落在 Ω 内"""
    if not isinstance(net, Net):
        net = Net.from_real(net)
    grid = grid if grid is not None else default_grid()
    if is_moderate(net.samples(grid)) == Verdict.NO:
        raise ParameterValidationError("net", "广义点的代表元不是适度网")
    tail = grid.values[len(grid) // 2 :]
    if not all(omega.contains(net(eps)) for eps in tail):
        raise ParameterValidationError("net", "网的尾部不在 Ω 内")
    return GenPoint(net, omega, None, 1.0, grid)


def make_point(
    net: Union[Net, Callable[[float], float]],
    K: CompactSet,
    omega: OpenInterval,
    grid: Optional[EpsGrid] = None,
) -> GenPoint:
    """Ω̃_c 中的点：存在 ε₀ 使 ε < ε₀ 时 x_ε ∈ K"""
    if not isinstance(net, Net):
        net = Net.from_real(net)
    grid = grid if grid is not None else default_grid()
    if not omega.contains_compact(K):
        raise ParameterValidationError("K", f"K={K.to_list()} 不严格包含于 Ω={omega.to_list()}")

    inside = np.array([K.contains(net(eps)) for eps in grid.values])
    if inside.all():
        threshold = 1.0
    else:
        last_out = int(np.nonzero(~inside)[0][-1])
        if last_out >= len(grid) - max(1, len(grid) // 4):
            raise NotCompactlySupportedError(
                f"not compactly supported: ε={grid[last_out]:.3e} 处 x_ε={net(grid[last_out])!r} ∉ K"
            )
        threshold = grid[last_out + 1]
    alg_logger.debug(f"广义点 {net.label}: ε₀ = {threshold}")
    return GenPoint(net, omega, K, threshold, grid)
