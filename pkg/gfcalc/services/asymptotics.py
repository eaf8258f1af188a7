"""
渐近分类模块
在几何 ε 网格上对数域采样 ε-网，并按适度/可忽略定义给出三值判定
"""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np

from ..config import config
from ..models import OrderReport, Verdict
from ..utils.exceptions import InsufficientSamplesError, ParameterValidationError
from ..utils.logger import asym_logger, log_verdict

T = TypeVar("T")

MIN_FIT_POINTS = 4
MIN_GRID_POINTS = 8
_NEG_INF = -math.inf


# ============================================================
# 网格与样本
# ============================================================


@dataclass(frozen=True)
class EpsGrid:
    """严格递减、位于 (0,1] 的有限 ε 序列"""

    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) < MIN_GRID_POINTS:
            raise ParameterValidationError("grid", f"至少需要 {MIN_GRID_POINTS} 个网格点，收到 {len(values)} 个")
        if any(not (0.0 < v <= 1.0) for v in values):
            raise ParameterValidationError("grid", "网格值必须位于 (0,1]")
        if any(b >= a for a, b in zip(values, values[1:])):
            raise ParameterValidationError("grid", "网格值必须严格递减")

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, index):
        return self.values[index]

    @property
    def log_values(self) -> np.ndarray:
        return np.log(np.asarray(self.values))

    def below(self, eps_max: float) -> "EpsGrid":
        """只保留 ε ≤ eps_max 的网格点"""
        return EpsGrid(tuple(v for v in self.values if v <= eps_max))


def default_grid(k_min: Optional[int] = None, k_max: Optional[int] = None) -> EpsGrid:
    """ε_k = 2^(-k)，k = k_min..k_max"""
    if k_min is None:
        k_min = config.grid.k_min
    if k_max is None:
        k_max = config.grid.k_max
    if not (1 <= k_min < k_max <= 60):
        raise ParameterValidationError(
            "grid", f"要求 1 ≤ k_min < k_max ≤ 60，收到 k_min={k_min}, k_max={k_max}"
        )
    return EpsGrid(tuple(2.0 ** (-k) for k in range(k_min, k_max + 1)))


@dataclass(frozen=True)
class LogValue:
    """对数域实数：value = sign·exp(log_abs)，零值为 (0, -inf)"""

    sign: int
    log_abs: float

    @classmethod
    def of(cls, value: float) -> "LogValue":
        if value == 0.0:
            return ZERO_LOG
        if math.isnan(value):
            raise ParameterValidationError("value", "网值为 NaN")
        return cls(1 if value > 0 else -1, math.log(abs(value)) if math.isfinite(value) else math.inf)

    @property
    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        if self.log_abs > 709.0:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_abs)

    def __neg__(self) -> "LogValue":
        return LogValue(-self.sign, self.log_abs)

    def __abs__(self) -> "LogValue":
        return LogValue(abs(self.sign), self.log_abs)

    def __add__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        top = max(self.log_abs, other.log_abs)
        if math.isinf(top):
            if self.log_abs == other.log_abs and self.sign != other.sign:
                raise ParameterValidationError("value", "∞ - ∞ 未定义")
            return self if self.log_abs >= other.log_abs else other
        total = self.sign * math.exp(self.log_abs - top) + other.sign * math.exp(
            other.log_abs - top
        )
        if total == 0.0:
            return ZERO_LOG
        return LogValue(1 if total > 0 else -1, top + math.log(abs(total)))

    def __sub__(self, other: "LogValue") -> "LogValue":
        return self + (-other)

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return ZERO_LOG
        return LogValue(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("除以零网值")
        if self.sign == 0:
            return ZERO_LOG
        return LogValue(self.sign * other.sign, self.log_abs - other.log_abs)

    def __pow__(self, p: float) -> "LogValue":
        if float(p).is_integer():
            k = int(p)
            if k == 0:
                return ONE_LOG
            if self.sign == 0:
                if k < 0:
                    raise ZeroDivisionError("0 的负整数次幂")
                return ZERO_LOG
            return LogValue(self.sign**k if k > 0 else self.sign ** (-k), k * self.log_abs)
        if self.sign < 0:
            raise ParameterValidationError("^", "负数的非整数次幂")
        if self.sign == 0:
            if p < 0:
                raise ZeroDivisionError("0 的负次幂")
            return ZERO_LOG
        return LogValue(1, p * self.log_abs)

    def __lt__(self, other: "LogValue") -> bool:
        if self.sign != other.sign:
            return self.sign < other.sign
        if self.sign == 0:
            return False
        if self.sign > 0:
            return self.log_abs < other.log_abs
        return self.log_abs > other.log_abs

    def exp(self) -> "LogValue":
        value = self.value
        return ZERO_LOG if value == _NEG_INF else LogValue(1, value)

    def log(self) -> "LogValue":
        if self.sign <= 0:
            raise ParameterValidationError("ln", "对数的参数必须为正")
        return LogValue.of(self.log_abs)


ZERO_LOG = LogValue(0, _NEG_INF)
ONE_LOG = LogValue(1, 0.0)


@dataclass(frozen=True)
class LogSample:
    """网在单个 ε 上的对数域样本"""

    eps: float
    log_eps: float
    log_abs: float
    sign: int

    @property
    def value(self) -> float:
        return LogValue(self.sign, self.log_abs).value

    @property
    def is_zero(self) -> bool:
        return self.sign == 0


def map_grid(func: Callable[[float], T], values: Iterable[float]) -> List[T]:
    """对每个 ε 计算 func；GFCALC_THREADS > 1 时并行，结果保持网格顺序"""
    values = list(values)
    workers = min(config.runtime.threads, len(values))
    if workers <= 1:
        return [func(v) for v in values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, values))


# ============================================================
# ε-网
# ============================================================


class Net:
    """ε ↦ 实数的规则，按 ε 记忆化（写一次）"""

    def __init__(self, log_rule: Callable[[float], LogValue], label: str = "net"):
        self._log_rule = log_rule
        self.label = label
        self._cache: Dict[float, LogValue] = {}
        self._lock = threading.Lock()

    @classmethod
    def from_real(cls, rule: Callable[[float], float], label: str = "net") -> "Net":
        return cls(lambda eps: LogValue.of(float(rule(eps))), label)

    @classmethod
    def constant(cls, c: float) -> "Net":
        value = LogValue.of(float(c))
        return cls(lambda eps: value, repr(float(c)))

    @classmethod
    def power(cls, m: float, c: float = 1.0) -> "Net":
        """c·ε^m，直接在对数域构造"""
        base = LogValue.of(float(c))
        return cls(lambda eps: base * LogValue(1, m * math.log(eps)), f"{c}*eps^{m}")

    def at(self, eps: float) -> LogValue:
        cached = self._cache.get(eps)
        if cached is not None:
            return cached
        value = self._log_rule(eps)
        with self._lock:
            return self._cache.setdefault(eps, value)

    def __call__(self, eps: float) -> float:
        return self.at(eps).value

    def samples(self, grid: EpsGrid) -> List[LogSample]:
        values = map_grid(self.at, grid.values)
        return [
            LogSample(eps, math.log(eps), v.log_abs, v.sign)
            for eps, v in zip(grid.values, values)
        ]

    # ---- 逐点运算 ----

    def _lift(self, other, op: Callable[[LogValue, LogValue], LogValue], name: str) -> "Net":
        other = as_net(other)
        return Net(lambda eps: op(self.at(eps), other.at(eps)), f"({self.label}{name}{other.label})")

    def __add__(self, other) -> "Net":
        return self._lift(other, lambda a, b: a + b, "+")

    __radd__ = __add__

    def __sub__(self, other) -> "Net":
        return self._lift(other, lambda a, b: a - b, "-")

    def __rsub__(self, other) -> "Net":
        return as_net(other) - self

    def __mul__(self, other) -> "Net":
        return self._lift(other, lambda a, b: a * b, "*")

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Net":
        return self._lift(other, lambda a, b: a / b, "/")

    def __rtruediv__(self, other) -> "Net":
        return as_net(other) / self

    def __neg__(self) -> "Net":
        return Net(lambda eps: -self.at(eps), f"-{self.label}")

    def __abs__(self) -> "Net":
        return Net(lambda eps: abs(self.at(eps)), f"|{self.label}|")

    def __pow__(self, p: float) -> "Net":
        return Net(lambda eps: self.at(eps) ** p, f"{self.label}^{p}")

    def minimum(self, other) -> "Net":
        return self._lift(other, lambda a, b: b if b < a else a, " min ")

    def maximum(self, other) -> "Net":
        return self._lift(other, lambda a, b: a if b < a else b, " max ")

    def positive_part(self) -> "Net":
        return self.maximum(0.0)

    def exp(self) -> "Net":
        return Net(lambda eps: self.at(eps).exp(), f"exp({self.label})")

    def log(self) -> "Net":
        return Net(lambda eps: self.at(eps).log(), f"ln({self.label})")

    def apply(self, func: Callable[[float], float], name: str) -> "Net":
        """在线性域逐点作用实函数（sin、cos 等）"""
        return Net(lambda eps: LogValue.of(func(self.at(eps).value)), f"{name}({self.label})")

    def flushed(self, floor: Optional[float] = None) -> "Net":
        """把 |value| < floor 的样本置为精确零"""
        if floor is None:
            floor = config.tolerance.zero_floor
        log_floor = math.log(floor)

        def rule(eps: float) -> LogValue:
            v = self.at(eps)
            return ZERO_LOG if v.log_abs < log_floor else v

        return Net(rule, self.label)


EPS = Net(lambda eps: LogValue(1, math.log(eps)), "eps")


def as_net(value) -> Net:
    if isinstance(value, Net):
        return value
    return Net.constant(float(value))


# ============================================================
# 阶估计与分类
# ============================================================


def _default_window(n: int) -> int:
    return min(config.grid.window, n // 2)


def _regression(xs: np.ndarray, ys: np.ndarray) -> Tuple[float, float, float]:
    design = np.column_stack([xs, np.ones_like(xs)])
    (slope, intercept), *_ = np.linalg.lstsq(design, ys, rcond=None)
    residual = ys - (slope * xs + intercept)
    ss_res = float(np.sum(residual**2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    # 对数值在舍入误差内不变：视为常数网
    if ss_tot <= len(ys) * 1e-18:
        r2 = 1.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), float(min(1.0, max(0.0, r2)))


def estimate_order(samples: Sequence[LogSample], window: Optional[int] = None) -> OrderReport:
    """尾部窗口（最小的 ε）上 log|value| 对 log ε 的最小二乘斜率

    窗口全为零或末尾连续为零（网最终消失）时返回斜率 +inf；
    尾部出现 log|value| = +inf 时返回斜率 -inf。
    """
    if window is None:
        window = _default_window(len(samples))
    tail = list(samples[-window:]) if window > 0 else []
    nonzero = [s for s in tail if not s.is_zero]
    zeros = len(tail) - len(nonzero)

    vanishing = len(tail) >= 2 and tail[-1].is_zero and tail[-2].is_zero
    if tail and (not nonzero or vanishing):
        return OrderReport(
            slope=math.inf, intercept=-math.inf, r2=1.0, window=len(tail), zeros_dropped=zeros
        )
    if any(s.log_abs == math.inf for s in nonzero):
        return OrderReport(
            slope=-math.inf, intercept=math.inf, r2=1.0, window=len(tail), zeros_dropped=zeros
        )
    if len(nonzero) < MIN_FIT_POINTS:
        raise InsufficientSamplesError(len(nonzero), MIN_FIT_POINTS)

    xs = np.array([s.log_eps for s in nonzero])
    ys = np.array([s.log_abs for s in nonzero])
    slope, intercept, r2 = _regression(xs, ys)
    return OrderReport(
        slope=slope, intercept=intercept, r2=r2, window=len(tail), zeros_dropped=zeros
    )


def _order_with_fallback(samples: Sequence[LogSample]) -> OrderReport:
    """默认窗口样本不足时扩大到后半网格"""
    window = _default_window(len(samples))
    try:
        return estimate_order(samples, window)
    except InsufficientSamplesError:
        wider = len(samples) // 2
        if wider <= window:
            raise
        asym_logger.debug(f"尾部窗口 {window} 样本不足，扩大到 {wider}")
        return estimate_order(samples, wider)


def _all_below_floor(samples: Sequence[LogSample]) -> bool:
    log_floor = math.log(config.tolerance.zero_floor)
    return all(s.is_zero or s.log_abs < log_floor for s in samples)


def _good(report: OrderReport) -> bool:
    return report.r2 >= config.tolerance.r2_min


def envelope_growth(samples: Sequence[LogSample], m: float) -> float:
    """尾部 log|v| - m·log ε 后半段最大值相对前半段最大值的增量

    有界（≤ 0 附近）对应 |v| = O(ε^m)。
    """
    tail = [s for s in samples[-_default_window(len(samples)) :] if not s.is_zero]
    if len(tail) < MIN_FIT_POINTS:
        return 0.0
    residual = np.array([s.log_abs - m * s.log_eps for s in tail])
    half = len(residual) // 2
    return float(np.max(residual[half:]) - np.max(residual[:half]))


_BOUNDED_SLACK = 0.5
_GROWTH_MARGIN = 2.0
# 回归斜率的舍入容差
_SLOPE_SLACK = 0.05


def is_moderate(samples: Sequence[LogSample], N_cap: Optional[int] = None) -> Verdict:
    """|v_ε| = O(ε^(-N)) 的有限网格代理"""
    if N_cap is None:
        N_cap = config.tolerance.n_cap
    if N_cap < 1:
        raise ParameterValidationError("N_cap", "必须 ≥ 1")
    if _all_below_floor(samples):
        verdict = Verdict.YES
    else:
        report = _order_with_fallback(samples)
        if report.slope == math.inf:
            verdict = Verdict.YES
        elif _good(report):
            verdict = Verdict.YES if report.slope >= -N_cap - _SLOPE_SLACK else Verdict.NO
        else:
            growth = envelope_growth(samples, -N_cap)
            if growth <= _BOUNDED_SLACK:
                verdict = Verdict.YES
            elif growth > _GROWTH_MARGIN:
                verdict = Verdict.NO
            else:
                verdict = Verdict.INCONCLUSIVE
        asym_logger.debug(f"is_moderate: slope={report.slope:.4g}, r2={report.r2:.4g}")
    log_verdict("is_moderate", verdict, f"N_cap={N_cap}")
    return verdict


def is_negligible(samples: Sequence[LogSample], m_max: Optional[int] = None) -> Verdict:
    """|v_ε| = O(ε^m), m = m_max 的有限网格代理"""
    if m_max is None:
        m_max = config.tolerance.m_max
    if m_max < 2:
        raise ParameterValidationError("m_max", "必须 ≥ 2")
    if _all_below_floor(samples):
        verdict = Verdict.YES
    else:
        report = _order_with_fallback(samples)
        if report.slope == math.inf:
            verdict = Verdict.YES
        elif report.slope == -math.inf:
            verdict = Verdict.NO
        elif _good(report):
            if report.slope >= m_max:
                verdict = Verdict.YES
            elif report.slope <= m_max - 1:
                verdict = Verdict.NO
            else:
                verdict = Verdict.INCONCLUSIVE
        elif envelope_growth(samples, m_max) <= _BOUNDED_SLACK:
            verdict = Verdict.YES
        elif envelope_growth(samples, m_max - 1) > _GROWTH_MARGIN:
            verdict = Verdict.NO
        else:
            verdict = Verdict.INCONCLUSIVE
    log_verdict("is_negligible", verdict, f"m_max={m_max}")
    return verdict


def _floored(samples: Sequence[LogSample]) -> List[LogSample]:
    log_floor = math.log(config.tolerance.zero_floor)
    return [
        LogSample(s.eps, s.log_eps, _NEG_INF, 0) if s.log_abs < log_floor else s
        for s in samples
    ]


def tends_to_zero(samples: Sequence[LogSample]) -> Verdict:
    """|v_ε| → 0（无穷小）的有限网格代理"""
    samples = _floored(samples)
    verdict = _tends_to_zero(samples)
    log_verdict("tends_to_zero", verdict)
    return verdict


def _tends_to_zero(samples: List[LogSample]) -> Verdict:
    if all(s.is_zero for s in samples):
        return Verdict.YES
    r2_min = config.tolerance.r2_min

    report: Optional[OrderReport] = None
    try:
        report = estimate_order(samples)
    except InsufficientSamplesError:
        pass
    if report is not None:
        if report.slope == math.inf or (report.r2 >= r2_min and report.slope > 0.1):
            return Verdict.YES

    # 对数级缓慢衰减：log|v| 对 log(-ln ε) 线性
    tail = [s for s in samples[-_default_window(len(samples)) :] if not s.is_zero]
    if len(tail) >= MIN_FIT_POINTS and all(s.log_eps < 0 for s in tail):
        xs = np.log(-np.array([s.log_eps for s in tail]))
        ys = np.array([s.log_abs for s in tail])
        slope, _, r2 = _regression(xs, ys)
        if r2 >= r2_min and slope < -0.1:
            return Verdict.YES

    logs = np.array([s.log_abs for s in samples])
    quarter = max(1, len(samples) // 4)
    first, last = logs[:quarter], logs[-quarter:]
    first_nonzero = next((v for v in logs if v > _NEG_INF), _NEG_INF)
    if np.max(last) < np.min(first) and logs[-1] < first_nonzero + math.log(1e-6):
        return Verdict.YES

    if report is not None and report.r2 >= r2_min and report.slope < -0.05:
        return Verdict.NO
    if np.min(first) > _NEG_INF and np.min(last) >= np.min(first) + math.log(0.5):
        return Verdict.NO
    return Verdict.INCONCLUSIVE
