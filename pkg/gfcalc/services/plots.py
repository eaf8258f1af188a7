"""
参数族支撑判定模块
双变量核 d^∨(u, x) 的切片支撑检测，以及逐点有界、局部一致有界、一致有界支撑的判定
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..config import config
from ..models import Verdict, verdict_and
from ..utils.exceptions import ParameterValidationError, SupportOverflowError
from ..utils.logger import log_function_call, log_verdict, plot_logger
from .asymptotics import map_grid
from .smoothfn import (
    BUMP,
    COS,
    EMPTY,
    EXP,
    ID,
    REAL_LINE,
    SIN,
    SMOOTHSTEP,
    CompactSet,
    Const,
    Interval,
    IntPow,
    OpenInterval,
    SmoothFn,
    add,
    compose,
    mul,
)

KERNEL_FUNCTIONS = ("bump", "smoothstep", "sin", "cos", "exp")
_SLICE_PRIMITIVES = {"bump": BUMP, "smoothstep": SMOOTHSTEP, "sin": SIN, "cos": COS, "exp": EXP}
_BISECTION_STEPS = 60
# 边界附近 u 采样的相对距离
_EDGE_OFFSET = 1e-3
_STABLE_RATIO = 2.0
_REFINE_DEPTH = 4
_HULL_BASE = 5


# ============================================================
# 双变量核
# ============================================================


class Kernel:
    """(u, x) 的光滑表达式树；nonzero 给出切片非零集的结构化判定"""

    def evaluate(self, u: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def nonzero(self, u: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def slice(self, u: float) -> SmoothFn:
        raise NotImplementedError

    @property
    def uses_x(self) -> bool:
        raise NotImplementedError

    def _floor(self, values: np.ndarray) -> np.ndarray:
        return np.abs(values) > config.plot.support_floor


@dataclass(frozen=True)
class KConst(Kernel):
    c: float

    def evaluate(self, u, x):
        return np.full_like(x, self.c, dtype=float)

    def nonzero(self, u, x):
        return np.full(x.shape, self.c != 0.0)

    def slice(self, u):
        return Const(self.c)

    @property
    def uses_x(self):
        return False


@dataclass(frozen=True)
class KVar(Kernel):
    name: str

    def __post_init__(self):
        if self.name not in ("u", "x"):
            raise ParameterValidationError("name", f"核变量只能是 u 或 x，收到 '{self.name}'")

    def evaluate(self, u, x):
        return np.asarray(x, dtype=float) if self.name == "x" else np.full_like(x, u, dtype=float)

    def nonzero(self, u, x):
        return self.evaluate(u, x) != 0.0

    def slice(self, u):
        return ID if self.name == "x" else Const(float(u))

    @property
    def uses_x(self):
        return self.name == "x"


@dataclass(frozen=True)
class KSum(Kernel):
    terms: Tuple[Kernel, ...]

    def evaluate(self, u, x):
        return sum((t.evaluate(u, x) for t in self.terms), np.zeros_like(x, dtype=float))

    def nonzero(self, u, x):
        # 不追踪项之间的抵消
        mask = np.zeros(x.shape, dtype=bool)
        for term in self.terms:
            mask |= term.nonzero(u, x)
        return mask

    def slice(self, u):
        return add(*(t.slice(u) for t in self.terms))

    @property
    def uses_x(self):
        return any(t.uses_x for t in self.terms)


@dataclass(frozen=True)
class KProd(Kernel):
    factors: Tuple[Kernel, ...]

    def evaluate(self, u, x):
        out = np.ones_like(x, dtype=float)
        for f in self.factors:
            out = out * f.evaluate(u, x)
        return out

    def nonzero(self, u, x):
        mask = np.ones(x.shape, dtype=bool)
        for f in self.factors:
            mask &= f.nonzero(u, x)
        return mask

    def slice(self, u):
        return mul(*(f.slice(u) for f in self.factors))

    @property
    def uses_x(self):
        return any(f.uses_x for f in self.factors)


@dataclass(frozen=True)
class KQuot(Kernel):
    """分母只能依赖 u，切片上为常数"""

    num: Kernel
    den: Kernel

    def __post_init__(self):
        if self.den.uses_x:
            raise ParameterValidationError("den", "核中的除数不能依赖 x")

    def _den(self, u: float) -> float:
        value = float(self.den.evaluate(u, np.zeros(1))[0])
        if value == 0.0:
            raise ParameterValidationError("u", f"u={u!r} 处除数为 0")
        return value

    def evaluate(self, u, x):
        return self.num.evaluate(u, x) / self._den(u)

    def nonzero(self, u, x):
        self._den(u)
        return self.num.nonzero(u, x)

    def slice(self, u):
        return mul(self.num.slice(u), Const(1.0 / self._den(u)))

    @property
    def uses_x(self):
        return self.num.uses_x


@dataclass(frozen=True)
class KPow(Kernel):
    base: Kernel
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ParameterValidationError("k", "核中的指数必须是非负整数")

    def evaluate(self, u, x):
        return self.base.evaluate(u, x) ** self.k

    def nonzero(self, u, x):
        if self.k == 0:
            return np.ones(x.shape, dtype=bool)
        return self.base.nonzero(u, x)

    def slice(self, u):
        return IntPow(self.base.slice(u), self.k) if self.k != 1 else self.base.slice(u)

    @property
    def uses_x(self):
        return self.base.uses_x and self.k > 0


@dataclass(frozen=True)
class KApply(Kernel):
    name: str
    arg: Kernel

    def __post_init__(self):
        if self.name not in KERNEL_FUNCTIONS:
            raise ParameterValidationError("name", f"未知核函数 '{self.name}'")

    def evaluate(self, u, x):
        return _SLICE_PRIMITIVES[self.name]._eval(self.arg.evaluate(u, x))

    def nonzero(self, u, x):
        z = self.arg.evaluate(u, x)
        if self.name == "bump":
            return np.abs(z) < 1.0
        if self.name == "smoothstep":
            return z > -1.0
        if self.name == "sin":
            inner = self.arg.nonzero(u, x)
            return inner & ((np.abs(z) < 1.0) | self._floor(np.sin(z)))
        return self._floor(self.evaluate(u, x))

    def slice(self, u):
        return compose(_SLICE_PRIMITIVES[self.name], self.arg.slice(u))

    @property
    def uses_x(self):
        return self.arg.uses_x


def kernel_neg(k: Kernel) -> Kernel:
    return KProd((KConst(-1.0), k))


# ============================================================
# 参数族
# ============================================================


@dataclass(frozen=True)
class PlotFamily:
    """d: U → 𝒟(Ω)，d(u) = kernel(u, ·)"""

    kernel: Kernel
    U: OpenInterval
    omega: OpenInterval = REAL_LINE
    label: str = "d"

    def __post_init__(self):
        if self.U.is_empty:
            raise ParameterValidationError("U", "参数区间为空")

    def slice_at(self, u: float) -> SmoothFn:
        """d(u) 作为 SmoothFn"""
        self._check_u(u)
        return self.kernel.slice(u)

    def _check_u(self, u: float) -> None:
        if not self.U.contains(u):
            raise ParameterValidationError("u", f"u={u!r} 不在 U={self.U.to_list()} 中")


def _bisect_edge(kernel: Kernel, u: float, outside: float, inside: float) -> float:
    """在 outside（零）与 inside（非零）之间二分非零集的边界"""
    for _ in range(_BISECTION_STEPS):
        if abs(inside - outside) <= 1e-13 * max(1.0, abs(inside)):
            break
        mid = 0.5 * (outside + inside)
        if kernel.nonzero(u, np.array([mid]))[0]:
            inside = mid
        else:
            outside = mid
    return 0.5 * (outside + inside)


def _scan_window(omega: OpenInterval, half_width: float) -> Tuple[float, float]:
    return max(omega.lo, -half_width), min(omega.hi, half_width)


def support_slice(d: PlotFamily, u: float) -> Interval:
    """切片 d(u) 的检测支撑：二分细化的非零集包络"""
    d._check_u(u)
    box = config.plot.box
    n = config.plot.scan_points
    half_width = 2.0
    while True:
        lo, hi = _scan_window(d.omega, min(half_width, box))
        x = np.linspace(lo, hi, n)
        mask = d.kernel.nonzero(u, x)
        left_open = mask[0] and lo > d.omega.lo
        right_open = mask[-1] and hi < d.omega.hi
        at_box = half_width >= box
        covers_omega = lo <= d.omega.lo and hi >= d.omega.hi
        if mask.any() and not (left_open or right_open):
            break
        if at_box or (covers_omega and not mask.any()):
            if mask.any():
                raise SupportOverflowError(u, box)
            return EMPTY
        half_width *= 2.0

    idx = np.nonzero(mask)[0]
    first, last = int(idx[0]), int(idx[-1])
    left = lo if first == 0 else _bisect_edge(d.kernel, u, x[first - 1], x[first])
    right = hi if last == n - 1 else _bisect_edge(d.kernel, u, x[last + 1], x[last])
    return Interval(float(left), float(right))


def _is_compact_in(omega: OpenInterval, support: Interval) -> bool:
    return omega.contains_compact(support)


def _hull(supports: List[Interval]) -> Interval:
    out = EMPTY
    for s in supports:
        out = out.hull(s)
    return out


# ============================================================
# u 采样
# ============================================================


def _interval_points(lo: float, hi: float, count: int) -> List[float]:
    """(lo, hi) 内的采样：均匀内点加上距有限端点相对 1e-3 的点"""
    if math.isinf(lo) or math.isinf(hi):
        centre = 0.0 if math.isinf(lo) and math.isinf(hi) else (hi - 1.0 if math.isinf(lo) else lo + 1.0)
        lo_f = lo if math.isfinite(lo) else centre - 1.0
        hi_f = hi if math.isfinite(hi) else centre + 1.0
        points = _interval_points(lo_f, hi_f, count)
        if math.isinf(lo):
            points += [centre - 10.0, centre - 100.0]
        if math.isinf(hi):
            points += [centre + 10.0, centre + 100.0]
        return sorted(p for p in set(points) if lo < p < hi)
    width = hi - lo
    points = [lo + width * (i + 0.5) / count for i in range(count)]
    points += [lo + _EDGE_OFFSET * width, hi - _EDGE_OFFSET * width]
    return sorted(set(points))


def _refined_points(lo: float, hi: float, start: int, stop: int) -> List[float]:
    """在 V 的端点附近几何加密：lo + w·4^(-j)，hi - w·4^(-j)，无界端点取 ±4^j"""
    if math.isinf(lo) or math.isinf(hi):
        points = []
        for j in range(start, stop + 1):
            if math.isinf(lo):
                points.append((hi if math.isfinite(hi) else 0.0) - 4.0**j)
            if math.isinf(hi):
                points.append((lo if math.isfinite(lo) else 0.0) + 4.0**j)
        return points
    width = hi - lo
    points = []
    for j in range(start, stop + 1):
        points += [lo + width * 4.0**-j, hi - width * 4.0**-j]
    return points


def sample_parameters(d: PlotFamily, count: Optional[int] = None) -> List[float]:
    count = count if count is not None else config.plot.u_samples
    if count < 1:
        raise ParameterValidationError("samples", "采样数必须 ≥ 1")
    return _interval_points(d.U.lo, d.U.hi, count)


def _supports(d: PlotFamily, us: List[float]) -> List[Optional[Interval]]:
    """每个 u 的检测支撑；溢出扫描窗口记为 None"""

    def one(u: float) -> Optional[Interval]:
        try:
            return support_slice(d, u)
        except SupportOverflowError:
            plot_logger.debug(f"{d.label}: u={u!r} 的切片溢出扫描窗口")
            return None

    return map_grid(one, us)


# ============================================================
# 判定
# ============================================================


@log_function_call(plot_logger)
def pointwise_bounded(d: PlotFamily, samples: Optional[int] = None) -> Verdict:
    """∀u ∃K ⋐ Ω：supp d(u) ⊆ K"""
    supports = _supports(d, sample_parameters(d, samples))
    ok = all(s is not None and _is_compact_in(d.omega, s) for s in supports)
    verdict = Verdict.YES if ok else Verdict.NO
    log_verdict("pointwise_bounded", verdict, d.label)
    return verdict


def _hull_on(d: PlotFamily, lo: float, hi: float) -> Tuple[Verdict, Optional[Interval]]:
    """V=(lo,hi) 上支撑包络是否在端点加密下稳定；不稳定为 No，稳定且紧为 Yes"""
    base = _interval_points(lo, hi, _HULL_BASE)
    coarse_pts = base + _refined_points(lo, hi, 1, _REFINE_DEPTH)
    fine_pts = _refined_points(lo, hi, _REFINE_DEPTH + 1, 2 * _REFINE_DEPTH)
    coarse = _supports(d, coarse_pts)
    fine = _supports(d, fine_pts)
    if any(s is None or not _is_compact_in(d.omega, s) for s in coarse + fine):
        return Verdict.NO, None
    h1 = _hull(coarse)
    h2 = h1.hull(_hull(fine))
    w1, w2 = h1.width, h2.width
    if w2 > 0.0 and w2 >= _STABLE_RATIO * w1:
        return Verdict.NO, h2
    return Verdict.YES, h2


@log_function_call(plot_logger)
def uniform_bounded(d: PlotFamily) -> Verdict:
    """∃K ⋐ Ω ∀u ∈ U：supp d(u) ⊆ K"""
    verdict, hull = _hull_on(d, d.U.lo, d.U.hi)
    log_verdict("uniform_bounded", verdict, f"{d.label}, hull={hull.to_list() if hull else None}")
    return verdict


@log_function_call(plot_logger)
def locally_uniform_bounded(d: PlotFamily, u0: float, shrink_steps: Optional[int] = None) -> Verdict:
    """u0 的某个邻域 V 上一致有界支撑；邻域半径逐次减半"""
    d._check_u(u0)
    steps = shrink_steps if shrink_steps is not None else config.plot.shrink_steps
    if steps < 1:
        raise ParameterValidationError("shrink_steps", "必须 ≥ 1")
    if math.isfinite(d.U.lo) and math.isfinite(d.U.hi):
        r = 0.5 * (d.U.hi - d.U.lo)
    else:
        r = 1.0
    history: List[Verdict] = []
    for step in range(steps + 1):
        lo, hi = max(d.U.lo, u0 - r), min(d.U.hi, u0 + r)
        verdict, hull = _hull_on(d, lo, hi)
        plot_logger.debug(f"{d.label}: u0={u0!r}, V=({lo:.6g},{hi:.6g}) → {verdict}")
        if verdict == Verdict.YES:
            log_verdict("locally_uniform_bounded", Verdict.YES, f"u0={u0!r}, r={r:.3g}")
            return Verdict.YES
        history.append(verdict)
        r *= 0.5
    final = Verdict.NO if history[-2:] == [Verdict.NO, Verdict.NO] else Verdict.INCONCLUSIVE
    log_verdict("locally_uniform_bounded", final, f"u0={u0!r}")
    return final


class PlotClass(str, Enum):
    """参数族的分类"""

    PLOT_OF_D = "PlotOfD"
    POINTWISE_ONLY = "PointwiseOnly"
    NOT_POINTWISE = "NotPointwise"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class PlotReport:
    classification: PlotClass
    pointwise: Verdict
    local: Dict[float, Verdict]


def plot_report(d: PlotFamily, samples: Optional[int] = None) -> PlotReport:
    pointwise = pointwise_bounded(d, samples)
    if pointwise == Verdict.NO:
        return PlotReport(PlotClass.NOT_POINTWISE, pointwise, {})
    local = {u0: locally_uniform_bounded(d, u0) for u0 in sample_parameters(d, samples)}
    combined = verdict_and(*local.values())
    if combined == Verdict.YES:
        classification = PlotClass.PLOT_OF_D
    elif combined == Verdict.NO:
        classification = PlotClass.POINTWISE_ONLY
    else:
        classification = PlotClass.INCONCLUSIVE
    log_verdict("plot_verdict", classification, d.label)
    return PlotReport(classification, pointwise, local)


def plot_verdict(d: PlotFamily, samples: Optional[int] = None) -> PlotClass:
    """光滑且局部一致有界支撑为 PlotOfD；只有逐点有界为 PointwiseOnly"""
    return plot_report(d, samples).classification


def _contained(support: Interval, K: Interval) -> bool:
    return support.is_empty or (K.lo <= support.lo and support.hi <= K.hi)


@log_function_call(plot_logger)
def plot_verdict_K(d: PlotFamily, K: CompactSet, samples: Optional[int] = None) -> Verdict:
    """∀u：supp d(u) ⊆ K"""
    if not d.omega.contains_compact(K):
        raise ParameterValidationError("K", f"K={K.to_list()} 不严格包含于 Ω")
    us = sample_parameters(d, samples)
    us += _refined_points(d.U.lo, d.U.hi, 1, _REFINE_DEPTH)
    supports = _supports(d, us)
    ok = all(s is not None and _contained(s, K) for s in supports)
    verdict = Verdict.YES if ok else Verdict.NO
    log_verdict("plot_verdict_K", verdict, f"{d.label}, K={K.to_list()}")
    return verdict
