"""
光滑函数表达式演算模块
一元光滑实函数的表达式树：精确符号求导、紧支撑追踪、支撑感知的求积，
以及缩放/平移算子 S、T、T̃
"""

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as npoly
from scipy.optimize import minimize_scalar

from ..config import config
from ..utils.exceptions import (
    DimensionError,
    ParameterValidationError,
    ParseException,
    UnboundedSupportError,
)
from .quadrature import adaptive_integral, fixed_integral

Critical = FrozenSet[Tuple[float, float]]

_INF = math.inf


# ============================================================
# 区间类型
# ============================================================


@dataclass(frozen=True)
class Interval:
    """闭区间，lo > hi 表示空集，端点可为 ±inf"""

    lo: float
    hi: float

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def is_bounded(self) -> bool:
        return self.is_empty or (math.isfinite(self.lo) and math.isfinite(self.hi))

    @property
    def width(self) -> float:
        return 0.0 if self.is_empty else self.hi - self.lo

    def hull(self, other: "Interval") -> "Interval":
        if self.is_empty:
            return other
        if other.is_empty:
            return self
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return EMPTY
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        return Interval(lo, hi) if lo <= hi else EMPTY

    def shift(self, c: float) -> "Interval":
        return self if self.is_empty else Interval(self.lo + c, self.hi + c)

    def scale(self, c: float) -> "Interval":
        if self.is_empty:
            return self
        a, b = self.lo * c, self.hi * c
        return Interval(min(a, b), max(a, b))

    def reflect(self) -> "Interval":
        return self if self.is_empty else Interval(-self.hi, -self.lo)

    def minkowski(self, other: "Interval") -> "Interval":
        if self.is_empty or other.is_empty:
            return EMPTY
        return Interval(self.lo + other.lo, self.hi + other.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def to_list(self) -> Optional[List[float]]:
        if self.is_empty:
            return []
        if not self.is_bounded:
            return None
        return [self.lo, self.hi]


UNBOUNDED = Interval(-_INF, _INF)
EMPTY = Interval(_INF, -_INF)


@dataclass(frozen=True)
class CompactSet(Interval):
    """紧区间 [a,b]，用作 K ⋐ Ω"""

    dim: int = 1

    def __post_init__(self):
        if self.dim != 1:
            raise DimensionError(self.dim)
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ParameterValidationError("K", "紧集端点必须有限")
        if self.lo > self.hi:
            raise ParameterValidationError("K", f"要求 a ≤ b，收到 [{self.lo}, {self.hi}]")

    @classmethod
    def of(cls, interval: Interval) -> "CompactSet":
        return cls(interval.lo, interval.hi)


@dataclass(frozen=True)
class OpenInterval:
    """开区间 Ω = (lo, hi)，端点可为 ±inf；lo ≥ hi 表示空集"""

    lo: float = -_INF
    hi: float = _INF
    dim: int = 1

    def __post_init__(self):
        if self.dim != 1:
            raise DimensionError(self.dim)

    @property
    def is_empty(self) -> bool:
        return self.lo >= self.hi

    def contains(self, x: float) -> bool:
        return self.lo < x < self.hi

    def contains_compact(self, K: Interval) -> bool:
        """K ⋐ Ω（严格包含）"""
        if K.is_empty:
            return True
        return K.is_bounded and self.lo < K.lo and K.hi < self.hi

    def intersect(self, other: "OpenInterval") -> "OpenInterval":
        return OpenInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def to_list(self) -> List[Optional[float]]:
        return [
            None if math.isinf(self.lo) else self.lo,
            None if math.isinf(self.hi) else self.hi,
        ]


REAL_LINE = OpenInterval()


# ============================================================
# bump 原语
# ============================================================


@lru_cache(maxsize=None)
def _bump_poly(k: int) -> Polynomial:
    """bump^(k)(x) = bump(x)·P_k(x)/(1-x²)^(2k) 中的多项式 P_k"""
    if k == 0:
        return Polynomial([1.0])
    prev = _bump_poly(k - 1)
    x = Polynomial([0.0, 1.0])
    t = Polynomial([1.0, 0.0, -1.0])
    return -2.0 * x * prev + t * t * prev.deriv() + 4.0 * (k - 1) * x * t * prev


def _bump_raw(k: int, x: np.ndarray) -> np.ndarray:
    t = 1.0 - x * x
    out = np.zeros_like(x, dtype=float)
    inside = t > 0.0
    if np.any(inside):
        ti = t[inside]
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            out[inside] = np.exp(-1.0 / ti - 2.0 * k * np.log(ti)) * _bump_poly(k)(
                x[inside]
            )
    return out


@lru_cache(maxsize=None)
def bump_normalizer() -> float:
    """使 ∫bump = 1 的常数 C（分级求积，只计算一次）"""
    mass = fixed_integral(lambda x: _bump_raw(0, x), np.array([-1.0]), np.array([1.0]))
    return 1.0 / float(mass[0])


def _bump_eval(k: int, x: np.ndarray) -> np.ndarray:
    return bump_normalizer() * _bump_raw(k, x)


# ============================================================
# 表达式树
# ============================================================


class SmoothFn:
    """一元光滑函数表达式树的基类"""

    dim = 1

    def _eval(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _deriv(self) -> "SmoothFn":
        raise NotImplementedError

    @property
    def support(self) -> Interval:
        return UNBOUNDED

    def critical_intervals(self) -> Critical:
        """尺度远小于定义域的紧支撑子结构所在区间，供采样与求积加密"""
        return frozenset()

    def to_dict(self) -> Dict[str, Any]:
        raise NotImplementedError

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        values = self._eval(np.atleast_1d(arr).ravel()).reshape(np.atleast_1d(arr).shape)
        if arr.ndim == 0:
            return float(values[0])
        return values

    def deriv(self, k: int = 1) -> "SmoothFn":
        return deriv(self, k)

    @property
    def is_compact(self) -> bool:
        return self.support.is_bounded

    def __add__(self, other):
        return add(self, as_fn(other))

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(Const(-1.0), as_fn(other)))

    def __rsub__(self, other):
        return add(as_fn(other), mul(Const(-1.0), self))

    def __mul__(self, other):
        return mul(self, as_fn(other))

    __rmul__ = __mul__

    def __neg__(self):
        return mul(Const(-1.0), self)


def as_fn(value) -> SmoothFn:
    if isinstance(value, SmoothFn):
        return value
    return Const(float(value))


@dataclass(frozen=True, eq=True)
class Const(SmoothFn):
    c: float

    def _eval(self, x):
        return np.full_like(x, self.c, dtype=float)

    def _deriv(self):
        return ZERO

    @property
    def support(self):
        return EMPTY if self.c == 0.0 else UNBOUNDED

    def to_dict(self):
        return {"node": "Const", "c": self.c}


ZERO = Const(0.0)
ONE = Const(1.0)


@dataclass(frozen=True, eq=True)
class Id(SmoothFn):
    def _eval(self, x):
        return np.array(x, dtype=float)

    def _deriv(self):
        return ONE

    def to_dict(self):
        return {"node": "Id"}


@dataclass(frozen=True, eq=True)
class Affine(SmoothFn):
    a: float
    b: float

    def _eval(self, x):
        return self.a * x + self.b

    def _deriv(self):
        return Const(self.a)

    @property
    def support(self):
        return EMPTY if (self.a == 0.0 and self.b == 0.0) else UNBOUNDED

    def to_dict(self):
        return {"node": "Affine", "a": self.a, "b": self.b}


@dataclass(frozen=True, eq=True)
class Sum(SmoothFn):
    terms: Tuple[SmoothFn, ...]

    def _eval(self, x):
        out = np.zeros_like(x, dtype=float)
        for term in self.terms:
            out = out + term._eval(x)
        return out

    def _deriv(self):
        return add(*(t._deriv() for t in self.terms))

    @cached_property
    def support(self):
        out = EMPTY
        for term in self.terms:
            out = out.hull(term.support)
        return out

    def critical_intervals(self):
        return frozenset().union(*(t.critical_intervals() for t in self.terms))

    def to_dict(self):
        return {"node": "Sum", "terms": [t.to_dict() for t in self.terms]}


@dataclass(frozen=True, eq=True)
class Prod(SmoothFn):
    factors: Tuple[SmoothFn, ...]

    def _eval(self, x):
        out = np.ones_like(x, dtype=float)
        for factor in self.factors:
            out = out * factor._eval(x)
        return out

    def _deriv(self):
        pieces = []
        for i, factor in enumerate(self.factors):
            rest = self.factors[:i] + (factor._deriv(),) + self.factors[i + 1 :]
            pieces.append(mul(*rest))
        return add(*pieces)

    @cached_property
    def support(self):
        out = UNBOUNDED
        for factor in self.factors:
            out = out.intersect(factor.support)
        return out

    def critical_intervals(self):
        return frozenset().union(*(f.critical_intervals() for f in self.factors))

    def to_dict(self):
        return {"node": "Prod", "factors": [f.to_dict() for f in self.factors]}


@dataclass(frozen=True, eq=True)
class IntPow(SmoothFn):
    base: SmoothFn
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise ParameterValidationError("k", "IntPow 指数必须 ≥ 0")

    def _eval(self, x):
        return self.base._eval(x) ** self.k

    def _deriv(self):
        if self.k == 0:
            return ZERO
        if self.k == 1:
            return self.base._deriv()
        return mul(Const(float(self.k)), IntPow(self.base, self.k - 1), self.base._deriv())

    @property
    def support(self):
        return self.base.support if self.k >= 1 else UNBOUNDED

    def critical_intervals(self):
        return self.base.critical_intervals()

    def to_dict(self):
        return {"node": "IntPow", "base": self.base.to_dict(), "k": self.k}


PRIMITIVES = ("bump", "smoothstep", "sin", "cos", "exp", "polynomial")


@dataclass(frozen=True, eq=True)
class Primitive(SmoothFn):
    """命名原语；bump 的 order 表示导数阶，polynomial 的系数按升幂排列"""

    name: str
    order: int = 0
    coeffs: Tuple[float, ...] = ()

    def __post_init__(self):
        if self.name not in PRIMITIVES:
            raise ParameterValidationError("name", f"未知原语 '{self.name}'")

    def _eval(self, x):
        if self.name == "bump":
            return _bump_eval(self.order, x)
        if self.name == "smoothstep":
            return SMOOTHSTEP_IMPL._eval(x)
        if self.name == "sin":
            return np.sin(x)
        if self.name == "cos":
            return np.cos(x)
        if self.name == "exp":
            with np.errstate(over="ignore"):
                return np.exp(x)
        return npoly.polyval(x, np.asarray(self.coeffs or (0.0,), dtype=float))

    def _deriv(self):
        if self.name == "bump":
            return Primitive("bump", self.order + 1)
        if self.name == "smoothstep":
            return BUMP
        if self.name == "sin":
            return COS
        if self.name == "cos":
            return mul(Const(-1.0), SIN)
        if self.name == "exp":
            return EXP
        coeffs = tuple(float(c) for c in npoly.polyder(np.asarray(self.coeffs or (0.0,))))
        if not any(coeffs):
            return ZERO
        return Primitive("polynomial", coeffs=coeffs)

    @property
    def support(self):
        if self.name == "bump":
            return Interval(-1.0, 1.0)
        if self.name == "polynomial" and not any(self.coeffs):
            return EMPTY
        return UNBOUNDED

    def critical_intervals(self):
        if self.name in ("bump", "smoothstep"):
            return frozenset({(-1.0, 1.0)})
        return frozenset()

    def to_dict(self):
        out: Dict[str, Any] = {"node": "Primitive", "name": self.name}
        if self.order:
            out["order"] = self.order
        if self.name == "polynomial":
            out["coeffs"] = list(self.coeffs)
        return out


@dataclass(frozen=True, eq=True)
class Compose(SmoothFn):
    """outer ∘ inner"""

    outer: SmoothFn
    inner: SmoothFn

    def _eval(self, x):
        return self.outer._eval(self.inner._eval(x))

    def _deriv(self):
        return mul(compose(self.outer._deriv(), self.inner), self.inner._deriv())

    @cached_property
    def support(self):
        inner_support = self.inner.support
        if inner_support.is_bounded and self.outer(0.0) == 0.0:
            return inner_support
        return UNBOUNDED

    def critical_intervals(self):
        return self.inner.critical_intervals()

    def to_dict(self):
        return {
            "node": "Compose",
            "outer": self.outer.to_dict(),
            "inner": self.inner.to_dict(),
        }


@dataclass(frozen=True, eq=True)
class Translate(SmoothFn):
    """y ↦ child(y - x0)"""

    x0: float
    child: SmoothFn

    def _eval(self, x):
        return self.child._eval(x - self.x0)

    def _deriv(self):
        return translate(self.x0, self.child._deriv())

    @property
    def support(self):
        return self.child.support.shift(self.x0)

    def critical_intervals(self):
        return frozenset(
            (lo + self.x0, hi + self.x0) for lo, hi in self.child.critical_intervals()
        )

    def to_dict(self):
        return {"node": "Translate", "x0": self.x0, "child": self.child.to_dict()}


@dataclass(frozen=True, eq=True)
class Reflect(SmoothFn):
    """y ↦ child(-y)"""

    child: SmoothFn

    def _eval(self, x):
        return self.child._eval(-x)

    def _deriv(self):
        return mul(Const(-1.0), reflect(self.child._deriv()))

    @property
    def support(self):
        return self.child.support.reflect()

    def critical_intervals(self):
        return frozenset((-hi, -lo) for lo, hi in self.child.critical_intervals())

    def to_dict(self):
        return {"node": "Reflect", "child": self.child.to_dict()}


@dataclass(frozen=True, eq=True)
class Scale(SmoothFn):
    """x ↦ (1/ε)·child(x/ε)"""

    eps: float
    child: SmoothFn

    def _eval(self, x):
        return self.child._eval(x / self.eps) / self.eps

    def _deriv(self):
        return mul(Const(1.0 / self.eps), scale(self.eps, self.child._deriv()))

    @property
    def support(self):
        return self.child.support.scale(self.eps)

    def critical_intervals(self):
        crit = {(lo * self.eps, hi * self.eps) for lo, hi in self.child.critical_intervals()}
        support = self.support
        if support.is_bounded and not support.is_empty:
            crit.add((support.lo, support.hi))
        return frozenset(crit)

    def to_dict(self):
        return {"node": "Scale", "eps": self.eps, "child": self.child.to_dict()}


@dataclass(frozen=True, eq=True)
class ConvNode(SmoothFn):
    """(source ∗ kernel)(x) = ⟨source(y), kernel(x - y)⟩

    source 需实现 convolve_values(kernel, x)、conv_deriv(kernel)、
    conv_support(kernel)、conv_critical(kernel) 与 to_dict()。
    """

    source: Any
    kernel: SmoothFn

    def __post_init__(self):
        if not self.kernel.support.is_bounded:
            raise UnboundedSupportError("convolution kernel")

    def _eval(self, x):
        return self.source.convolve_values(self.kernel, x)

    def _deriv(self):
        return self.source.conv_deriv(self.kernel)

    @cached_property
    def support(self):
        return self.source.conv_support(self.kernel)

    def critical_intervals(self):
        return self.source.conv_critical(self.kernel)

    def to_dict(self):
        return {
            "node": "ConvNode",
            "source": self.source.to_dict(),
            "kernel": self.kernel.to_dict(),
        }


@dataclass(frozen=True, eq=True)
class Antideriv(SmoothFn):
    """x ↦ ∫_{-∞}^{x} child，child 必须紧支撑"""

    child: SmoothFn

    def __post_init__(self):
        if not self.child.support.is_bounded:
            raise UnboundedSupportError("antiderivative integrand")

    @cached_property
    def total(self) -> float:
        support = self.child.support
        if support.is_empty:
            return 0.0
        return float(
            fixed_integral(self.child._eval, np.array([support.lo]), np.array([support.hi]))[0]
        )

    def _eval(self, x):
        support = self.child.support
        out = np.zeros_like(x, dtype=float)
        if support.is_empty:
            return out
        out[x >= support.hi] = self.total
        inside = (x > support.lo) & (x < support.hi)
        if np.any(inside):
            upper = x[inside]
            lower = np.full_like(upper, support.lo)
            out[inside] = fixed_integral(self.child._eval, lower, upper)
        return out

    def _deriv(self):
        return self.child

    def critical_intervals(self):
        crit = set(self.child.critical_intervals())
        support = self.child.support
        if not support.is_empty:
            crit.add((support.lo, support.hi))
        return frozenset(crit)

    def to_dict(self):
        return {"node": "Antideriv", "child": self.child.to_dict()}


BUMP = Primitive("bump")
SIN = Primitive("sin")
COS = Primitive("cos")
EXP = Primitive("exp")
ID = Id()
SMOOTHSTEP = Primitive("smoothstep")
SMOOTHSTEP_IMPL = Antideriv(BUMP)


def polynomial(coeffs: Sequence[float]) -> SmoothFn:
    """升幂系数的多项式"""
    coeffs = tuple(float(c) for c in coeffs)
    if not any(coeffs):
        return ZERO
    return Primitive("polynomial", coeffs=coeffs)


# ============================================================
# 带常数折叠的构造器
# ============================================================


def add(*fns: SmoothFn) -> SmoothFn:
    """和，展平嵌套并合并常数项"""
    flat: List[SmoothFn] = []
    constant = 0.0
    for fn in fns:
        parts = fn.terms if isinstance(fn, Sum) else (fn,)
        for part in parts:
            if isinstance(part, Const):
                constant += part.c
            else:
                flat.append(part)
    if constant != 0.0:
        flat.append(Const(constant))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*fns: SmoothFn) -> SmoothFn:
    """积，展平嵌套并合并常数因子"""
    flat: List[SmoothFn] = []
    constant = 1.0
    for fn in fns:
        parts = fn.factors if isinstance(fn, Prod) else (fn,)
        for part in parts:
            if isinstance(part, Const):
                constant *= part.c
            else:
                flat.append(part)
    if constant == 0.0:
        return ZERO
    if constant != 1.0:
        flat.insert(0, Const(constant))
    if not flat:
        return Const(constant)
    if len(flat) == 1:
        return flat[0]
    return Prod(tuple(flat))


def compose(outer: SmoothFn, inner: SmoothFn) -> SmoothFn:
    if isinstance(outer, Const):
        return outer
    if isinstance(outer, Id):
        return inner
    if isinstance(inner, Id):
        return outer
    return Compose(outer, inner)


def translate(x0: float, fn: SmoothFn) -> SmoothFn:
    if x0 == 0.0 or isinstance(fn, Const):
        return fn
    if isinstance(fn, Translate):
        return translate(x0 + fn.x0, fn.child)
    return Translate(float(x0), fn)


def reflect(fn: SmoothFn) -> SmoothFn:
    if isinstance(fn, Const):
        return fn
    if isinstance(fn, Reflect):
        return fn.child
    return Reflect(fn)


def scale(eps: float, fn: SmoothFn) -> SmoothFn:
    if isinstance(fn, Const):
        return Const(fn.c / eps)
    if isinstance(fn, Scale):
        return scale(eps * fn.eps, fn.child)
    return Scale(float(eps), fn)


# ============================================================
# 运算
# ============================================================


def evaluate(f: SmoothFn, x: float) -> float:
    """f(x)"""
    return f(float(x))


def deriv(f: SmoothFn, k: int = 1) -> SmoothFn:
    """k 阶符号导数"""
    if k < 0:
        raise ParameterValidationError("k", "导数阶必须 ≥ 0")
    out = f
    for _ in range(k):
        out = out._deriv()
    return out


def integrate(f: SmoothFn, a: float, b: float, tol: Optional[float] = None) -> float:
    """∫_a^b f，紧支撑时积分区间裁剪到支撑"""
    if tol is None:
        tol = config.tolerance.quad_tol
    if tol <= 0:
        raise ParameterValidationError("tol", "必须为正数")
    if a > b:
        raise ParameterValidationError("a,b", f"要求 a ≤ b，收到 a={a}, b={b}")
    window = Interval(a, b).intersect(f.support)
    if window.is_empty or window.width == 0.0:
        return 0.0
    if not window.is_bounded:
        raise UnboundedSupportError("integration range")
    return adaptive_integral(
        f._eval, window.lo, window.hi, tol, critical=sorted(f.critical_intervals())
    )


def _sample_points(f: SmoothFn, K: Interval, n: int) -> np.ndarray:
    window = K.intersect(f.support)
    if window.is_empty:
        return np.array([], dtype=float)
    pieces = [np.linspace(window.lo, window.hi, n)]
    for lo, hi in f.critical_intervals():
        sub = window.intersect(Interval(lo, hi))
        if not sub.is_empty and 0.0 < sub.width < window.width:
            pieces.append(np.linspace(sub.lo, sub.hi, n))
    return np.unique(np.concatenate(pieces))


def sup_abs_on(f: SmoothFn, K: Interval, n: Optional[int] = None) -> float:
    """sup_{x∈K}|f(x)| 的下界估计：均匀网格（并在关键区间加密）后黄金分割细化"""
    if n is None:
        n = config.tolerance.sup_points
    if n < 64:
        raise ParameterValidationError("n", "网格点数必须 ≥ 64")
    points = _sample_points(f, K, n)
    if points.size == 0:
        return 0.0
    values = np.abs(f(points))
    best = int(np.argmax(values))
    best_value = float(values[best])
    if best_value == 0.0 or points.size < 3:
        return best_value
    lo = points[max(best - 1, 0)]
    hi = points[min(best + 1, points.size - 1)]
    if hi <= lo:
        return best_value
    result = minimize_scalar(
        lambda t: -abs(f(float(t))),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": max(1e-15, 1e-12 * (hi - lo))},
    )
    return max(best_value, float(-result.fun))


def range_on(f: SmoothFn, K: Interval, n: Optional[int] = None) -> Interval:
    """f(K) 的区间包络估计（网格最值）"""
    if n is None:
        n = config.tolerance.sup_points
    points = np.unique(
        np.concatenate([np.linspace(K.lo, K.hi, n), _sample_points(f, K, n)])
    )
    values = f(points)
    return Interval(float(np.min(values)), float(np.max(values)))


def scale_S(eps: float, phi: SmoothFn) -> SmoothFn:
    """S(ε, φ) = ε⊙φ : x ↦ (1/ε)·φ(x/ε)"""
    if eps <= 0:
        raise ParameterValidationError("eps", f"必须为正数，收到 {eps}")
    return scale(eps, phi)


def translate_T(x: float, phi: SmoothFn) -> SmoothFn:
    """T(x, φ) : y ↦ φ(y - x)"""
    return translate(x, phi)


def translate_Ttilde(x: float, phi: SmoothFn) -> SmoothFn:
    """T̃(x, φ) : y ↦ φ(x - y)"""
    return translate(x, reflect(phi))


def moments(phi: SmoothFn, q: int, tol: Optional[float] = None) -> List[float]:
    """(∫x^k·φ dx)_{k=0..q}"""
    if q < 0:
        raise ParameterValidationError("q", "必须 ≥ 0")
    if tol is None:
        tol = config.tolerance.moment_tol
    support = phi.support
    if not support.is_bounded:
        raise UnboundedSupportError()
    if support.is_empty or support.width == 0.0:
        return [0.0] * (q + 1)
    critical = sorted(phi.critical_intervals())
    out = []
    for k in range(q + 1):
        out.append(
            adaptive_integral(
                lambda x, k=k: x**k * phi._eval(x), support.lo, support.hi, tol, critical
            )
        )
    return out


# ============================================================
# JSON 序列化
# ============================================================


def to_json_dict(f: SmoothFn) -> Dict[str, Any]:
    """带支撑元数据的节点标记字典"""
    return {"tree": f.to_dict(), "support": f.support.to_list()}


def from_json_dict(payload: Dict[str, Any]) -> SmoothFn:
    """反序列化并校验支撑元数据"""
    fn = from_dict(payload["tree"])
    declared = payload.get("support", fn.support.to_list())
    if declared != fn.support.to_list():
        raise ParseException(
            f"支撑元数据不一致: 声明 {declared}，重建 {fn.support.to_list()}"
        )
    return fn


def from_dict(data: Dict[str, Any]) -> SmoothFn:
    node = data.get("node")
    if node == "Const":
        return Const(float(data["c"]))
    if node == "Id":
        return ID
    if node == "Affine":
        return Affine(float(data["a"]), float(data["b"]))
    if node == "Sum":
        return Sum(tuple(from_dict(t) for t in data["terms"]))
    if node == "Prod":
        return Prod(tuple(from_dict(f) for f in data["factors"]))
    if node == "IntPow":
        return IntPow(from_dict(data["base"]), int(data["k"]))
    if node == "Primitive":
        return Primitive(
            data["name"],
            int(data.get("order", 0)),
            tuple(float(c) for c in data.get("coeffs", ())),
        )
    if node == "Compose":
        return Compose(from_dict(data["outer"]), from_dict(data["inner"]))
    if node == "Translate":
        return Translate(float(data["x0"]), from_dict(data["child"]))
    if node == "Reflect":
        return Reflect(from_dict(data["child"]))
    if node == "Scale":
        return Scale(float(data["eps"]), from_dict(data["child"]))
    if node == "Antideriv":
        return Antideriv(from_dict(data["child"]))
    if node == "ConvNode":
        from .distributions import atom_from_dict

        return ConvNode(atom_from_dict(data["source"]), from_dict(data["kernel"]))
    raise ParseException(f"未知节点类型 '{node}'")


def to_json(f: SmoothFn) -> str:
    return json.dumps(to_json_dict(f), sort_keys=True)


def from_json(text: str) -> SmoothFn:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseException(f"无效的 JSON: {e.msg}", text, e.pos)
    return from_json_dict(payload)
