"""
分布目录模块
有限目录中的 Schwartz 分布：精确配对、分布导数以及与光滑紧支撑核的卷积
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from ..utils.exceptions import NotInCatalogError, ParseException, UnboundedSupportError
from .quadrature import adaptive_integral, mapped_rule
from .smoothfn import (
    UNBOUNDED,
    Antideriv,
    Const,
    ConvNode,
    Interval,
    OpenInterval,
    SmoothFn,
    add,
    deriv,
    from_dict,
    integrate,
    mul,
    translate,
)


# ============================================================
# 原子
# ============================================================


@dataclass(frozen=True)
class DeltaDeriv:
    """δ^(k) 位于 x0"""

    k: int = 0
    x0: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"atom": "DeltaDeriv", "k": self.k, "x0": self.x0}

    def describe(self) -> str:
        if self.k == 0 and self.x0 == 0.0:
            return "delta"
        return f"delta'(k={self.k}, x0={self.x0:g})"


@dataclass(frozen=True)
class Heaviside:
    """H(· - x0)"""

    x0: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"atom": "Heaviside", "x0": self.x0}

    def describe(self) -> str:
        return f"heaviside({self.x0:g})"


@dataclass(frozen=True)
class Regular:
    """光滑函数 f 诱导的正则分布"""

    f: SmoothFn

    def to_dict(self) -> Dict[str, Any]:
        return {"atom": "Regular", "f": self.f.to_dict()}

    def describe(self) -> str:
        return "regular(...)"

    # ---- ConvNode 源协议 ----

    def convolve_values(self, kernel: SmoothFn, x: np.ndarray) -> np.ndarray:
        """(f∗ρ)(x) = ∫ f(x - s)·ρ(s) ds，s 在核支撑上用分级规则"""
        support = kernel.support
        if support.is_empty:
            return np.zeros_like(x, dtype=float)
        nodes, weights = mapped_rule(np.array([support.lo]), np.array([support.hi]))
        s, w = nodes[0], weights[0] * kernel._eval(nodes[0])
        shifted = x[:, None] - s[None, :]
        values = self.f._eval(shifted.ravel()).reshape(shifted.shape)
        return values @ w

    def conv_deriv(self, kernel: SmoothFn) -> SmoothFn:
        # 导数落在 f 上，避免 ∂^k(ε⊙ψ) 的 ε^(-k) 抵消
        return ConvNode(Regular(deriv(self.f, 1)), kernel)

    def conv_support(self, kernel: SmoothFn) -> Interval:
        if self.f.support.is_bounded:
            return self.f.support.minkowski(kernel.support)
        return UNBOUNDED

    def conv_critical(self, kernel: SmoothFn):
        support = kernel.support
        return frozenset(
            (lo + support.lo, hi + support.hi) for lo, hi in self.f.critical_intervals()
        )


@dataclass(frozen=True)
class PV:
    """主值分布 pv(1/x)"""

    def to_dict(self) -> Dict[str, Any]:
        return {"atom": "PV"}

    def describe(self) -> str:
        return "pv"

    def convolve_values(self, kernel: SmoothFn, x: np.ndarray) -> np.ndarray:
        """(pv∗ρ)(x) = ∫_0^∞ (ρ(x - y) - ρ(x + y))/y dy，在支撑端点处分段"""
        support = kernel.support
        if support.is_empty:
            return np.zeros_like(x, dtype=float)
        d1 = np.abs(x - support.lo)
        d2 = np.abs(x - support.hi)
        cuts = np.sort(np.column_stack([np.zeros_like(x), d1, d2]), axis=1)

        def integrand(y: np.ndarray, centre: np.ndarray) -> np.ndarray:
            return (kernel._eval(centre - y) - kernel._eval(centre + y)) / y

        out = np.zeros_like(x, dtype=float)
        for j in range(2):
            lo, hi = cuts[:, j], cuts[:, j + 1]
            live = hi > lo
            if not np.any(live):
                continue
            nodes, weights = mapped_rule(lo[live], hi[live])
            centre = np.repeat(x[live], nodes.shape[1]).reshape(nodes.shape)
            values = integrand(nodes.ravel(), centre.ravel()).reshape(nodes.shape)
            out[live] += np.sum(values * weights, axis=1)
        return out

    def conv_deriv(self, kernel: SmoothFn) -> SmoothFn:
        return ConvNode(self, deriv(kernel, 1))

    def conv_support(self, kernel: SmoothFn) -> Interval:
        return UNBOUNDED

    def conv_critical(self, kernel: SmoothFn):
        support = kernel.support
        return frozenset({(support.lo, support.hi)})


Atom = Union[DeltaDeriv, Heaviside, Regular, PV]


def atom_from_dict(data: Dict[str, Any]) -> Atom:
    kind = data.get("atom")
    if kind == "DeltaDeriv":
        return DeltaDeriv(int(data["k"]), float(data["x0"]))
    if kind == "Heaviside":
        return Heaviside(float(data["x0"]))
    if kind == "Regular":
        return Regular(from_dict(data["f"]))
    if kind == "PV":
        return PV()
    raise ParseException(f"未知分布原子 '{kind}'")


# ============================================================
# 分布（原子的有限线性组合）
# ============================================================


@dataclass(frozen=True)
class Distribution:
    terms: Tuple[Tuple[float, Atom], ...] = ()

    @classmethod
    def of(cls, atom: Atom, coef: float = 1.0) -> "Distribution":
        return cls(((float(coef), atom),)) if coef != 0.0 else ZERO_DIST

    @staticmethod
    def _combine(pairs) -> "Distribution":
        merged: Dict[Atom, float] = {}
        order = []
        for coef, atom in pairs:
            if atom not in merged:
                order.append(atom)
                merged[atom] = 0.0
            merged[atom] += coef
        return Distribution(tuple((merged[a], a) for a in order if merged[a] != 0.0))

    def __add__(self, other: "Distribution") -> "Distribution":
        return Distribution._combine(self.terms + other.terms)

    def __neg__(self) -> "Distribution":
        return self.scale(-1.0)

    def __sub__(self, other: "Distribution") -> "Distribution":
        return self + (-other)

    def scale(self, c: float) -> "Distribution":
        return Distribution._combine((c * coef, atom) for coef, atom in self.terms)

    def __rmul__(self, c: float) -> "Distribution":
        return self.scale(float(c))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def describe(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(
            atom.describe() if coef == 1.0 else f"{coef:g}*{atom.describe()}"
            for coef, atom in self.terms
        )

    def to_dict(self) -> Dict[str, Any]:
        return {"terms": [[coef, atom.to_dict()] for coef, atom in self.terms]}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Distribution":
        return cls._combine((float(c), atom_from_dict(a)) for c, a in data["terms"])


ZERO_DIST = Distribution()
DELTA = Distribution.of(DeltaDeriv(0, 0.0))
HEAVISIDE = Distribution.of(Heaviside(0.0))
PRINCIPAL_VALUE = Distribution.of(PV())


def delta(k: int = 0, x0: float = 0.0) -> Distribution:
    return Distribution.of(DeltaDeriv(int(k), float(x0)))


def heaviside(x0: float = 0.0) -> Distribution:
    return Distribution.of(Heaviside(float(x0)))


def regular(f: SmoothFn) -> Distribution:
    return Distribution.of(Regular(f))


# ============================================================
# 运算
# ============================================================


def _check_test_fn(phi: SmoothFn, omega: Optional[OpenInterval]) -> Interval:
    support = phi.support
    if not support.is_bounded:
        raise UnboundedSupportError()
    if omega is not None and not omega.contains_compact(support):
        raise UnboundedSupportError(f"测试函数支撑 {support.to_list()} 不在 Ω 内的")
    return support


def _pair_atom(atom: Atom, phi: SmoothFn, support: Interval) -> float:
    if isinstance(atom, DeltaDeriv):
        return (-1.0) ** atom.k * deriv(phi, atom.k)(atom.x0)
    if support.is_empty:
        return 0.0
    if isinstance(atom, Heaviside):
        if support.hi <= atom.x0:
            return 0.0
        return integrate(phi, max(atom.x0, support.lo), support.hi)
    if isinstance(atom, Regular):
        return integrate(mul(atom.f, phi), support.lo, support.hi)
    reach = max(abs(support.lo), abs(support.hi))
    return adaptive_integral(
        lambda y: (phi._eval(y) - phi._eval(-y)) / y, 0.0, reach, critical=[(0.0, reach)]
    )


def pair(u: Distribution, phi: SmoothFn, omega: Optional[OpenInterval] = None) -> float:
    """⟨u, φ⟩"""
    support = _check_test_fn(phi, omega)
    return float(sum(coef * _pair_atom(atom, phi, support) for coef, atom in u.terms))


def _deriv_atom(atom: Atom) -> Atom:
    if isinstance(atom, DeltaDeriv):
        return DeltaDeriv(atom.k + 1, atom.x0)
    if isinstance(atom, Heaviside):
        return DeltaDeriv(0, atom.x0)
    if isinstance(atom, Regular):
        return Regular(deriv(atom.f, 1))
    raise NotInCatalogError("not in catalog: pv(1/x) 的导数 -fp(1/x²) 不在目录中")


def D(u: Distribution) -> Distribution:
    """分布导数"""
    return Distribution._combine((coef, _deriv_atom(atom)) for coef, atom in u.terms)


def _convolve_atom(atom: Atom, rho: SmoothFn) -> SmoothFn:
    if isinstance(atom, DeltaDeriv):
        return translate(atom.x0, deriv(rho, atom.k))
    if isinstance(atom, Heaviside):
        return translate(atom.x0, Antideriv(rho))
    return ConvNode(atom, rho)


def convolve_smooth(u: Distribution, rho: SmoothFn) -> SmoothFn:
    """(u∗ρ)(x) = ⟨u(y), ρ(x - y)⟩"""
    if not rho.support.is_bounded:
        raise UnboundedSupportError("convolution kernel")
    return add(*(mul(Const(coef), _convolve_atom(atom, rho)) for coef, atom in u.terms))
