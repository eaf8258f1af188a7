"""
磨光子构造模块
构造 1..q 阶矩消失的磨光子 ψ = bump·p，并按阈值调度成网 (ψ_ε)
"""

import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from ..config import config
from ..models import (
    AlphaSlope,
    MollifierNetSpec,
    MollifierReport,
    MollifierSpec,
    StageCheck,
)
from ..utils.exceptions import (
    IllConditionedError,
    InsufficientSamplesError,
    ParameterValidationError,
    ParseException,
)
from ..utils.logger import log_function_call, moll_logger
from .asymptotics import EpsGrid, Net, estimate_order, is_moderate
from .smoothfn import (
    BUMP,
    Interval,
    SmoothFn,
    integrate,
    moments,
    mul,
    polynomial,
    scale_S,
    sup_abs_on,
)

MASS_TOL = 1e-10
MOMENT_TOL = 1e-8


@dataclass(frozen=True)
class Mollifier:
    """支撑在 [-1,1] 内、1..q 阶矩消失的磨光子"""

    fn: SmoothFn
    q: int
    coefficients: Tuple[float, ...]
    l1_mass: float

    def to_spec(self) -> MollifierSpec:
        return MollifierSpec(q=self.q, coefficients=list(self.coefficients), l1_mass=self.l1_mass)

    @classmethod
    def from_spec(cls, spec: MollifierSpec) -> "Mollifier":
        coeffs = tuple(float(c) for c in spec.coefficients)
        return cls(_bump_times(coeffs), spec.q, coeffs, spec.l1_mass)


def _bump_times(coeffs: Tuple[float, ...]) -> SmoothFn:
    if coeffs == (1.0,):
        return BUMP
    return mul(BUMP, polynomial(coeffs))


@lru_cache(maxsize=None)
def bump_moments(n: int) -> Tuple[float, ...]:
    """(∫x^k bump)_{k=0..n}；bump 为偶函数，奇数阶精确为 0"""
    values = moments(BUMP, n)
    return tuple(0.0 if k % 2 else v for k, v in enumerate(values))


def l1_mass(fn: SmoothFn, coeffs: Sequence[float]) -> float:
    """∫|bump·p|：在 p 于 (-1,1) 内的实根处分段积分"""
    cuts = [-1.0, 1.0]
    if len(coeffs) > 1:
        for root in npoly.polyroots(np.asarray(coeffs, dtype=float)):
            if abs(root.imag) < 1e-9 and -1.0 < root.real < 1.0:
                cuts.append(float(root.real))
    cuts = sorted(cuts)
    return float(sum(abs(integrate(fn, a, b)) for a, b in zip(cuts[:-1], cuts[1:]) if b > a))


def base_bump() -> Mollifier:
    """归一化 bump：偶函数，1 阶矩由对称性消失"""
    return Mollifier(BUMP, 1, (1.0,), 1.0)


@log_function_call(moll_logger)
@lru_cache(maxsize=None)
def make_moment_mollifier(q: int) -> Mollifier:
    """求解 Gram 方程 G c = e₀（G_jk = ∫x^(j+k) bump），ψ = bump·Σ c_j x^j"""
    if not 0 <= q <= config.mollifier.max_q:
        raise ParameterValidationError("q", f"要求 0 ≤ q ≤ {config.mollifier.max_q}，收到 {q}")
    if q == 0:
        return Mollifier(BUMP, 0, (1.0,), 1.0)

    mu = bump_moments(2 * q)
    gram = np.array([[mu[j + k] for k in range(q + 1)] for j in range(q + 1)])
    rhs = np.zeros(q + 1)
    rhs[0] = 1.0
    coeffs = np.linalg.solve(gram, rhs)
    residual = float(np.max(np.abs(gram @ coeffs - rhs)))
    if residual > config.mollifier.gram_residual or not np.all(np.isfinite(coeffs)):
        raise IllConditionedError(residual, q + 1)

    coeffs_t = tuple(float(c) for c in coeffs)
    fn = _bump_times(coeffs_t)
    mass = l1_mass(fn, coeffs_t)
    moll_logger.info(f"构造 q={q} 磨光子，∫|ψ| = {mass:.6f}，Gram 残差 {residual:.2e}")
    return Mollifier(fn, q, coeffs_t, mass)


@dataclass(frozen=True)
class MollifierNet:
    """分段磨光子网：ε ∈ (ε_{j+1}, ε_j] 时使用第 j 段，ε > ε_1 时使用第 0 段"""

    thresholds: Tuple[float, ...]
    stages: Tuple[Mollifier, ...]

    @property
    def q_max(self) -> int:
        return len(self.thresholds)

    def stage_index(self, eps: float) -> int:
        return sum(1 for t in self.thresholds if eps <= t)

    def to_spec(self) -> MollifierNetSpec:
        return MollifierNetSpec(
            q_max=self.q_max,
            thresholds=list(self.thresholds),
            stages=[s.to_spec() for s in self.stages],
        )


def default_thresholds(q_max: int) -> Tuple[float, ...]:
    step = config.mollifier.threshold_step
    return tuple(2.0 ** (-step * j) for j in range(1, q_max + 1))


def _validate_thresholds(thresholds: Sequence[float], q_max: int) -> Tuple[float, ...]:
    thresholds = tuple(float(t) for t in thresholds)
    if len(thresholds) != q_max:
        raise ParameterValidationError(
            "thresholds", f"长度必须等于 q_max={q_max}，收到 {len(thresholds)}"
        )
    if any(not (0.0 < t <= 1.0) for t in thresholds):
        raise ParameterValidationError("thresholds", "阈值必须位于 (0,1]")
    if any(b >= a for a, b in zip(thresholds, thresholds[1:])):
        raise ParameterValidationError("thresholds", "阈值必须严格递减")
    return thresholds


@log_function_call(moll_logger)
def make_schedule(
    q_max: Optional[int] = None, thresholds: Optional[Sequence[float]] = None
) -> MollifierNet:
    """第 j 段 q = j，ε ≤ ε_j 时矩阶至少为 j"""
    if q_max is None:
        q_max = config.mollifier.q_max
    if not 0 <= q_max <= config.mollifier.max_q:
        raise ParameterValidationError("q_max", f"要求 0 ≤ q_max ≤ {config.mollifier.max_q}")
    if thresholds is None:
        thresholds = default_thresholds(q_max)
    thresholds = _validate_thresholds(thresholds, q_max)
    stages = tuple(make_moment_mollifier(j) for j in range(q_max + 1))
    return MollifierNet(thresholds, stages)


def mollifier_at(net: MollifierNet, eps: float) -> Mollifier:
    """ε 处生效的阶段"""
    if eps <= 0:
        raise ParameterValidationError("eps", f"必须为正数，收到 {eps}")
    return net.stages[net.stage_index(eps)]


def scaled_at(net: MollifierNet, eps: float) -> SmoothFn:
    """ε⊙ψ_ε"""
    return scale_S(eps, mollifier_at(net, eps).fn)


def check_stage(index: int, stage: Mollifier) -> StageCheck:
    values = moments(stage.fn, max(stage.q, 0))
    mass = values[0]
    worst = max((abs(v) for v in values[1:]), default=0.0)
    support = stage.fn.support
    return StageCheck(
        stage=index,
        q=stage.q,
        mass=mass,
        max_moment_error=worst,
        l1_mass=stage.l1_mass,
        support_ok=support.is_bounded and Interval(-1.0, 1.0).hull(support) == Interval(-1.0, 1.0),
        mass_ok=abs(mass - 1.0) <= MASS_TOL,
        moments_ok=worst <= MOMENT_TOL,
    )


@log_function_call(moll_logger)
def verify_properties(
    net: MollifierNet,
    grid: EpsGrid,
    eta: Optional[float] = None,
    alpha_max: int = 3,
) -> MollifierReport:
    """逐阶段检查 (i)(ii)(iv)；α = 0..alpha_max 的 sup|∂^α ψ_ε| 阶；(v) 的 ∫|ψ_ε| 轨迹"""
    stages = [check_stage(j, stage) for j, stage in enumerate(net.stages)]

    sup_cache: Dict[Tuple[int, int], float] = {}

    def stage_sup(index: int, alpha: int) -> float:
        key = (index, alpha)
        if key not in sup_cache:
            sup_cache[key] = sup_abs_on(net.stages[index].fn.deriv(alpha), Interval(-1.0, 1.0))
        return sup_cache[key]

    alpha_orders: List[AlphaSlope] = []
    for alpha in range(alpha_max + 1):
        sup_net = Net.from_real(
            lambda eps, a=alpha: stage_sup(net.stage_index(eps), a), f"sup|∂^{alpha}ψ_ε|"
        )
        samples = sup_net.samples(grid)
        try:
            report = estimate_order(samples)
        except InsufficientSamplesError:
            moll_logger.warning(f"网格过短，跳过 α={alpha} 的阶估计")
            continue
        alpha_orders.append(
            AlphaSlope(alpha=alpha, slope=report.slope, r2=report.r2, verdict=is_moderate(samples))
        )

    trajectory = [[eps, net.stages[net.stage_index(eps)].l1_mass] for eps in grid.values]
    l1_ok = None
    if eta is not None:
        l1_ok = all(l1 <= 1.0 + eta for _, l1 in trajectory)

    passed = all(s.support_ok and s.mass_ok and s.moments_ok for s in stages)
    return MollifierReport(
        stages=stages,
        alpha_orders=alpha_orders,
        l1_trajectory=trajectory,
        eta=eta,
        l1_ok=l1_ok,
        passed=passed,
    )


def save_net(net: MollifierNet) -> str:
    """磨光子网的 JSON（键排序，可逐字节重现）"""
    return json.dumps(net.to_spec().model_dump(), sort_keys=True, indent=2)


def load_net(text: str) -> MollifierNet:
    """从 JSON 重建磨光子网"""
    try:
        spec = MollifierNetSpec.model_validate_json(text)
    except ValueError as e:
        raise ParseException(f"无效的磨光子 JSON: {e}")
    thresholds = _validate_thresholds(spec.thresholds, spec.q_max)
    stages = tuple(Mollifier.from_spec(s) for s in spec.stages)
    if len(stages) != spec.q_max + 1:
        raise ParseException(f"阶段数应为 {spec.q_max + 1}，收到 {len(stages)}")
    return MollifierNet(thresholds, stages)
