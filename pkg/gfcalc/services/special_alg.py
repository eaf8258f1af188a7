"""
特殊 Colombeau 代数模块
𝒢ˢ(Ω) 的元素为 SmoothFn 的 ε-网：代数运算、导数、分布嵌入、适度/可忽略判定、
c-有界复合、广义点处求值以及（作为辅助工具的）关联
"""

import threading
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

from scipy.optimize import brentq

from ..config import config
from ..models import AlphaSlope, Verdict, VerdictReport, verdict_and
from ..utils.exceptions import (
    CBoundedWitnessError,
    InsufficientSamplesError,
    NotCompactlySupportedError,
    OmegaMismatchError,
    ParameterValidationError,
)
from ..utils.logger import alg_logger, log_function_call, log_verdict
from .asymptotics import (
    EpsGrid,
    Net,
    default_grid,
    estimate_order,
    is_moderate,
    is_negligible,
    map_grid,
    tends_to_zero,
)
from .distributions import Distribution, convolve_smooth, pair
from .gnum import GenNumber, GenPoint, make_point
from .mollifier import MollifierNet, make_schedule, scaled_at
from .smoothfn import (
    BUMP,
    REAL_LINE,
    CompactSet,
    Const,
    Interval,
    OpenInterval,
    SmoothFn,
    add as fn_add,
    compose,
    deriv,
    integrate,
    mul as fn_mul,
    range_on,
    scale_S,
    sup_abs_on,
    translate_T,
)

PAIRING_TOL = 1e-13

Rep = Callable[[float], SmoothFn]


class GenFunction:
    """𝒢ˢ(Ω) 的代表元：ε ↦ SmoothFn，按 ε 延迟构造并记忆化"""

    __hash__ = None  # type: ignore[assignment]

    def __init__(
        self,
        omega: OpenInterval,
        rep: Rep,
        label: str = "u",
        grid: Optional[EpsGrid] = None,
    ):
        self.omega = omega
        self._rep = rep
        self.label = label
        self.grid = grid if grid is not None else default_grid()
        self._cache: Dict[float, SmoothFn] = {}
        self._lock = threading.Lock()

    def rep(self, eps: float) -> SmoothFn:
        cached = self._cache.get(eps)
        if cached is not None:
            return cached
        fn = self._rep(eps)
        with self._lock:
            return self._cache.setdefault(eps, fn)

    def _check(self, other: "GenFunction") -> None:
        if self.omega != other.omega:
            raise OmegaMismatchError(tuple(self.omega.to_list()), tuple(other.omega.to_list()))

    def _derived(self, rep: Rep, label: str) -> "GenFunction":
        return GenFunction(self.omega, rep, label, self.grid)

    def __add__(self, other: "GenFunction") -> "GenFunction":
        self._check(other)
        return self._derived(lambda e: fn_add(self.rep(e), other.rep(e)), f"({self.label}+{other.label})")

    def __sub__(self, other: "GenFunction") -> "GenFunction":
        self._check(other)
        return self._derived(
            lambda e: fn_add(self.rep(e), fn_mul(Const(-1.0), other.rep(e))),
            f"({self.label}-{other.label})",
        )

    def __mul__(self, other: Union["GenFunction", float]) -> "GenFunction":
        if not isinstance(other, GenFunction):
            return scalar_mul(float(other), self)
        self._check(other)
        return self._derived(lambda e: fn_mul(self.rep(e), other.rep(e)), f"{self.label}·{other.label}")

    def __rmul__(self, c: float) -> "GenFunction":
        return scalar_mul(float(c), self)

    def __neg__(self) -> "GenFunction":
        return scalar_mul(-1.0, self)

    def __repr__(self) -> str:
        return f"GenFunction[{self.label} on {self.omega.to_list()}]"


# ============================================================
# 构造
# ============================================================


def sigma(f: SmoothFn, omega: OpenInterval = REAL_LINE, grid: Optional[EpsGrid] = None) -> GenFunction:
    """常数网嵌入 σ(f) = [f]"""
    return GenFunction(omega, lambda eps: f, "σ(f)", grid)


def iota(
    u: Distribution,
    psi: Optional[MollifierNet] = None,
    omega: OpenInterval = REAL_LINE,
    grid: Optional[EpsGrid] = None,
) -> GenFunction:
    """ι_Ω(u) = [u ∗ (ε⊙ψ_ε)]"""
    if psi is None:
        psi = make_schedule()
    return GenFunction(
        omega, lambda eps: convolve_smooth(u, scaled_at(psi, eps)), f"ι({u.describe()})", grid
    )


def add(u: GenFunction, v: GenFunction) -> GenFunction:
    return u + v


def sub(u: GenFunction, v: GenFunction) -> GenFunction:
    return u - v


def mul(u: GenFunction, v: GenFunction) -> GenFunction:
    return u * v


def neg(u: GenFunction) -> GenFunction:
    return -u


def scalar_mul(c: float, u: GenFunction) -> GenFunction:
    return u._derived(lambda e: fn_mul(Const(c), u.rep(e)), f"{c:g}·{u.label}")


def restrict(u: GenFunction, omega_sub: OpenInterval) -> GenFunction:
    """限制到开子区间 Ω' ⊆ Ω"""
    if omega_sub.lo < u.omega.lo or omega_sub.hi > u.omega.hi or omega_sub.is_empty:
        raise ParameterValidationError("omega", f"{omega_sub.to_list()} 不是 {u.omega.to_list()} 的子区间")
    return GenFunction(omega_sub, u.rep, u.label, u.grid)


def smooth_compose(
    g: Union[SmoothFn, Callable[[SmoothFn, SmoothFn], SmoothFn]], *us: GenFunction
) -> GenFunction:
    """[g(u_1ε, …, u_mε)]；m = 1 时 g 为 SmoothFn，m = 2 时 g 由 SmoothFn 组合子给出"""
    if len(us) == 1 and isinstance(g, SmoothFn):
        u = us[0]
        return u._derived(lambda e: compose(g, u.rep(e)), f"g∘{u.label}")
    if len(us) == 2 and callable(g) and not isinstance(g, SmoothFn):
        u, v = us
        u._check(v)
        return u._derived(lambda e: g(u.rep(e), v.rep(e)), f"g({u.label},{v.label})")
    raise ParameterValidationError("m", "smooth_compose 仅支持 m = 1（SmoothFn）或 m = 2（组合子）")


def partial(u: GenFunction, k: int = 1) -> GenFunction:
    """∂^k u"""
    if k < 0:
        raise ParameterValidationError("k", "必须 ≥ 0")
    if k == 0:
        return u
    return u._derived(lambda e: deriv(u.rep(e), k), f"∂^{k}{u.label}")


# ============================================================
# 适度性与可忽略性
# ============================================================


def _check_K(u: GenFunction, K: CompactSet) -> None:
    if not u.omega.contains_compact(K):
        raise ParameterValidationError("K", f"K={K.to_list()} 不严格包含于 Ω={u.omega.to_list()}")


def sup_net(u: GenFunction, K: CompactSet, alpha: int) -> Net:
    """ε ↦ sup_{x∈K}|∂^α u_ε(x)|，低于零阈值的样本置零"""
    return Net.from_real(
        lambda eps: sup_abs_on(deriv(u.rep(eps), alpha), K), f"sup|∂^{alpha}{u.label}|"
    ).flushed()


def _classify(
    operation: str,
    u: GenFunction,
    K: CompactSet,
    alpha_max: int,
    classify: Callable[[list], Verdict],
    m_max: Optional[int] = None,
    grid: Optional[EpsGrid] = None,
) -> VerdictReport:
    _check_K(u, K)
    grid = grid if grid is not None else u.grid
    per_alpha: List[AlphaSlope] = []
    for alpha in range(alpha_max + 1):
        samples = sup_net(u, K, alpha).samples(grid)
        verdict = classify(samples)
        try:
            report = estimate_order(samples)
            slope, r2 = report.slope, report.r2
        except InsufficientSamplesError:
            slope, r2 = float("nan"), 0.0
        per_alpha.append(AlphaSlope(alpha=alpha, slope=slope, r2=r2, verdict=verdict))
    verdict = verdict_and(*(p.verdict for p in per_alpha))
    log_verdict(operation, verdict, f"K={K.to_list()}, alpha_max={alpha_max}")
    return VerdictReport(
        operation=operation,
        K=[K.lo, K.hi],
        alpha_max=alpha_max,
        m_max=m_max,
        per_alpha=per_alpha,
        verdict=verdict,
    )


@log_function_call(alg_logger)
def moderate_report(
    u: GenFunction,
    K: CompactSet,
    alpha_max: int = 2,
    N_cap: Optional[int] = None,
    grid: Optional[EpsGrid] = None,
) -> VerdictReport:
    return _classify(
        "moderate_on", u, K, alpha_max, lambda s: is_moderate(s, N_cap), grid=grid
    )


@log_function_call(alg_logger)
def negligible_report(
    u: GenFunction,
    K: CompactSet,
    alpha_max: int = 2,
    m_max: Optional[int] = None,
    grid: Optional[EpsGrid] = None,
) -> VerdictReport:
    m_max = m_max if m_max is not None else config.tolerance.m_max
    return _classify(
        "negligible_on", u, K, alpha_max, lambda s: is_negligible(s, m_max), m_max, grid
    )


def moderate_on(u: GenFunction, K: CompactSet, alpha_max: int = 2, N_cap: Optional[int] = None) -> Verdict:
    return moderate_report(u, K, alpha_max, N_cap).verdict


def negligible_on(
    u: GenFunction, K: CompactSet, alpha_max: int = 2, m_max: Optional[int] = None
) -> Verdict:
    return negligible_report(u, K, alpha_max, m_max).verdict


def eq_in_Gs(
    u: GenFunction,
    v: GenFunction,
    K: CompactSet,
    alpha_max: int = 2,
    m_max: Optional[int] = None,
) -> Verdict:
    """u = v 于 𝒢ˢ(Ω)：u - v 在 K 上可忽略"""
    return negligible_on(u - v, K, alpha_max, m_max)


# ============================================================
# 求值与复合
# ============================================================


def eval_at(u: GenFunction, x: GenPoint) -> GenNumber:
    """u(x) = [u_ε(x_ε)]"""
    if x.omega != u.omega:
        raise OmegaMismatchError(tuple(x.omega.to_list()), tuple(u.omega.to_list()))
    if not x.is_compactly_supported:
        raise NotCompactlySupportedError("not compactly supported: 求值需要紧支撑广义点")
    return GenNumber(Net.from_real(lambda eps: u.rep(eps)(x(eps)), f"{u.label}(x)"), x.grid)


@dataclass
class CBoundedReport:
    verdict: Verdict
    witness: Optional[CompactSet]
    hull: Interval


def is_cbounded(u: GenFunction, K: CompactSet, omega2: OpenInterval) -> CBoundedReport:
    """尾部 u_ε(K) 的包络是否落在某个 K′ ⋐ Ω₂ 中，返回见证 K′"""
    _check_K(u, K)
    tail = u.grid.values[-max(1, len(u.grid) // 4) :]
    ranges = map_grid(lambda eps: range_on(u.rep(eps), K), tail)
    hull = ranges[0]
    for r in ranges[1:]:
        hull = hull.hull(r)
    if hull.is_bounded and omega2.contains_compact(hull):
        verdict, witness = Verdict.YES, CompactSet.of(hull)
    else:
        verdict, witness = Verdict.NO, None
    log_verdict("is_cbounded", verdict, f"hull={hull.to_list()}")
    return CBoundedReport(verdict, witness, hull)


def compose_cbounded(v: GenFunction, u: GenFunction, K: CompactSet) -> GenFunction:
    """[v_ε ∘ u_ε]，需要 u 在 K 上映入 v.omega 的 c-有界见证"""
    report = is_cbounded(u, K, v.omega)
    if report.verdict != Verdict.YES:
        raise CBoundedWitnessError(
            f"c-bounded witness missing: u_ε(K) 的包络 {report.hull.to_list()} 不在 Ω₂ 内"
        )
    return u._derived(lambda e: compose(v.rep(e), u.rep(e)), f"{v.label}∘{u.label}")


def half_crossing_point(
    u: GenFunction,
    level: float = 0.5,
    K: Optional[CompactSet] = None,
) -> GenPoint:
    """每个 ε 在 [-ε, ε] 上二分求 u_ε(x) = level 的点，得到广义点"""
    if K is None:
        K = CompactSet(-0.5, 0.5)

    def crossing(eps: float) -> float:
        fn = u.rep(eps)
        return brentq(lambda t: fn(t) - level, -eps, eps, xtol=1e-12 * eps)

    return make_point(Net.from_real(crossing, "x½"), K, u.omega, u.grid)


# ============================================================
# 关联（辅助工具）
# ============================================================


def association_grid() -> EpsGrid:
    return default_grid(config.grid.k_min, config.grid.assoc_k_max)


def default_panel() -> List[SmoothFn]:
    """五个在 0 处非零的平移 bump"""
    return [translate_T(c, scale_S(0.5, BUMP)) for c in (-0.4, -0.2, 0.0, 0.2, 0.4)]


def shadow_pairing(u: GenFunction, phi: SmoothFn, grid: Optional[EpsGrid] = None) -> GenNumber:
    """ε ↦ ∫u_ε·φ"""
    support = phi.support
    if not support.is_bounded or not u.omega.contains_compact(support):
        raise ParameterValidationError("phi", "测试函数须紧支撑于 Ω 内")
    grid = grid if grid is not None else association_grid()
    return GenNumber(
        Net.from_real(
            lambda eps: integrate(fn_mul(u.rep(eps), phi), support.lo, support.hi, PAIRING_TOL),
            f"⟨{u.label},φ⟩",
        ),
        grid,
    )


def association_report(
    u: GenFunction,
    w: Distribution,
    panel: Optional[Sequence[SmoothFn]] = None,
    grid: Optional[EpsGrid] = None,
) -> VerdictReport:
    panel = list(panel) if panel is not None else default_panel()
    grid = grid if grid is not None else association_grid()
    verdicts, slopes = [], []
    for phi in panel:
        diff = abs(shadow_pairing(u, phi, grid) - pair(w, phi))
        samples = diff.net.flushed().samples(grid)
        verdicts.append(tends_to_zero(samples))
        try:
            slopes.append(estimate_order(samples).slope)
        except InsufficientSamplesError:
            slopes.append(float("nan"))
    verdict = verdict_and(*verdicts)
    log_verdict("associates_to", verdict, f"w={w.describe()}")
    return VerdictReport(
        operation="associates_to",
        verdict=verdict,
        details={"distribution": w.describe(), "slopes": slopes, "panel_size": len(panel)},
    )


def associates_to(
    u: GenFunction, w: Distribution, panel: Optional[Sequence[SmoothFn]] = None
) -> Verdict:
    """对面板中每个 φ，⟨u_ε, φ⟩ - ⟨w, φ⟩ → 0"""
    return association_report(u, w, panel).verdict
