"""
完全 Colombeau 代数模块
测试对象 𝒜_q、定义域 U(Ω)、代表元 R ∈ ℰᵉ(Ω)、基于随机面板的适度/可忽略判定以及内蕴嵌入
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import config
from ..models import PanelSpec, Verdict, VerdictReport, verdict_and
from ..utils.exceptions import (
    InsufficientSamplesError,
    OutsideUOmegaError,
    PanelGenerationError,
    ParameterValidationError,
)
from ..utils.logger import alg_logger, log_function_call, log_numerical_event, log_verdict
from .asymptotics import MIN_GRID_POINTS, EpsGrid, LogSample, Net, default_grid, estimate_order, is_moderate
from .distributions import Distribution, convolve_smooth
from .mollifier import MASS_TOL, MOMENT_TOL, bump_moments
from .smoothfn import (
    BUMP,
    REAL_LINE,
    CompactSet,
    Const,
    OpenInterval,
    SmoothFn,
    add,
    deriv,
    moments,
    mul,
    polynomial,
    reflect,
    scale_S,
    sup_abs_on,
)

MAX_PANEL_Q = 10
MAX_ATTEMPTS = 10
# 可忽略判定要求斜率超过目标阶的余量
NEGLIGIBLE_MARGIN = 0.5


@dataclass(frozen=True)
class TestFnA:
    """𝒜_q 的元素：∫φ = 1 且 1..q 阶矩消失"""

    __test__ = False

    phi: SmoothFn
    q: int
    coefficients: Tuple[float, ...] = ()


def omega_phi(phi: SmoothFn, omega: OpenInterval = REAL_LINE) -> OpenInterval:
    """Ω_φ = Ω ∩ {x | supp(φ) + x ⊆ Ω}"""
    support = phi.support
    if not support.is_bounded:
        raise ParameterValidationError("phi", "测试函数必须紧支撑")
    if support.is_empty:
        return omega
    return OpenInterval(omega.lo - support.lo, omega.hi - support.hi).intersect(omega)


def in_UOmega(phi: SmoothFn, x: float, omega: OpenInterval = REAL_LINE) -> bool:
    """(φ, x) ∈ U(Ω)"""
    return omega.contains(x) and omega_phi(phi, omega).contains(x)


def scale_test(eps: float, test: TestFnA) -> TestFnA:
    """ε⊙φ，保留认证的 q"""
    return TestFnA(scale_S(eps, test.phi), test.q, test.coefficients)


# ============================================================
# 测试函数面板
# ============================================================


def _constraint_matrix(q: int, degree: int) -> np.ndarray:
    """A_{kj} = ∫x^(k+j) bump，k = 0..q，j = 0..degree"""
    mu = bump_moments(q + degree)
    return np.array([[mu[k + j] for j in range(degree + 1)] for k in range(q + 1)])


def _certify(phi: SmoothFn, q: int) -> bool:
    values = moments(phi, q)
    if abs(values[0] - 1.0) > MASS_TOL:
        return False
    return all(abs(v) <= MOMENT_TOL for v in values[1:])


@log_function_call(alg_logger)
def make_panel(q: int, size: int, seed: int) -> List[TestFnA]:
    """随机多项式 p（次数 q+2）投影到 𝒜_q 的仿射约束上，φ = bump·p，逐个矩认证"""
    if not 0 <= q <= MAX_PANEL_Q:
        raise ParameterValidationError("q", f"要求 0 ≤ q ≤ {MAX_PANEL_Q}")
    if size < 3:
        raise ParameterValidationError("size", "面板大小必须 ≥ 3")
    rng = np.random.default_rng(seed)
    degree = q + 2
    A = _constraint_matrix(q, degree)
    target = np.zeros(q + 1)
    target[0] = 1.0
    gram = A @ A.T

    panel: List[TestFnA] = []
    for member in range(size):
        for attempt in range(MAX_ATTEMPTS):
            raw = rng.standard_normal(degree + 1)
            coeffs = raw + A.T @ np.linalg.solve(gram, target - A @ raw)
            residual = float(np.max(np.abs(A @ coeffs - target)))
            if residual > MOMENT_TOL:
                log_numerical_event(alg_logger, "make_panel", "投影残差过大，重新生成", f"{residual:.2e}")
                continue
            coeffs_t = tuple(float(c) for c in coeffs)
            phi = mul(BUMP, polynomial(coeffs_t))
            if _certify(phi, q):
                panel.append(TestFnA(phi, q, coeffs_t))
                break
            log_numerical_event(alg_logger, "make_panel", "矩认证失败，重新生成", f"member={member}")
        else:
            raise PanelGenerationError(q, MAX_ATTEMPTS)
    return panel


def panel_spec(panel: Sequence[TestFnA], seed: int) -> PanelSpec:
    q = panel[0].q if panel else 0
    return PanelSpec(q=q, seed=seed, coefficients=[list(t.coefficients) for t in panel])


def panel_from_spec(spec: PanelSpec) -> List[TestFnA]:
    """按序列化的系数精确重建面板"""
    return [
        TestFnA(mul(BUMP, polynomial(c)), spec.q, tuple(float(v) for v in c))
        for c in spec.coefficients
    ]


# ============================================================
# 代表元
# ============================================================


class FullRep:
    """ℰᵉ(Ω) 的代表元：φ ↦ R(φ, ·)，在 Ω_φ 上物化为 SmoothFn"""

    def __init__(
        self,
        omega: OpenInterval,
        materialize: Callable[[SmoothFn], SmoothFn],
        label: str = "R",
    ):
        self.omega = omega
        self._materialize = materialize
        self.label = label

    def slice(self, phi: SmoothFn) -> SmoothFn:
        """R(φ, ·)"""
        return self._materialize(phi)

    def __call__(self, phi: SmoothFn, x: float) -> float:
        region = omega_phi(phi, self.omega)
        if not (self.omega.contains(x) and region.contains(x)):
            raise OutsideUOmegaError(x, tuple(region.to_list()))
        return self._materialize(phi)(x)

    def _combine(self, other: "FullRep", op: Callable[[SmoothFn, SmoothFn], SmoothFn], name: str) -> "FullRep":
        if self.omega != other.omega:
            raise ParameterValidationError("omega", "FullRep 的 Ω 不一致")
        return FullRep(
            self.omega,
            lambda phi: op(self._materialize(phi), other._materialize(phi)),
            f"({self.label}{name}{other.label})",
        )

    def __add__(self, other: "FullRep") -> "FullRep":
        return self._combine(other, add, "+")

    def __sub__(self, other: "FullRep") -> "FullRep":
        return self._combine(other, lambda a, b: add(a, mul(Const(-1.0), b)), "-")

    def __mul__(self, other: "FullRep") -> "FullRep":
        return self._combine(other, mul, "·")


def iota_full(u: Distribution, omega: OpenInterval = REAL_LINE) -> FullRep:
    """(ι u)(φ, x) = ⟨u, φ(· - x)⟩ = (u ∗ φ̌)(x)"""
    return FullRep(omega, lambda phi: convolve_smooth(u, reflect(phi)), f"ιᵉ({u.describe()})")


def sigma_full(f: SmoothFn, omega: OpenInterval = REAL_LINE) -> FullRep:
    """R(φ, x) = f(x)"""
    return FullRep(omega, lambda phi: f, "σᵉ(f)")


def add_full(r: FullRep, s: FullRep) -> FullRep:
    return r + s


def sub_full(r: FullRep, s: FullRep) -> FullRep:
    return r - s


def mul_full(r: FullRep, s: FullRep) -> FullRep:
    return r * s


def partial_full(r: FullRep, k: int = 1) -> FullRep:
    """∂_x^k R"""
    if k < 0:
        raise ParameterValidationError("k", "必须 ≥ 0")
    return FullRep(r.omega, lambda phi: deriv(r.slice(phi), k), f"∂^{k}{r.label}")


# ============================================================
# 判定
# ============================================================


def full_grid() -> EpsGrid:
    return default_grid(config.grid.k_min, config.grid.full_k_max)


def _admissible_grid(r: FullRep, K: CompactSet, panel: Sequence[TestFnA], grid: EpsGrid) -> EpsGrid:
    """只保留对所有面板成员都有 K ⊆ Ω_{ε⊙φ} 的 ε"""
    keep = tuple(
        eps
        for eps in grid.values
        if all(omega_phi(scale_S(eps, t.phi), r.omega).contains_compact(K) for t in panel)
    )
    if len(keep) < len(grid):
        log_numerical_event(
            alg_logger,
            "full_alg",
            "缩短网格头部",
            f"K={K.to_list()} 对 {len(grid) - len(keep)} 个较大的 ε 不可容许",
        )
    if not keep:
        raise ParameterValidationError("K", "K 对网格上的缩放支撑均不可容许")
    # 更小的 ε 仍可容许，在尾部加密补足点数
    while len(keep) < MIN_GRID_POINTS and keep[-1] > 2.0 ** -60:
        keep += (keep[-1] / 2.0,)
    return EpsGrid(keep)


def _panel_samples(
    r: FullRep, K: CompactSet, test: TestFnA, alpha: int, grid: EpsGrid
) -> List[LogSample]:
    net = Net.from_real(
        lambda eps: sup_abs_on(deriv(r.slice(scale_S(eps, test.phi)), alpha), K),
        f"sup|∂^{alpha}{r.label}(ε⊙φ)|",
    )
    return net.flushed().samples(grid)


def _slope(samples: List[LogSample]) -> Tuple[float, float]:
    try:
        report = estimate_order(samples)
        return report.slope, report.r2
    except InsufficientSamplesError:
        return math.nan, 0.0


@log_function_call(alg_logger)
def full_moderate_report(
    r: FullRep,
    K: CompactSet,
    alpha_max: int = 0,
    N_probe: int = 1,
    panel_size: Optional[int] = None,
    seed: Optional[int] = None,
    grid: Optional[EpsGrid] = None,
) -> VerdictReport:
    """∃N ∀φ∈𝒜_N：sup_K|∂^α R(ε⊙φ, x)| = O(ε^(-N))；判定为 No 时 N 最多升两级"""
    panel_size = panel_size if panel_size is not None else config.runtime.panel_size
    seed = seed if seed is not None else config.runtime.seed
    grid = grid if grid is not None else full_grid()
    if N_probe < 1:
        raise ParameterValidationError("N_probe", "必须 ≥ 1")

    verdict = Verdict.INCONCLUSIVE
    slopes: Dict[str, float] = {}
    N = N_probe
    panel: List[TestFnA] = []
    for N in range(N_probe, N_probe + 3):
        panel = make_panel(N, panel_size, seed)
        active = _admissible_grid(r, K, panel, grid)
        verdicts = []
        slopes = {}
        for i, test in enumerate(panel):
            for alpha in range(alpha_max + 1):
                samples = _panel_samples(r, K, test, alpha, active)
                verdicts.append(is_moderate(samples, N))
                slopes[f"phi{i}/alpha{alpha}"] = _slope(samples)[0]
        verdict = verdict_and(*verdicts)
        if verdict != Verdict.NO:
            break
        alg_logger.info(f"full_moderate 在 N={N} 为 No，提升 N")

    log_verdict("full_moderate", verdict, f"N={N}")
    return VerdictReport(
        operation="full_moderate",
        K=[K.lo, K.hi],
        alpha_max=alpha_max,
        verdict=verdict,
        details={"N": N, "slopes": slopes, "panel": panel_spec(panel, seed).model_dump()},
    )


@log_function_call(alg_logger)
def full_negligible_report(
    r: FullRep,
    K: CompactSet,
    alpha_max: int = 0,
    m: int = 2,
    q_schedule: Optional[Sequence[int]] = None,
    panel_size: Optional[int] = None,
    seed: Optional[int] = None,
    grid: Optional[EpsGrid] = None,
) -> VerdictReport:
    """∀m ∃q ∀φ∈𝒜_q：sup_K|∂^α R(ε⊙φ, x)| = O(ε^m)，对给定 m 在 q_schedule 中搜索 q"""
    panel_size = panel_size if panel_size is not None else config.runtime.panel_size
    seed = seed if seed is not None else config.runtime.seed
    grid = grid if grid is not None else full_grid()
    q_schedule = list(q_schedule) if q_schedule is not None else list(range(1, 9))
    r2_min = config.tolerance.r2_min

    best_by_q: Dict[int, float] = {}
    all_good = True
    for q in q_schedule:
        panel = make_panel(q, panel_size, seed)
        active = _admissible_grid(r, K, panel, grid)
        min_slope = math.inf
        for test in panel:
            for alpha in range(alpha_max + 1):
                slope, r2 = _slope(_panel_samples(r, K, test, alpha, active))
                if math.isnan(slope) or (r2 < r2_min and math.isfinite(slope)):
                    all_good = False
                min_slope = min(min_slope, slope) if not math.isnan(slope) else -math.inf
        best_by_q[q] = min_slope
        if min_slope >= m + NEGLIGIBLE_MARGIN:
            log_verdict("full_negligible", Verdict.YES, f"m={m}, q={q}")
            return VerdictReport(
                operation="full_negligible",
                K=[K.lo, K.hi],
                alpha_max=alpha_max,
                m_max=m,
                verdict=Verdict.YES,
                details={
                    "q": q,
                    "slope": min_slope,
                    "slopes_by_q": best_by_q,
                    "panel": panel_spec(panel, seed).model_dump(),
                },
            )

    plateau = max(best_by_q.values(), default=-math.inf)
    verdict = Verdict.NO if all_good and plateau < m else Verdict.INCONCLUSIVE
    log_verdict("full_negligible", verdict, f"m={m}")
    return VerdictReport(
        operation="full_negligible",
        K=[K.lo, K.hi],
        alpha_max=alpha_max,
        m_max=m,
        verdict=verdict,
        details={"q": None, "slopes_by_q": best_by_q},
    )


def full_moderate(
    r: FullRep,
    K: CompactSet,
    alpha_max: int = 0,
    N_probe: int = 1,
    panel_size: Optional[int] = None,
    seed: Optional[int] = None,
    grid: Optional[EpsGrid] = None,
) -> Verdict:
    return full_moderate_report(r, K, alpha_max, N_probe, panel_size, seed, grid).verdict


def full_negligible(
    r: FullRep,
    K: CompactSet,
    alpha_max: int = 0,
    m: int = 2,
    q_schedule: Optional[Sequence[int]] = None,
    panel_size: Optional[int] = None,
    seed: Optional[int] = None,
    grid: Optional[EpsGrid] = None,
) -> Verdict:
    return full_negligible_report(r, K, alpha_max, m, q_schedule, panel_size, seed, grid).verdict
