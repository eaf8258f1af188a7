"""
数值积分模块
复合Gauss-Legendre求积：固定分级规则（用于卷积与原函数节点的向量化求值）
以及带面板二分的自适应规则（用于积分、矩与配对）
"""

from functools import lru_cache
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from scipy.special import roots_legendre

from ..config import config
from ..utils.exceptions import ParameterValidationError, QuadratureDepthError
from ..utils.logger import log_numerical_event, quad_logger

GL_POINTS = 15

VectorFn = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=None)
def gauss_legendre(n: int = GL_POINTS) -> Tuple[np.ndarray, np.ndarray]:
    """[-1,1] 上的 n 点 Gauss-Legendre 节点与权重"""
    nodes, weights = roots_legendre(n)
    return np.asarray(nodes), np.asarray(weights)


@lru_cache(maxsize=None)
def graded_breaks(levels: int = 12, interior: int = 4) -> Tuple[float, ...]:
    """[-1,1] 上向两端几何加密的面板分点

    端点处 bump 类函数具有本性奇点式的平坦性，几何分级保证每个面板上
    奇点到面板的相对距离有界，从而 GL15 在每个面板上指数收敛。
    """
    inner = np.linspace(-0.5, 0.5, interior + 1)
    right = [1.0 - 2.0 ** (-j) for j in range(2, levels + 1)]
    points = sorted(set([-1.0, 1.0] + list(inner) + right + [-r for r in right]))
    return tuple(points)


@lru_cache(maxsize=None)
def graded_rule(levels: int = 12, interior: int = 4) -> Tuple[np.ndarray, np.ndarray]:
    """[-1,1] 上的分级复合规则（节点、权重）"""
    breaks = np.asarray(graded_breaks(levels, interior))
    nodes, weights = gauss_legendre()
    left, right = breaks[:-1], breaks[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    w = (half[:, None] * weights[None, :]).ravel()
    return x, w


def mapped_rule(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """把分级规则映射到 [a_i, b_i]，返回形状 (len(a), m) 的节点与权重"""
    ref_x, ref_w = graded_rule()
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[:, None] + half[:, None] * ref_x[None, :]
    w = half[:, None] * ref_w[None, :]
    return x, w


def fixed_integral(func: VectorFn, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """对每一对 (a_i, b_i) 用分级规则求 ∫_{a_i}^{b_i} func"""
    x, w = mapped_rule(a, b)
    values = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return np.sum(values * w, axis=1)


def _gl_panels(func: VectorFn, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    nodes, weights = gauss_legendre()
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    values = np.asarray(func(x.ravel()), dtype=float).reshape(x.shape)
    return np.sum(values * weights[None, :], axis=1) * half


def initial_panels(
    a: float, b: float, critical: Iterable[Tuple[float, float]] = ()
) -> List[Tuple[float, float]]:
    """按关键区间切分 [a,b]；关键区间内部使用分级面板"""
    cuts = {a, b}
    graded = []
    for lo, hi in critical:
        lo, hi = max(lo, a), min(hi, b)
        if hi <= lo:
            continue
        cuts.update((lo, hi))
        graded.append((lo, hi))
    points = sorted(cuts)
    panels: List[Tuple[float, float]] = []
    ref = np.asarray(graded_breaks())
    for left, right in zip(points[:-1], points[1:]):
        if right <= left:
            continue
        if any(lo <= left and right <= hi for lo, hi in graded):
            inner = left + (ref + 1.0) * 0.5 * (right - left)
            panels.extend(zip(inner[:-1], inner[1:]))
        else:
            inner = np.linspace(left, right, 5)
            panels.extend(zip(inner[:-1], inner[1:]))
    return [(float(l), float(r)) for l, r in panels if r > l]


def adaptive_integral(
    func: VectorFn,
    a: float,
    b: float,
    tol: float = None,
    critical: Sequence[Tuple[float, float]] = (),
    max_depth: int = None,
) -> float:
    """自适应复合 Gauss-Legendre 积分

    每一层对未收敛面板二分，当 GL15 整体值与两半之和的差小于该面板
    按宽度分摊的容差 tol·(1+|I|) 时接受。
    """
    if tol is None:
        tol = config.tolerance.quad_tol
    if max_depth is None:
        max_depth = config.tolerance.quad_max_depth
    if tol <= 0:
        raise ParameterValidationError("tol", "必须为正数")
    if b < a:
        raise ParameterValidationError("a,b", f"要求 a ≤ b，收到 a={a}, b={b}")
    if b == a:
        return 0.0

    panels = np.asarray(initial_panels(a, b, critical), dtype=float)
    left, right = panels[:, 0], panels[:, 1]
    coarse = _gl_panels(func, left, right)
    total_width = b - a
    accepted = 0.0
    estimate = float(np.sum(coarse))
    achieved = float("inf")

    for _ in range(max_depth + 1):
        mid = 0.5 * (left + right)
        lhalf = _gl_panels(func, left, mid)
        rhalf = _gl_panels(func, mid, right)
        fine = lhalf + rhalf
        estimate = accepted + float(np.sum(fine))
        budget = tol * (1.0 + abs(estimate)) * (right - left) / total_width
        done = np.abs(fine - coarse) <= budget
        accepted += float(np.sum(fine[done]))
        if np.all(done):
            return accepted
        keep = ~done
        achieved = float(np.sum(np.abs(fine - coarse)[keep]))
        left = np.concatenate([left[keep], mid[keep]])
        right = np.concatenate([mid[keep], right[keep]])
        coarse = np.concatenate([lhalf[keep], rhalf[keep]])

    log_numerical_event(
        quad_logger, "adaptive_integral", "超过最大深度", f"[{a}, {b}], 误差 {achieved:.3e}"
    )
    raise QuadratureDepthError(estimate, achieved, max_depth)
