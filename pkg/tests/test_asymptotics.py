"""ε 网格、对数域网与阶估计"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfcalc.models import Verdict, verdict_and
from gfcalc.services.asymptotics import (
    EPS,
    EpsGrid,
    LogValue,
    Net,
    ZERO_LOG,
    default_grid,
    estimate_order,
    is_moderate,
    is_negligible,
    tends_to_zero,
)
from gfcalc.utils.exceptions import InsufficientSamplesError, ParameterValidationError


class TestGrid:
    def test_default_grid_is_dyadic(self):
        g = default_grid(1, 8)
        assert g.values[:4] == (0.5, 0.25, 0.125, 0.0625)
        assert len(g) == 8
        assert g.values[-1] == 2.0 ** -8

    @pytest.mark.parametrize("k_min,k_max", [(0, 5), (5, 5), (3, 61), (1, 4)])
    def test_default_grid_rejects_bad_range(self, k_min, k_max):
        with pytest.raises(ParameterValidationError):
            default_grid(k_min, k_max)

    def test_grid_must_be_strictly_decreasing(self):
        values = [2.0 ** -k for k in range(1, 9)]
        values[3] = values[2]
        with pytest.raises(ParameterValidationError):
            EpsGrid(tuple(values))

    @pytest.mark.parametrize("count", [1, 4, 7])
    def test_grid_needs_eight_points(self, count):
        with pytest.raises(ParameterValidationError, match="8"):
            EpsGrid(tuple(2.0 ** -k for k in range(1, count + 1)))

    def test_below(self):
        tail = default_grid(1, 16).below(0.004)
        assert tail.values[0] == 2.0 ** -8
        assert len(tail) == 9
        with pytest.raises(ParameterValidationError):
            default_grid(1, 12).below(0.004)


class TestLogValue:
    def test_cancellation_is_exact_zero(self):
        assert LogValue.of(2.0) + LogValue.of(-2.0) == ZERO_LOG

    def test_product_sign(self):
        assert (LogValue.of(3.0) * LogValue.of(-2.0)).value == pytest.approx(-6.0)

    def test_huge_values_stay_finite_in_log(self):
        v = LogValue(1, 1e6)
        assert v.value == math.inf
        assert (v / v).value == pytest.approx(1.0)

    def test_exp_of_minus_infinity_is_zero(self):
        assert LogValue.of(-math.inf).exp() == ZERO_LOG

    def test_ordering(self):
        assert LogValue.of(-5.0) < LogValue.of(-1.0) < ZERO_LOG < LogValue.of(0.5)

    def test_nan_rejected(self):
        with pytest.raises(ParameterValidationError):
            LogValue.of(float("nan"))


class TestNet:
    def test_memoized_per_eps(self):
        calls = []

        def rule(eps):
            calls.append(eps)
            return eps

        net = Net.from_real(rule)
        assert net(0.25) == net(0.25)
        assert calls == [0.25]

    def test_arithmetic(self):
        net = (EPS * 2.0 + 1.0) / EPS
        assert net(0.5) == pytest.approx(4.0)

    def test_min_max_positive_part(self):
        assert EPS.minimum(0.1)(0.5) == pytest.approx(0.1)
        assert EPS.maximum(0.1)(0.5) == pytest.approx(0.5)
        assert (-EPS).positive_part()(0.5) == 0.0

    def test_flushed(self):
        net = Net.power(20.0).flushed(1e-13)
        assert net(2.0 ** -10) == 0.0
        assert net(0.5) > 0.0


class TestEstimateOrder:
    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
    def test_pure_power_slope(self, m):
        report = estimate_order(Net.power(m).samples(default_grid(1, 40)))
        assert report.slope == pytest.approx(m, abs=1e-9)
        assert report.r2 == pytest.approx(1.0)

    def test_vanishing_net_has_infinite_slope(self, grid):
        report = estimate_order(Net.constant(0.0).samples(grid))
        assert report.slope == math.inf

    def test_insufficient_samples(self):
        with pytest.raises(InsufficientSamplesError):
            estimate_order(EPS.samples(default_grid(1, 8)), window=3)


class TestClassifiers:
    def test_negative_power_is_moderate(self, grid):
        assert is_moderate(Net.power(-3.0).samples(grid), N_cap=50) is Verdict.YES

    def test_power_above_cap_is_not_moderate(self, grid):
        assert is_moderate(Net.power(-3.0).samples(grid), N_cap=2) is Verdict.NO

    def test_exp_inverse_eps_is_not_moderate(self, grid):
        assert is_moderate((1.0 / EPS).exp().samples(grid)) is Verdict.NO

    def test_high_power_is_negligible(self, grid):
        assert is_negligible(Net.power(9.0).samples(grid), m_max=8) is Verdict.YES

    def test_low_power_is_not_negligible(self, grid):
        assert is_negligible(Net.power(3.0).samples(grid), m_max=8) is Verdict.NO

    def test_exp_minus_inverse_eps_is_negligible(self, grid):
        assert is_negligible((-1.0 / EPS).exp().samples(grid)) is Verdict.YES

    def test_m_max_must_be_at_least_two(self, grid):
        with pytest.raises(ParameterValidationError):
            is_negligible(EPS.samples(grid), m_max=1)

    def test_slow_log_decay_tends_to_zero(self, grid):
        net = 1.0 / (1.0 / EPS).log()
        assert tends_to_zero(net.samples(grid)) is Verdict.YES
        assert is_negligible(net.samples(grid)) is Verdict.NO

    def test_constant_does_not_tend_to_zero(self, grid):
        assert tends_to_zero(Net.constant(1.0).samples(grid)) is Verdict.NO

    def test_power_tends_to_zero(self, grid):
        assert tends_to_zero(EPS.samples(grid)) is Verdict.YES


def test_verdict_and():
    assert verdict_and(Verdict.YES, Verdict.YES) is Verdict.YES
    assert verdict_and(Verdict.YES, Verdict.INCONCLUSIVE) is Verdict.INCONCLUSIVE
    assert verdict_and(Verdict.INCONCLUSIVE, Verdict.NO) is Verdict.NO


# ============================================================
# 不变量
# ============================================================

GRID_40 = default_grid(1, 40)
GRID_52 = default_grid(1, 52)

_WIGGLE = Net.from_real(lambda e: (2.0 + math.sin(1.0 / e)) / 3.0, "(2+sin(1/eps))/3")

orders = st.sampled_from([-3.0, -1.0, 0.0, 0.5, 1.0, 2.5, 9.0, 11.0])
scales = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False).flatmap(
    lambda c: st.sampled_from([c, -c])
)


def _base_net(m: float, wiggle: bool) -> Net:
    net = Net.power(m)
    return net * _WIGGLE if wiggle else net


class TestInvariants:
    @settings(max_examples=40, deadline=None)
    @given(orders, scales, st.booleans())
    def test_scaling_keeps_order_and_verdicts(self, m, c, wiggle):
        x = _base_net(m, wiggle)
        scaled = c * x
        assert estimate_order(scaled.samples(GRID_40)).slope == pytest.approx(
            estimate_order(x.samples(GRID_40)).slope, abs=1e-9
        )
        assert is_moderate(scaled.samples(GRID_40)) is is_moderate(x.samples(GRID_40))
        assert is_negligible(scaled.samples(GRID_40)) is is_negligible(x.samples(GRID_40))

    @settings(max_examples=40, deadline=None)
    @given(orders, orders, st.booleans(), st.booleans())
    def test_product_adds_orders(self, a, b, wiggle_x, wiggle_y):
        x, y = _base_net(a, wiggle_x), _base_net(b, wiggle_y)
        slope_x = estimate_order(x.samples(GRID_40)).slope
        slope_y = estimate_order(y.samples(GRID_40)).slope
        slope_xy = estimate_order((x * y).samples(GRID_40)).slope
        assert slope_xy == pytest.approx(slope_x + slope_y, abs=1e-8)

    @settings(max_examples=40, deadline=None)
    @given(
        st.floats(min_value=9.0, max_value=14.0),
        st.floats(min_value=0.0, max_value=3.0),
        st.booleans(),
    )
    def test_dominated_by_negligible_is_negligible(self, m, k, wiggle):
        y = Net.power(m)
        x = y * Net.power(k)
        if wiggle:
            x = x * _WIGGLE
        assert is_negligible(y.samples(GRID_40)) is Verdict.YES
        assert is_negligible(x.samples(GRID_40)) is Verdict.YES

    @settings(max_examples=20, deadline=None)
    @given(
        st.sampled_from(
            [
                Net.power(9.0),
                Net.power(0.5),
                Net.power(8.4),
                Net.power(-3.0),
                EPS * Net.from_real(lambda e: math.sin(1.0 / e), "sin(1/eps)"),
                EPS * Net.from_real(lambda e: (1.0 + math.sin(1.0 / e)) / 2.0, "(1+sin(1/eps))/2"),
                (-1.0 / EPS).exp(),
                (1.0 / EPS).exp(),
                1.0 / (1.0 / EPS).log(),
            ]
        )
    )
    def test_refined_grid_keeps_verdicts(self, net):
        coarse, fine = net.samples(GRID_40), net.samples(GRID_52)
        assert is_moderate(coarse) is is_moderate(fine)
        assert is_negligible(coarse) is is_negligible(fine)
