"""消失矩磨光子与分段磨光子网"""

import numpy as np
import pytest

from gfcalc.config import overridden
from gfcalc.models import Verdict
from gfcalc.services.asymptotics import default_grid
from gfcalc.services.mollifier import (
    MASS_TOL,
    MOMENT_TOL,
    load_net,
    make_moment_mollifier,
    make_schedule,
    mollifier_at,
    save_net,
    scaled_at,
    verify_properties,
)
from gfcalc.services.distributions import convolve_smooth, regular
from gfcalc.services.smoothfn import CompactSet, IntPow, ID, Interval, moments, scale_S
from gfcalc.utils.exceptions import ParameterValidationError, ParseException


@pytest.mark.parametrize("q", range(0, 9))
def test_moment_conditions(q):
    psi = make_moment_mollifier(q)
    values = moments(psi.fn, max(q, 1))
    assert values[0] == pytest.approx(1.0, abs=MASS_TOL)
    for k in range(1, q + 1):
        assert abs(values[k]) <= MOMENT_TOL
    assert psi.fn.support == Interval(-1.0, 1.0)


def test_q2_moments_vanish_through_second_order():
    values = moments(make_moment_mollifier(2).fn, 2)
    assert values == pytest.approx([1.0, 0.0, 0.0], abs=1e-8)


def test_higher_stage_changes_sign():
    assert make_moment_mollifier(4).l1_mass > 1.0
    assert make_moment_mollifier(0).l1_mass == 1.0


def test_order_above_limit_rejected():
    with pytest.raises(ParameterValidationError):
        make_moment_mollifier(40)


class TestSchedule:
    def test_stage_selection(self, schedule):
        assert schedule.q_max == 6
        assert mollifier_at(schedule, 0.5).q == 0
        assert mollifier_at(schedule, 2.0 ** -4).q == 1
        assert mollifier_at(schedule, 2.0 ** -40).q == 6

    def test_moment_order_grows_as_eps_shrinks(self, schedule, grid):
        orders = [mollifier_at(schedule, eps).q for eps in grid]
        assert orders == sorted(orders)

    def test_thresholds_must_match_q_max(self):
        with pytest.raises(ParameterValidationError):
            make_schedule(2, [0.5])

    def test_thresholds_must_decrease(self):
        with pytest.raises(ParameterValidationError):
            make_schedule(2, [0.25, 0.5])

    def test_eps_must_be_positive(self, schedule):
        with pytest.raises(ParameterValidationError):
            mollifier_at(schedule, 0.0)

    def test_scaled_support(self, schedule):
        assert scaled_at(schedule, 0.125).support == Interval(-0.125, 0.125)


def test_polynomial_reproduction_at_stage_three():
    psi = make_moment_mollifier(3).fn
    K = CompactSet(-1.0, 1.0)
    xs = np.linspace(K.lo, K.hi, 41)
    cube = IntPow(ID, 3)
    for eps in default_grid(1, 12):
        smoothed = convolve_smooth(regular(cube), scale_S(eps, psi))
        assert np.max(np.abs(smoothed(xs) - xs**3)) <= 1e-7


class TestVerify:
    def test_all_stages_pass(self, schedule, short_grid):
        report = verify_properties(schedule, short_grid)
        assert report.passed
        assert all(s.support_ok and s.mass_ok and s.moments_ok for s in report.stages)

    def test_derivative_orders_on_tail(self, schedule, grid):
        report = verify_properties(schedule, grid, alpha_max=2)
        for entry in report.alpha_orders:
            assert entry.slope == pytest.approx(-1.0 - entry.alpha, abs=0.05)
            assert entry.verdict is Verdict.YES

    def test_l1_trajectory_against_eta(self, schedule, short_grid):
        report = verify_properties(schedule, short_grid, eta=0.0, alpha_max=0)
        assert report.l1_ok is False
        loose = verify_properties(schedule, short_grid, eta=100.0, alpha_max=0)
        assert loose.l1_ok is True


class TestPersistence:
    def test_save_is_deterministic(self):
        assert save_net(make_schedule(4)) == save_net(make_schedule(4))

    def test_roundtrip(self):
        net = make_schedule(3)
        again = load_net(save_net(net))
        assert again.thresholds == net.thresholds
        assert save_net(again) == save_net(net)

    def test_invalid_json(self):
        with pytest.raises(ParseException):
            load_net('{"q_max": 1}')

    def test_stage_count_mismatch(self):
        text = save_net(make_schedule(2)).replace('"q_max": 2', '"q_max": 1')
        with pytest.raises((ParseException, ParameterValidationError)):
            load_net(text)


def test_schedule_respects_config_override():
    with overridden(mollifier={"q_max": 2}):
        assert make_schedule().q_max == 2


class TestSymmetry:
    @pytest.mark.parametrize("q", range(0, 9))
    def test_odd_coefficients_vanish(self, q):
        coeffs = make_moment_mollifier(q).coefficients
        bound = 1e-12 * max(abs(c) for c in coeffs)
        assert all(abs(c) <= bound for c in coeffs[1::2])

    @pytest.mark.parametrize("q", range(0, 9))
    def test_mollifier_is_even(self, q):
        fn = make_moment_mollifier(q).fn
        xs = np.linspace(0.0, 1.0, 101)
        assert np.allclose(fn(-xs), fn(xs), rtol=1e-12, atol=1e-12 * float(np.max(np.abs(fn(xs)))))

    def test_every_stage_of_schedule_is_even(self, schedule):
        xs = np.linspace(0.0, 1.0, 51)
        for k in (1, 3, 6, 10, 20):
            psi = mollifier_at(schedule, 2.0**-k).fn
            scale = float(np.max(np.abs(psi(xs))))
            assert np.allclose(psi(-xs), psi(xs), rtol=1e-12, atol=1e-12 * scale)
