"""广义数：环运算、格运算、序与广义点"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfcalc.models import Verdict
from gfcalc.services.asymptotics import EPS, Net, default_grid
from gfcalc.services.gnum import (
    GenNumber,
    approx,
    div,
    eq_tilde,
    inf,
    is_infinitesimal,
    is_invertible,
    is_moderate_number,
    leq,
    make_moderate_point,
    make_point,
    sharp_ball_contains,
    strict_lt,
    sup,
)
from gfcalc.services.smoothfn import REAL_LINE, CompactSet, OpenInterval
from gfcalc.utils.exceptions import (
    InvalidRadiusError,
    NotCompactlySupportedError,
    ParameterValidationError,
)

GRID = default_grid(1, 40)

pure_powers = st.builds(
    lambda c, m: GenNumber(Net.power(m, c), GRID),
    st.sampled_from([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0]),
    st.sampled_from([0.0, 0.5, 1.0, 2.0, 3.0]),
)


def _zero():
    return GenNumber.from_real(0.0, GRID)


class TestLattice:
    @settings(max_examples=100, deadline=None)
    @given(pure_powers, pure_powers)
    def test_min_plus_max_is_sum(self, x, y):
        lhs = inf(x, y) + sup(x, y)
        rhs = x + y
        for eps in GRID:
            assert lhs.net.at(eps) == rhs.net.at(eps)

    @settings(max_examples=100, deadline=None)
    @given(pure_powers, pure_powers, pure_powers)
    def test_order_is_transitive(self, x, y, z):
        if leq(x, y) is Verdict.YES and leq(y, z) is Verdict.YES:
            assert leq(x, z) is Verdict.YES

    @settings(max_examples=100, deadline=None)
    @given(pure_powers, pure_powers)
    def test_antisymmetry_up_to_negligible(self, x, y):
        if leq(x, y) is Verdict.YES and leq(y, x) is Verdict.YES:
            assert eq_tilde(x, y) is Verdict.YES

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=8.5, max_value=30.0), st.floats(min_value=0.1, max_value=10.0))
    def test_negligible_implies_infinitesimal(self, m, c):
        x = GenNumber(Net.power(m, c), GRID)
        assert eq_tilde(x, _zero()) is Verdict.YES
        assert is_infinitesimal(x) is Verdict.YES


class TestOrder:
    def test_eps_below_one(self):
        one = GenNumber.from_real(1.0, GRID)
        eps = GenNumber(EPS, GRID)
        assert leq(eps, one) is Verdict.YES
        assert leq(one, eps) is Verdict.NO

    def test_strict_positivity_of_eps(self):
        assert strict_lt(_zero(), GenNumber(EPS, GRID)) is Verdict.YES

    def test_zero_is_not_strictly_positive(self):
        assert strict_lt(_zero(), _zero()) is Verdict.NO

    def test_high_power_equals_zero(self):
        assert eq_tilde(GenNumber(Net.power(10.0), GRID), _zero(), m_max=8) is Verdict.YES

    def test_exp_minus_inverse_eps_is_not_invertible(self):
        x = GenNumber((-1.0 / EPS).exp(), GRID)
        assert is_invertible(x) is Verdict.NO

    def test_power_is_invertible(self):
        assert is_invertible(GenNumber(Net.power(3.0), GRID)) is Verdict.YES

    def test_isolated_zero_in_tail_is_inconclusive(self):
        x = GenNumber(Net.from_real(lambda eps: 0.0 if eps == 2.0**-38 else eps), GRID)
        assert is_invertible(x) is Verdict.INCONCLUSIVE

    def test_slow_decay_is_infinitesimal_but_not_negligible(self):
        x = GenNumber(1.0 / (1.0 / EPS).log(), GRID)
        assert is_infinitesimal(x) is Verdict.YES
        assert eq_tilde(x, _zero()) is Verdict.NO
        assert approx(x, _zero()) is Verdict.YES

    def test_moderate_numbers(self):
        assert is_moderate_number(GenNumber(Net.power(-5.0), GRID)) is Verdict.YES
        assert is_moderate_number(GenNumber((1.0 / EPS).exp(), GRID)) is Verdict.NO


class TestBallsAndDivision:
    def test_sharp_ball(self):
        rho = GenNumber(Net.power(0.5), GRID)
        y = GenNumber(EPS, GRID)
        assert sharp_ball_contains(_zero(), rho, y) is Verdict.YES

    def test_point_outside_ball(self):
        rho = GenNumber(EPS, GRID)
        y = GenNumber(Net.power(0.5), GRID)
        assert sharp_ball_contains(_zero(), rho, y) is Verdict.NO

    def test_invalid_radius(self):
        with pytest.raises(InvalidRadiusError):
            sharp_ball_contains(_zero(), _zero(), _zero())

    def test_division(self):
        q = div(GenNumber(Net.power(1.0, 6.0), GRID), GenNumber(Net.power(1.0, 2.0), GRID))
        assert q(0.25) == pytest.approx(3.0)

    def test_division_by_zero_rejected(self):
        with pytest.raises(ParameterValidationError):
            div(GenNumber(EPS, GRID), _zero())


class TestPoints:
    def test_constant_point(self):
        p = make_point(Net.constant(0.0), CompactSet(-0.5, 0.5), REAL_LINE, GRID)
        assert p.is_compactly_supported
        assert p.threshold == 1.0

    def test_point_entering_compact_late(self):
        p = make_point(Net.from_real(lambda eps: 4.0 * eps), CompactSet(-0.5, 0.5), REAL_LINE, GRID)
        assert p.threshold == 0.125

    def test_escaping_point_rejected(self):
        with pytest.raises(NotCompactlySupportedError):
            make_point(Net.power(-1.0), CompactSet(-0.5, 0.5), REAL_LINE, GRID)

    def test_compact_must_sit_inside_omega(self):
        with pytest.raises(ParameterValidationError):
            make_point(Net.constant(0.0), CompactSet(-1.0, 1.0), OpenInterval(-1.0, 1.0), GRID)

    def test_moderate_point(self):
        p = make_moderate_point(Net.power(-1.0), REAL_LINE, GRID)
        assert not p.is_compactly_supported

    def test_non_moderate_point_rejected(self):
        with pytest.raises(ParameterValidationError):
            make_moderate_point((1.0 / EPS).exp(), REAL_LINE, GRID)
