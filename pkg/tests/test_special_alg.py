"""特殊 Colombeau 代数：嵌入、适度性/可忽略性、求值与关联"""

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gfcalc.models import Verdict
from gfcalc.services.asymptotics import EPS, Net, estimate_order
from gfcalc.services.distributions import DELTA, HEAVISIDE, ZERO_DIST, regular
from gfcalc.services.gnum import GenNumber, eq_tilde, make_point
from gfcalc.services.mollifier import make_schedule, scaled_at
from gfcalc.services.smoothfn import (
    COS,
    EXP,
    ID,
    REAL_LINE,
    SIN,
    Affine,
    CompactSet,
    Const,
    IntPow,
    OpenInterval,
    compose,
    polynomial,
    sup_abs_on,
)
from gfcalc.services.smoothfn import mul as fn_mul
from gfcalc.services.special_alg import (
    GenFunction,
    association_report,
    associates_to,
    compose_cbounded,
    eq_in_Gs,
    eval_at,
    half_crossing_point,
    iota,
    is_cbounded,
    moderate_report,
    negligible_on,
    partial,
    restrict,
    sigma,
    smooth_compose,
    sup_net,
)
from gfcalc.utils.exceptions import (
    CBoundedWitnessError,
    OmegaMismatchError,
    ParameterValidationError,
)

K = CompactSet(-1.0, 1.0)
ORIGIN = CompactSet(-0.5, 0.5)


@pytest.fixture(scope="module")
def iota_delta(schedule):
    return iota(DELTA, schedule)


@pytest.fixture(scope="module")
def iota_h(schedule):
    return iota(HEAVISIDE, schedule)


class TestEmbedding:
    def test_delta_is_moderate_with_scaling_slopes(self, iota_delta):
        report = moderate_report(iota_delta, K, alpha_max=2)
        assert report.verdict is Verdict.YES
        for entry in report.per_alpha:
            assert entry.slope == pytest.approx(-1.0 - entry.alpha, abs=0.1)

    def test_delta_at_origin_is_infinite(self, iota_delta):
        point = make_point(Net.constant(0.0), ORIGIN, REAL_LINE)
        value = eval_at(iota_delta, point)
        assert estimate_order(value.samples()).slope == pytest.approx(-1.0, abs=0.05)

    def test_smooth_embedding_is_negligible_against_constant_net(self):
        f_iota = iota(regular(SIN), make_schedule(10))
        assert eq_in_Gs(f_iota, sigma(SIN), K, alpha_max=2, m_max=8) is Verdict.YES

    def test_polynomial_reproduction(self, schedule):
        cube = IntPow(ID, 3)
        u = iota(regular(cube), schedule)
        xs = np.linspace(-1.0, 1.0, 21)
        for k in range(12, 20):
            eps = 2.0 ** -k
            assert np.max(np.abs(u.rep(eps)(xs) - xs**3)) <= 1e-7

    def test_derivative_commutes_with_embedding(self, iota_h, iota_delta):
        for k in (1, 5, 10, 20, 30):
            eps = 2.0 ** -k
            diff = partial(iota_h).rep(eps) - iota_delta.rep(eps)
            assert sup_abs_on(diff, K) <= 1e-9

    def test_sigma_difference_is_zero(self):
        assert negligible_on(sigma(SIN) - sigma(SIN), K) is Verdict.YES


class TestHeavisideProducts:
    def test_square_differs_from_heaviside(self, iota_h):
        square = iota_h * iota_h
        assert eq_in_Gs(square, iota_h, K) is Verdict.NO
        net = sup_net(square - iota_h, K, 0)
        for k in (1, 2, 3, 5, 7):
            assert net(2.0 ** -k) == pytest.approx(0.25, abs=1e-6)
        for k in (12, 20, 30):
            assert net(2.0 ** -k) >= 0.25 - 1e-6

    def test_square_associates_to_heaviside(self, iota_h):
        report = association_report(iota_h * iota_h, HEAVISIDE)
        assert report.verdict is Verdict.YES
        assert min(report.details["slopes"]) >= 0.9

    def test_x_times_delta_associates_to_zero(self, iota_delta):
        report = association_report(sigma(ID) * iota_delta, ZERO_DIST)
        assert report.verdict is Verdict.YES
        assert min(report.details["slopes"]) >= 1.9

    @pytest.mark.parametrize("w", [ZERO_DIST, DELTA, HEAVISIDE])
    def test_delta_square_has_no_associate(self, iota_delta, w):
        assert associates_to(iota_delta * iota_delta, w) is Verdict.NO

    def test_half_crossing_point(self, iota_h):
        point = half_crossing_point(iota_h)
        assert abs(point(2.0 ** -10)) <= 1e-9
        value = eval_at(iota_h * iota_h - iota_h, point)
        assert value(2.0 ** -10) == pytest.approx(-0.25, abs=1e-9)


class TestEvaluation:
    @settings(max_examples=20, deadline=None)
    @given(
        st.sampled_from([SIN, COS, EXP, polynomial([1.0, -2.0, 0.5])]),
        st.floats(min_value=-0.4, max_value=0.4),
    )
    def test_constant_embedding_evaluates_to_value(self, f, x0):
        point = make_point(Net.constant(x0), ORIGIN, REAL_LINE)
        value = eval_at(sigma(f), point)
        assert eq_tilde(value, GenNumber.from_real(f(x0), value.grid)) is Verdict.YES

    def test_ring_morphism(self, iota_h):
        point = make_point(Net.from_real(lambda eps: 0.3 * eps), ORIGIN, REAL_LINE)
        u, v = iota_h, sigma(COS)
        product = eval_at(u * v, point)
        separate = eval_at(u, point) * eval_at(v, point)
        total = eval_at(u + v, point)
        for k in (3, 9, 17):
            eps = 2.0 ** -k
            assert product(eps) == pytest.approx(separate(eps), rel=1e-12)
            assert total(eps) == pytest.approx(eval_at(u, point)(eps) + eval_at(v, point)(eps), rel=1e-12)

    def test_delta_at_moving_point(self, iota_delta, schedule):
        point = make_point(EPS * 0.5, ORIGIN, REAL_LINE)
        value = eval_at(iota_delta, point)
        for k in (1, 4, 12, 25):
            eps = 2.0 ** -k
            assert value(eps) == pytest.approx(scaled_at(schedule, eps)(eps / 2), rel=1e-12, abs=1e-12)


class TestCBounded:
    def test_sine_is_cbounded(self):
        report = is_cbounded(sigma(SIN), K, OpenInterval(-2.0, 2.0))
        assert report.verdict is Verdict.YES
        assert report.witness.lo >= -1.0 and report.witness.hi <= 1.0

    def test_compose_with_witness(self):
        w = compose_cbounded(sigma(EXP, OpenInterval(-2.0, 2.0)), sigma(SIN), K)
        assert w.rep(0.25)(0.5) == pytest.approx(np.exp(np.sin(0.5)))

    def test_delta_is_not_cbounded_into_small_interval(self, iota_delta):
        assert is_cbounded(iota_delta, K, OpenInterval(-1.0, 2.0)).verdict is Verdict.NO
        with pytest.raises(CBoundedWitnessError):
            compose_cbounded(sigma(EXP, OpenInterval(-1.0, 2.0)), iota_delta, K)


class TestStructure:
    def test_omega_mismatch(self):
        with pytest.raises(OmegaMismatchError):
            sigma(SIN) + sigma(SIN, OpenInterval(-2.0, 2.0))

    def test_restrict_to_larger_set_rejected(self):
        with pytest.raises(ParameterValidationError):
            restrict(sigma(SIN, OpenInterval(-1.0, 1.0)), OpenInterval(-2.0, 2.0))

    def test_compact_outside_omega_rejected(self):
        with pytest.raises(ParameterValidationError):
            moderate_report(sigma(SIN, OpenInterval(-1.0, 1.0)), K)

    def test_negative_derivative_order(self):
        with pytest.raises(ParameterValidationError):
            partial(sigma(SIN), -1)

    def test_smooth_compose(self):
        u = smooth_compose(SIN, sigma(ID))
        assert u.rep(0.5)(0.3) == pytest.approx(np.sin(0.3))
        v = smooth_compose(lambda a, b: a * b, sigma(SIN), sigma(COS))
        assert v.rep(0.5)(0.3) == pytest.approx(np.sin(0.3) * np.cos(0.3))

    def test_smooth_compose_arity(self):
        with pytest.raises(ParameterValidationError):
            smooth_compose(SIN, sigma(ID), sigma(ID))


def _tiny_wiggle(omega=REAL_LINE):
    """ε ↦ ε¹⁰·sin(x/ε)：𝒩ˢ 中的元素"""
    return GenFunction(
        omega, lambda eps: fn_mul(Const(eps**10), compose(SIN, Affine(1.0 / eps, 0.0))), "ε¹⁰sin(x/ε)"
    )


class TestQuotient:
    def test_wiggle_is_negligible(self):
        assert negligible_on(_tiny_wiggle(), K, alpha_max=2) is Verdict.YES

    @pytest.mark.parametrize("name", ["cos", "sine", "heaviside", "delta"])
    def test_class_verdicts_ignore_negligible_change(self, name, iota_h, iota_delta):
        u = {"cos": sigma(COS), "sine": iota(regular(SIN)), "heaviside": iota_h, "delta": iota_delta}[name]
        shifted = u + _tiny_wiggle()
        assert moderate_report(shifted, K).verdict is moderate_report(u, K).verdict
        assert negligible_on(shifted, K) is negligible_on(u, K)

    @pytest.mark.parametrize("alpha_max", [0, 1, 2])
    def test_smooth_representatives_stay_equal(self, alpha_max):
        u = iota(regular(SIN))
        assert eq_in_Gs(u + _tiny_wiggle(), u, K, alpha_max=alpha_max) is Verdict.YES

    @pytest.mark.parametrize(
        "net",
        [Net.constant(0.2), Net.from_real(lambda eps: 0.3 * eps), Net.from_real(lambda eps: -0.4 + eps**2)],
    )
    def test_point_values_ignore_negligible_change(self, net, iota_h):
        point = make_point(net, ORIGIN, REAL_LINE)
        for u in (sigma(COS), iota_h, iota(regular(SIN))):
            assert eq_tilde(eval_at(u + _tiny_wiggle(), point), eval_at(u, point)) is Verdict.YES

    def test_association_ignores_negligible_change(self, iota_h, iota_delta):
        assert associates_to(iota_h * iota_h + _tiny_wiggle(), HEAVISIDE) is Verdict.YES
        assert associates_to(iota_delta * iota_delta + _tiny_wiggle(), DELTA) is Verdict.NO


class TestLinearity:
    @settings(max_examples=15, deadline=None)
    @given(
        st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
        st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
        st.floats(min_value=-2.0, max_value=2.0, allow_nan=False),
    )
    def test_embedding_is_linear(self, a, b, c):
        schedule = make_schedule(4)
        w = a * HEAVISIDE + b * DELTA + c * regular(SIN)
        lhs = iota(w, schedule)
        rhs = a * iota(HEAVISIDE, schedule) + b * iota(DELTA, schedule) + c * iota(regular(SIN), schedule)
        xs = np.linspace(-1.0, 1.0, 41)
        for k in (1, 6, 14, 25):
            eps = 2.0 ** -k
            scale = 1.0 + abs(b) / eps
            assert np.allclose(lhs.rep(eps)(xs), rhs.rep(eps)(xs), rtol=1e-10, atol=1e-10 * scale)

    @settings(max_examples=10, deadline=None)
    @given(st.floats(min_value=-2.0, max_value=2.0, allow_nan=False), st.floats(min_value=-2.0, max_value=2.0))
    def test_bounded_combination_equal_in_algebra(self, a, c):
        lhs = iota(a * HEAVISIDE + c * regular(COS))
        rhs = a * iota(HEAVISIDE) + c * iota(regular(COS))
        assert eq_in_Gs(lhs, rhs, K, alpha_max=0) is Verdict.YES


class TestPointSeparation:
    @settings(max_examples=20, deadline=None)
    @given(st.floats(min_value=-0.5, max_value=0.5))
    def test_standard_points_separate_smooth_functions(self, x0):
        assume(abs(np.sin(x0) - np.cos(x0)) > 0.05)
        point = make_point(Net.constant(x0), ORIGIN, REAL_LINE)
        assert eq_tilde(eval_at(sigma(SIN), point), eval_at(sigma(COS), point)) is Verdict.NO

    @pytest.mark.parametrize("x0", [-0.5, -0.1, 0.25, 0.5])
    def test_delta_vanishes_at_standard_points_off_origin(self, iota_delta, x0):
        point = make_point(Net.constant(x0), ORIGIN, REAL_LINE)
        value = eval_at(iota_delta, point)
        assert eq_tilde(value, GenNumber.from_real(0.0, value.grid)) is Verdict.YES

    def test_delta_separated_from_zero_at_origin(self, iota_delta):
        point = make_point(Net.constant(0.0), ORIGIN, REAL_LINE)
        value = eval_at(iota_delta, point)
        assert eq_tilde(value, GenNumber.from_real(0.0, value.grid)) is Verdict.NO
