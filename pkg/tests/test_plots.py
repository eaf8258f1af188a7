"""参数族的支撑分类"""

import pytest

from gfcalc.models import Verdict
from gfcalc.services.plots import (
    KApply,
    KConst,
    KProd,
    KQuot,
    KSum,
    KVar,
    PlotClass,
    PlotFamily,
    locally_uniform_bounded,
    plot_report,
    plot_verdict,
    plot_verdict_K,
    pointwise_bounded,
    sample_parameters,
    support_slice,
    uniform_bounded,
)
from gfcalc.services.smoothfn import EMPTY, CompactSet, OpenInterval
from gfcalc.utils.exceptions import ParameterValidationError

U, X = KVar("u"), KVar("x")


def translated_bump(U_interval=OpenInterval(-1.0, 1.0)):
    """bump(x - u)"""
    return PlotFamily(KApply("bump", KSum((X, KProd((KConst(-1.0), U))))), U_interval, label="bump(x-u)")


def dilated_bump(U_interval=OpenInterval(0.0, 1.0)):
    """bump(u·x)"""
    return PlotFamily(KApply("bump", KProd((U, X))), U_interval, label="bump(u*x)")


def growing_sine():
    """sin(x)·(1+u)"""
    return PlotFamily(KProd((KApply("sin", X), KSum((KConst(1.0), U)))), OpenInterval(0.0, 1.0), label="sin")


class TestSlices:
    def test_translated_support(self):
        support = support_slice(translated_bump(), 0.25)
        assert support.lo == pytest.approx(-0.75, abs=1e-9)
        assert support.hi == pytest.approx(1.25, abs=1e-9)

    def test_dilated_support(self):
        support = support_slice(dilated_bump(), 0.01)
        assert support.lo == pytest.approx(-100.0, rel=1e-9)
        assert support.hi == pytest.approx(100.0, rel=1e-9)

    def test_zero_kernel_has_empty_support(self):
        family = PlotFamily(KConst(0.0), OpenInterval(0.0, 1.0))
        assert support_slice(family, 0.5) == EMPTY

    def test_parameter_outside_U_rejected(self):
        with pytest.raises(ParameterValidationError):
            support_slice(dilated_bump(), 1.5)

    def test_slice_matches_kernel(self):
        family = translated_bump()
        fn = family.slice_at(0.3)
        assert fn(0.3) == pytest.approx(family.kernel.evaluate(0.3, [0.3])[0])

    def test_divisor_must_not_depend_on_x(self):
        with pytest.raises(ParameterValidationError):
            KQuot(KConst(1.0), X)

    def test_parameter_samples_reach_edges(self):
        us = sample_parameters(dilated_bump(), 5)
        assert min(us) == pytest.approx(0.001)
        assert max(us) == pytest.approx(0.999)


class TestClassification:
    def test_translated_bump_is_plot(self):
        assert plot_verdict(translated_bump(), samples=5) is PlotClass.PLOT_OF_D

    def test_dilated_bump_is_pointwise_only(self):
        report = plot_report(dilated_bump(), samples=5)
        assert report.pointwise is Verdict.YES
        assert report.classification is PlotClass.POINTWISE_ONLY

    def test_growing_sine_is_not_pointwise(self):
        assert pointwise_bounded(growing_sine(), samples=5) is Verdict.NO
        assert plot_verdict(growing_sine(), samples=5) is PlotClass.NOT_POINTWISE

    def test_local_bound_fails_near_zero_dilation(self):
        assert locally_uniform_bounded(dilated_bump(), 0.001) is Verdict.NO

    def test_local_bound_holds_away_from_zero(self):
        assert locally_uniform_bounded(dilated_bump(), 0.5) is Verdict.YES

    def test_uniform_bound(self):
        assert uniform_bounded(translated_bump()) is Verdict.YES
        assert uniform_bounded(dilated_bump()) is Verdict.NO


class TestCompactTarget:
    def test_translated_family_inside_large_compact(self):
        family = translated_bump(OpenInterval(-0.5, 0.5))
        assert plot_verdict_K(family, CompactSet(-1.5, 1.5), samples=5) is Verdict.YES
        assert plot_verdict_K(family, CompactSet(-1.0, 1.0), samples=5) is Verdict.NO

    def test_shrinking_family(self):
        family = dilated_bump(OpenInterval(1.0, 2.0))
        assert plot_verdict_K(family, CompactSet(-1.0, 1.0), samples=5) is Verdict.YES
        assert plot_verdict_K(family, CompactSet(-0.9, 0.9), samples=5) is Verdict.NO

    def test_compact_outside_omega_rejected(self):
        family = PlotFamily(KApply("bump", X), OpenInterval(0.0, 1.0), omega=OpenInterval(-1.0, 1.0))
        with pytest.raises(ParameterValidationError):
            plot_verdict_K(family, CompactSet(-1.0, 1.0))


def _catalogue_kernel(name, x):
    if name == "translated":
        return KApply("bump", KSum((x, KProd((KConst(-1.0), U)))))
    if name == "dilated":
        return KApply("bump", KProd((U, x)))
    if name == "growing_sine":
        return KProd((KApply("sin", x), KSum((KConst(1.0), U))))
    return KProd((KApply("bump", x), KSum((KConst(1.0), U))))


CATALOGUE = {
    "translated": OpenInterval(-1.0, 1.0),
    "dilated": OpenInterval(0.0, 1.0),
    "growing_sine": OpenInterval(0.0, 1.0),
    "pulsing": OpenInterval(0.0, 1.0),
}
UNIFORM = {"translated": Verdict.YES, "dilated": Verdict.NO, "growing_sine": Verdict.NO, "pulsing": Verdict.YES}


def catalogue_family(name, centre=0.0, U_interval=None):
    """目录中的族，核中的 x 换成 x - centre"""
    x = X if centre == 0.0 else KSum((X, KConst(-centre)))
    U_interval = U_interval if U_interval is not None else CATALOGUE[name]
    return PlotFamily(_catalogue_kernel(name, x), U_interval, label=f"{name}@{centre:g}")


def _middle(interval, lo_frac, hi_frac):
    width = interval.hi - interval.lo
    return OpenInterval(interval.lo + lo_frac * width, interval.lo + hi_frac * width)


class TestImplications:
    @pytest.mark.parametrize("name", list(CATALOGUE))
    def test_uniform_implies_local(self, name):
        family = catalogue_family(name)
        assert uniform_bounded(family) is UNIFORM[name]
        if UNIFORM[name] is Verdict.YES:
            for u0 in sample_parameters(family, 3):
                assert locally_uniform_bounded(family, u0) is Verdict.YES

    @pytest.mark.parametrize("name", list(CATALOGUE))
    def test_local_implies_pointwise(self, name):
        family = catalogue_family(name)
        for u0 in sample_parameters(family, 3):
            if locally_uniform_bounded(family, u0) is Verdict.YES:
                support = support_slice(family, u0)
                assert family.omega.contains_compact(support)

    @pytest.mark.parametrize("name", list(CATALOGUE))
    def test_plot_class_implies_pointwise(self, name):
        family = catalogue_family(name)
        report = plot_report(family, samples=3)
        if report.classification in (PlotClass.PLOT_OF_D, PlotClass.POINTWISE_ONLY):
            assert report.pointwise is Verdict.YES
        if report.classification is PlotClass.PLOT_OF_D:
            assert all(v is Verdict.YES for v in report.local.values())


class TestRestriction:
    @pytest.mark.parametrize("name", list(CATALOGUE))
    @pytest.mark.parametrize("fractions", [(0.25, 0.75), (0.5, 1.0), (0.0, 0.5)])
    def test_bounds_survive_smaller_parameter_set(self, name, fractions):
        full = catalogue_family(name)
        sub = catalogue_family(name, U_interval=_middle(full.U, *fractions))
        if pointwise_bounded(full, samples=5) is Verdict.YES:
            assert pointwise_bounded(sub, samples=5) is Verdict.YES
        if uniform_bounded(full) is Verdict.YES:
            assert uniform_bounded(sub) is Verdict.YES
        K = CompactSet(-3.0, 3.0)
        if plot_verdict_K(full, K, samples=5) is Verdict.YES:
            assert plot_verdict_K(sub, K, samples=5) is Verdict.YES

    def test_dilation_away_from_zero_is_uniform(self):
        sub = catalogue_family("dilated", U_interval=OpenInterval(0.5, 1.0))
        assert uniform_bounded(sub) is Verdict.YES


class TestTranslation:
    @pytest.mark.parametrize("name", list(CATALOGUE))
    @pytest.mark.parametrize("centre", [0.7, -2.5])
    def test_verdicts_do_not_move(self, name, centre):
        base, moved = catalogue_family(name), catalogue_family(name, centre)
        assert pointwise_bounded(moved, samples=5) is pointwise_bounded(base, samples=5)
        assert uniform_bounded(moved) is uniform_bounded(base)
        u0 = sample_parameters(base, 1)[0]
        assert locally_uniform_bounded(moved, u0) is locally_uniform_bounded(base, u0)

    @pytest.mark.parametrize("name", ["translated", "dilated", "pulsing"])
    @pytest.mark.parametrize("centre", [0.7, -2.5])
    def test_supports_shift_with_centre(self, name, centre):
        base, moved = catalogue_family(name), catalogue_family(name, centre)
        for u in sample_parameters(base, 3):
            a, b = support_slice(base, u), support_slice(moved, u)
            assert b.lo == pytest.approx(a.lo + centre, rel=1e-9, abs=1e-9)
            assert b.hi == pytest.approx(a.hi + centre, rel=1e-9, abs=1e-9)

    @pytest.mark.parametrize("centre", [0.7, -2.5])
    def test_compact_target_moves_with_centre(self, centre):
        U_interval = OpenInterval(-0.5, 0.5)
        base = catalogue_family("translated", U_interval=U_interval)
        moved = catalogue_family("translated", centre, U_interval)
        for lo, hi in [(-1.5, 1.5), (-1.0, 1.0)]:
            expected = plot_verdict_K(base, CompactSet(lo, hi), samples=5)
            assert plot_verdict_K(moved, CompactSet(lo + centre, hi + centre), samples=5) is expected
