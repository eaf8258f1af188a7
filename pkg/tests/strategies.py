"""hypothesis 策略：随机光滑函数表达式树"""

from hypothesis import strategies as st

from gfcalc.services.smoothfn import (
    BUMP,
    COS,
    ID,
    SIN,
    Const,
    IntPow,
    add,
    compose,
    mul,
    polynomial,
    scale_S,
    translate_T,
)

coefficients = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False, allow_infinity=False)
shifts = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
widths = st.floats(min_value=0.3, max_value=2.0, allow_nan=False)
points = st.floats(min_value=-2.5, max_value=2.5, allow_nan=False)


def _bumps():
    return st.one_of(
        st.just(BUMP),
        st.builds(translate_T, shifts, st.just(BUMP)),
        st.builds(scale_S, widths, st.just(BUMP)),
    )


def _leaves():
    return st.one_of(
        _bumps(),
        st.sampled_from([SIN, COS, ID]),
        st.builds(Const, coefficients),
        st.builds(polynomial, st.lists(coefficients, min_size=1, max_size=3)),
    )


def _grow(children):
    return st.one_of(
        st.builds(add, children, children),
        st.builds(mul, children, children),
        st.builds(compose, st.sampled_from([SIN, COS]), children),
        st.builds(IntPow, children, st.integers(min_value=2, max_value=3)),
        st.builds(translate_T, shifts, children),
        st.builds(scale_S, widths, children),
    )


smooth_trees = st.recursive(_leaves(), _grow, max_leaves=6)


def _grow_compact(children):
    return st.one_of(
        st.builds(add, children, children),
        st.builds(mul, children, _leaves()),
        st.builds(compose, st.just(SIN), children),
        st.builds(IntPow, children, st.integers(min_value=2, max_value=3)),
        st.builds(translate_T, shifts, children),
        st.builds(scale_S, widths, children),
    )


# 支撑有界的树：紧支撑叶子与保持紧支撑的组合
compact_trees = st.recursive(_bumps(), _grow_compact, max_leaves=5)


def _profile(shift, width, coeffs):
    return mul(translate_T(shift, scale_S(width, BUMP)), polynomial(coeffs))


# 平移缩放的 bump 乘低次多项式
bump_profiles = st.builds(_profile, shifts, widths, st.lists(coefficients, min_size=1, max_size=3))
