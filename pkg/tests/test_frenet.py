import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lorentz_pencil.frenet import (CurveKind, CurveSpec, MixedCausalType, NullTangent,
                                   VanishingCurvature, check_unit_speed, classify_curve,
                                   frame_at, structural_residual, torsion_profile)
from lorentz_pencil.minkowski import causal_class, CausalClass, inner

from .strategies import SQRT2, circle, helix_31, helix_32, hyperbola

R3 = math.sqrt(3) / 2


def closed_form_31(a, b, s):
    c = math.hypot(a, b)
    ch, sh = math.cosh(s / c), math.sinh(s / c)
    return (np.array([a / c * ch, b / c, a / c * sh]), np.array([sh, 0.0, ch]),
            np.array([b / c * ch, -a / c, b / c * sh]))


def closed_form_32(s):
    ch, sh = math.cosh(s), math.sinh(s)
    return np.array([R3 * ch, 0.5, R3 * sh]), np.array([sh, 0.0, ch]), np.array([0.5 * ch, -R3, 0.5 * sh])


def closed_form_circle(s):
    return (np.array([-math.sin(s), math.cos(s), 0.0]), np.array([-math.cos(s), -math.sin(s), 0.0]),
            np.array([0.0, 0.0, 1.0]))


def closed_form_hyperbola(s):
    return (np.array([math.sinh(s), 0.0, math.cosh(s)]), np.array([math.cosh(s), 0.0, math.sinh(s)]),
            np.array([0.0, -1.0, 0.0]))


CASES = [
    ("helix31", lambda: helix_31(), lambda s: closed_form_31(1, 1, s), 0.5, 0.5),
    ("helix32", helix_32, closed_form_32, R3, 0.5),
    ("circle", circle, closed_form_circle, 1.0, 0.0),
    ("hyperbola", lambda: hyperbola((-math.pi, math.pi)), closed_form_hyperbola, 1.0, 0.0),
]


# unit speed and classification ---------------------------------------------


def test_unit_speed_deviations():
    assert check_unit_speed(circle()) <= 1e-12
    assert check_unit_speed(hyperbola()) <= 1e-12
    c = hyperbola()
    assert inner(c.tangent(0.3), c.tangent(0.3)) == pytest.approx(-1.0, abs=1e-15)
    assert check_unit_speed(CurveSpec.from_strings("2*s", "0", "0", (0, 1))) == pytest.approx(3.0)


def test_unit_speed_needs_two_samples():
    with pytest.raises(ValueError):
        check_unit_speed(circle(), 1)


@pytest.mark.parametrize("make, kind", [
    (lambda: helix_31(), CurveKind.SPACELIKE_SPACELIKE_BINORMAL),
    (hyperbola, CurveKind.TIMELIKE),
    (circle, CurveKind.SPACELIKE_TIMELIKE_BINORMAL),
    (helix_32, CurveKind.SPACELIKE_SPACELIKE_BINORMAL),
])
def test_classification(make, kind):
    c = make()
    assert classify_curve(c) is kind
    assert classify_curve(c, 404) is kind


def test_circle_binormal_is_timelike():
    f = frame_at(circle(), CurveKind.SPACELIKE_TIMELIKE_BINORMAL, 1.0)
    assert np.allclose(f.B, [0, 0, 1], atol=1e-15)
    assert inner(f.B, f.B) == -1.0


def test_mixed_kind_rejected():
    # <T', T'> = 1 - s^2 changes sign at s = 1
    c = CurveSpec.from_strings("s", "s^2 / 2", "s^3 / 6", (0.0, 1.5))
    with pytest.raises(MixedCausalType):
        classify_curve(c)


def test_null_tangent_rejected():
    with pytest.raises(NullTangent):
        classify_curve(CurveSpec.from_strings("s", "0", "s", (0, 1)))


def test_straight_line_has_no_frame():
    with pytest.raises(VanishingCurvature):
        classify_curve(CurveSpec.from_strings("s", "0", "0", (0, 1)))


# frames against closed forms -------------------------------------------------


@pytest.mark.parametrize("name, make, closed, kappa, tau", CASES, ids=[c[0] for c in CASES])
def test_frames_match_closed_forms(name, make, closed, kappa, tau):
    c = make()
    kind = classify_curve(c)
    for s in np.linspace(*c.s_range, 50):
        f = frame_at(c, kind, s)
        for got, want in zip((f.T, f.N, f.B), closed(s)):
            assert np.max(np.abs(got - want)) <= 1e-9
        assert f.kappa == pytest.approx(kappa, abs=1e-9)
        assert f.tau == pytest.approx(tau, abs=1e-9)


def test_helix31_at_origin():
    f = frame_at(helix_31(), CurveKind.SPACELIKE_SPACELIKE_BINORMAL, 0.0)
    assert np.allclose(f.T, [1 / SQRT2, 1 / SQRT2, 0], atol=1e-15)
    assert np.allclose(f.N, [0, 0, 1], atol=1e-15)
    assert np.allclose(f.B, [1 / SQRT2, -1 / SQRT2, 0], atol=1e-15)


@pytest.mark.parametrize("a, b", [(1.0, 1.0), (2.0, 1.0), (0.5, 3.0)])
def test_helix31_torsion_is_b_over_c_squared(a, b):
    c = helix_31(a, b)
    prof = torsion_profile(c, classify_curve(c), c.grid(40))
    assert max(abs(t - b / (a * a + b * b)) for _, t in prof) <= 1e-9


def test_torsion_profiles_constant():
    c = helix_32()
    assert all(abs(t - 0.5) <= 1e-10 for _, t in torsion_profile(c, classify_curve(c), np.linspace(0, 2 * math.pi, 100)))
    c = circle((1e-3, 2 * math.pi))
    assert all(abs(t) <= 1e-10 for _, t in torsion_profile(c, classify_curve(c), c.grid(100)))


def test_circle_normal():
    f = frame_at(circle(), CurveKind.SPACELIKE_TIMELIKE_BINORMAL, 0.7)
    assert f.kappa == pytest.approx(1.0, abs=1e-15)
    assert np.allclose(f.N, [-math.cos(0.7), -math.sin(0.7), 0], atol=1e-15)


# invariants ----------------------------------------------------------------


@pytest.mark.parametrize("name, make, closed, kappa, tau", CASES, ids=[c[0] for c in CASES])
def test_frame_orthonormal_with_kind_signature(name, make, closed, kappa, tau):
    c = make()
    kind = classify_curve(c)
    for s in c.grid(30):
        f = frame_at(c, kind, s)
        sig = tuple(int(round(inner(v, v))) for v in (f.T, f.N, f.B))
        assert sig == kind.signatures
        for v in (f.T, f.N, f.B):
            assert abs(abs(inner(v, v)) - 1) <= 1e-9
        for x, y in ((f.T, f.N), (f.T, f.B), (f.N, f.B)):
            assert abs(inner(x, y)) <= 1e-9
        assert f.eps == kind.eps
        assert np.linalg.det(np.array([f.T, f.N, f.B])) == pytest.approx(sig[0], abs=1e-9 * np.linalg.norm(f.N) ** 2)


@pytest.mark.parametrize("name, make, closed, kappa, tau", CASES, ids=[c[0] for c in CASES])
def test_structural_equations_hold(name, make, closed, kappa, tau):
    c = make()
    kind = classify_curve(c)
    rng = np.random.default_rng(7)
    lo, hi = c.s_range
    for s in rng.uniform(lo + 1e-4, hi - 1e-4, 50):
        assert structural_residual(c, kind, s) <= 1e-7


@given(st.floats(0.2, 3.0), st.floats(0.1, 3.0), st.floats(-2.0, 2.0))
@settings(max_examples=60, deadline=None)
def test_random_helices_satisfy_structural_equations(a, b, s):
    c = helix_31(a, b, s_range=(-3.0, 3.0))
    assert structural_residual(c, CurveKind.SPACELIKE_SPACELIKE_BINORMAL, s) <= 1e-7


def test_frames_stay_accurate_where_frame_vectors_are_long():
    # |N| ~ 268 at s = 2 pi; the Lorentz products cancel more than five digits
    c = helix_32()
    kind = classify_curve(c)
    f = frame_at(c, kind, 2 * math.pi)
    T, N, B = closed_form_32(2 * math.pi)
    assert np.max(np.abs(f.N - N)) <= 1e-12 * np.max(np.abs(N))
    assert np.max(np.abs(f.B - B)) <= 1e-12 * np.max(np.abs(B))
    assert causal_class(f.B) is CausalClass.SPACELIKE
