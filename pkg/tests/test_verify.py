import json
import math

import numpy as np
import pytest

from lorentz_pencil import expr as ex
from lorentz_pencil.fixtures import EXPECTED_PASS, FIXTURES, fixture, fixture_config
from lorentz_pencil.config import spec_from_dict
from lorentz_pencil.minkowski import CausalClass, inner
from lorentz_pencil.pencil import DirectScale, PencilSpec, PolynomialScale, theta_at
from lorentz_pencil.verify import (CHECK_NAMES, TOL_ENV, DegenerateTangentPlane, Tolerances,
                                   ZeroNormal, isoparametric_residual, parallelism_residual,
                                   phi_decompose, rodrigues_residual, surface_causal_check,
                                   surface_normal, verify_all)

from .families import KINDS, random_family
from .strategies import circle, hyperbola


def on_circle(u, v, w, s_range=(0.1, 2 * math.pi), lam="1"):
    P = lambda text: ex.parse(text, {"s", "t"})
    return PencilSpec(circle(s_range), DirectScale(P(u), P(v), P(w)), 0.0, (-1.0, 1.0),
                      lam=ex.parse(lam, {"s"}))


# verify_all over the reference pencils ---------------------------------------


@pytest.mark.parametrize("name", list(FIXTURES))
def test_fixture_verdicts(name):
    report = verify_all(fixture(name))
    assert report.overall is EXPECTED_PASS[name], report.to_text()
    assert [r.check for r in report.records] == list(CHECK_NAMES)
    assert all(r.residual >= 0 for r in report.records)


def test_p5_fails_on_isoparametric_only_by_one_unit():
    spec = fixture("P5")
    assert isoparametric_residual(spec) == pytest.approx(1.0, abs=1e-9)
    report = verify_all(spec)
    assert "isoparametric" in report.failed


def test_shifted_hyperbolic_cosine_keeps_curve_but_loses_normal():
    # w = cosh(st) - 1 vanishes at t = 0, but so does w_t, and dP/dt = T on the curve
    doc = fixture_config("P5")
    doc["marching_scale"]["direct"]["w"] = "cosh(s * t) - 1"
    spec = spec_from_dict(doc)
    assert isoparametric_residual(spec) <= 1e-12
    with pytest.raises(DegenerateTangentPlane):
        surface_normal(spec, 1.0, 0.0)
    report = verify_all(spec)
    assert not report.overall
    assert "ZeroNormal" in report["parallelism"].detail


def test_rotated_reference_normal_fails_parallelism():
    spec = fixture("P1").replace(theta0=0.3)
    report = verify_all(spec)
    assert report.failed == ["parallelism"]


# normals and phi --------------------------------------------------------------


def test_p3_normal_is_s_times_principal_normal():
    spec = fixture("P3")
    phi = phi_decompose(spec, math.pi / 2)
    assert phi.as_array() == pytest.approx([0.0, math.pi / 2, 0.0], abs=1e-14)
    n = surface_normal(spec, math.pi / 2, 0.0)
    assert n == pytest.approx([0.0, -math.pi / 2, 0.0], abs=1e-14)
    for s in (0.5, 2.0, 5.0):
        assert phi_decompose(spec, s).as_array() == pytest.approx([0.0, s, 0.0], abs=1e-13)


def test_p1_phi_at_origin():
    assert phi_decompose(fixture("P1"), 0.0).as_array() == pytest.approx([0.0, 1.0, 0.0], abs=1e-15)


@pytest.mark.parametrize("name", [n for n in FIXTURES if n != "P5"])
def test_phi_reassembles_the_normal(name):
    spec = fixture(name)
    for s in spec.curve.grid(101):
        f = spec.frame(s)
        phi = phi_decompose(spec, s, f)
        rebuilt = phi.phi1 * f.T + phi.phi2 * f.N + phi.phi3 * f.B
        try:
            direct = surface_normal(spec, s, spec.t0, frame=f)
        except DegenerateTangentPlane:
            direct = np.zeros(3)  # isolated singular point
        assert np.max(np.abs(rebuilt - direct)) <= 1e-8 * max(1.0, np.max(np.abs(direct)))


def test_phi_reassembles_the_normal_on_random_families():
    rng = np.random.default_rng(5)
    for kind in KINDS:
        for _ in range(5):
            spec = random_family(rng, kind).spec
            for s in spec.curve.grid(11):
                f = spec.frame(s)
                phi = phi_decompose(spec, s, f)
                rebuilt = phi.phi1 * f.T + phi.phi2 * f.N + phi.phi3 * f.B
                assert np.allclose(rebuilt, surface_normal(spec, s, spec.t0), rtol=0, atol=1e-8)


def test_zero_marching_scale_has_no_normal():
    spec = on_circle("0", "0", "0")
    assert phi_decompose(spec, 1.0).as_array() == pytest.approx([0, 0, 0])
    with pytest.raises(DegenerateTangentPlane):
        surface_normal(spec, 1.0, 0.0)
    with pytest.raises(ZeroNormal):
        parallelism_residual(spec)
    report = verify_all(spec)
    assert not report.overall and report["parallelism"].residual == math.inf


def test_finite_difference_normal_matches_symbolic():
    spec = fixture("P1")
    rng = np.random.default_rng(2)
    for s, t in zip(rng.uniform(-1.9, 1.9, 50), rng.uniform(-0.9, 0.9, 50)):
        sym = surface_normal(spec, s, t)
        fd = surface_normal(spec, s, t, method="fd")
        assert np.max(np.abs(fd - sym)) <= 1e-6 * max(1.0, np.max(np.abs(sym)))


def test_unknown_normal_method():
    with pytest.raises(ValueError):
        surface_normal(fixture("P1"), 0.0, 0.0, method="spline")


# parallelism -------------------------------------------------------------------


@pytest.mark.parametrize("name", ["P1", "P3", "P6"])
def test_parallel_on_constructed_pencils(name):
    assert parallelism_residual(fixture(name)).residual <= 1e-9


def test_null_normal_is_not_parallel_to_principal_normal():
    # v = w = t: the normal runs along N + B, a null direction, while n1 = N
    spec = on_circle("0", "t", "t")
    res = parallelism_residual(spec).residual
    assert res > 0.1
    assert parallelism_residual(on_circle("0", "2 * t", "2 * t")).residual == pytest.approx(res, rel=1e-12)


def test_parallelism_reports_implied_lambda_sign():
    p6 = parallelism_residual(fixture("P6"))
    assert p6.singular == [pytest.approx(0.0, abs=1e-15)]
    assert p6.warnings
    p3 = parallelism_residual(fixture("P3"))
    assert not p3.lambda_sign_changes and not p3.singular
    # implied lambda is <n, n1> / <n1, n1> = s
    for s, lam in p3.implied_lambda:
        assert lam == pytest.approx(s, rel=1e-12)


def test_flipping_the_implied_lambda_is_reported():
    # w = -t sin(s): n = sin(s) N, whose sign changes at s = pi
    spec = on_circle("0", "0", "-t * sin(s)", s_range=(2.0, 4.5))
    res = parallelism_residual(spec)
    assert res.residual <= 1e-12
    assert res.lambda_sign_changes == [pytest.approx(math.pi, abs=0.03)]


def test_clustered_singular_points_rejected():
    # the normal is below the degeneracy floor on a run of about ten samples
    spec = on_circle("0", "0", "t * (s - 0.5)^6", s_range=(0.3, 0.7))
    with pytest.raises(ZeroNormal):
        parallelism_residual(spec, n_s=101)


# rodrigues ----------------------------------------------------------------------


def test_rodrigues_on_fixtures():
    assert rodrigues_residual(fixture("P1")).residual <= 1e-5
    p3 = rodrigues_residual(fixture("P3"))
    assert p3.residual <= 1e-5
    assert p3.omega_min > 0.5 and not p3.warnings


def test_rodrigues_on_scaled_normal_direction():
    # w = t s gives n = s N: a line of curvature although the normal grows along it
    spec = on_circle("0", "0", "t * s")
    assert rodrigues_residual(spec).residual <= 1e-10
    assert verify_all(spec).overall


def test_rodrigues_flags_twisting_normal():
    spec = on_circle("0", "0.5 * t * sin(s)", "t")
    assert rodrigues_residual(spec).residual > 1e-2
    assert not verify_all(spec).overall


@pytest.mark.parametrize("name", ["P1", "P2", "P3", "P4", "P6"])
def test_rodrigues_step_halving_is_stable(name):
    spec = fixture(name)
    a = rodrigues_residual(spec, h=1e-5).residual
    b = rodrigues_residual(spec, h=5e-6).residual
    tiny = 1e-9
    assert max(a, tiny) / max(b, tiny) < 5 and max(b, tiny) / max(a, tiny) < 5


def test_rodrigues_escalates_only_where_frames_are_long():
    assert rodrigues_residual(fixture("P1")).escalated == 0
    assert rodrigues_residual(fixture("P2")).escalated > 0


def test_rodrigues_warns_on_vanishing_principal_curvature():
    # hyperbola with w = t: the normal stays along N, which turns with the curve
    P = lambda text: ex.parse(text, {"s", "t"})
    spec = PencilSpec(hyperbola(), DirectScale(P("0"), P("0"), P("t")), 0.0, (-1.0, 1.0))
    res = rodrigues_residual(spec)
    assert res.residual <= 1e-9
    assert res.omega_min >= 0.5
    # the plane of the circle: constant normal B, so omega = 0
    flat = on_circle("0", "t", "0")
    res = rodrigues_residual(flat)
    assert res.omega_min <= 1e-8 and res.warnings


# surface type --------------------------------------------------------------------


def test_surface_type_on_curve_rows():
    p1 = surface_causal_check(fixture("P1"))
    assert p1.expected is CausalClass.TIMELIKE and p1.passed and p1.curve_fraction == 1.0
    p3 = surface_causal_check(fixture("P3"))
    assert p3.expected is CausalClass.SPACELIKE and p3.passed
    spec = fixture("P3")
    for s in (0.5, 3.0):
        n = surface_normal(spec, s, 0.0)
        assert inner(n, n) == pytest.approx(s * s, rel=1e-12)


def test_p1_normal_is_unit_timelike_on_the_curve():
    spec = fixture("P1")
    for s in spec.curve.grid(21):
        n = surface_normal(spec, s, 0.0)
        assert inner(n, n) == pytest.approx(-1.0, abs=1e-12)


def test_null_normal_counted_as_violation():
    res = surface_causal_check(on_circle("0", "t", "t"), n_s=11, n_t=5)
    assert not res.passed and res.null_nodes >= 11 and res.curve_fraction == 0.0


# report ----------------------------------------------------------------------


def test_report_json_layout():
    report = verify_all(fixture("P1"))
    doc = json.loads(report.to_json())
    assert set(doc) == {"name", "overall", "checks", "warnings"}
    assert doc["overall"] is True and doc["name"] == "P1"
    assert [c["check"] for c in doc["checks"]] == list(CHECK_NAMES)
    assert all(set(c) == {"check", "residual", "threshold", "pass"} for c in doc["checks"])


def test_report_text_layout():
    text = verify_all(fixture("P5")).to_text()
    assert text.rstrip().endswith("overall FAIL")
    assert "isoparametric  FAIL" in text


def test_tolerance_env_multiplier(monkeypatch):
    monkeypatch.setenv(TOL_ENV, "10")
    tol = Tolerances.default()
    assert tol.parallelism == pytest.approx(1e-6) and tol.rodrigues == pytest.approx(1e-4)
    monkeypatch.setenv(TOL_ENV, "-1")
    with pytest.raises(ValueError):
        Tolerances.default()


def test_tolerance_override():
    tol = Tolerances().override({"isoparametric": 2.0})
    assert tol.isoparametric == 2.0 and tol.phi1 == 1e-8
    with pytest.raises(ValueError):
        Tolerances().override({"speed": 1.0})
    report = verify_all(fixture("P5"), tolerances=tol)
    assert report["isoparametric"].passed


# the family equivalence in both directions --------------------------------------


@pytest.mark.parametrize("kind", KINDS, ids=lambda k: k.value)
def test_solved_families_pass_and_perturbations_fail(kind):
    for seed in range(4):
        fam = random_family(np.random.default_rng(seed), kind)
        assert verify_all(fam.spec).overall
        for perturb in ({"a21_factor": 2.0}, {"u_offset": 0.1}, {"theta_offset": 0.3}):
            bad = random_family(np.random.default_rng(seed), kind, **perturb)
            assert not verify_all(bad.spec).overall, perturb


@pytest.mark.parametrize("k", [-2.0, 0.5, 3.0])
def test_verdicts_invariant_under_joint_scaling(k):
    rng = np.random.default_rng(9)
    for kind in KINDS:
        spec = random_family(rng, kind).spec
        ms = spec.ms
        a = [list(row) for row in ms.a]
        a[1][0] *= k
        a[2][0] *= k
        scaled = spec.replace(ms=PolynomialScale(ms.p, tuple(map(tuple, a)), ms.l, ms.m, ms.n,
                                                 ms.U, ms.V, ms.W),
                              lam=ex.mul(ex.Const(k), spec.lam))
        assert verify_all(scaled).overall == verify_all(spec).overall
        off = spec.replace(theta0=spec.theta0 + 0.3)
        assert verify_all(off.replace(ms=scaled.ms, lam=scaled.lam)).overall == verify_all(off).overall


def test_theta_of_random_family_is_linear():
    rng = np.random.default_rng(4)
    for kind in KINDS:
        fam = random_family(rng, kind)
        rate = -fam.tau if kind.spacelike_curve else fam.tau
        for s in fam.spec.curve.grid(5):
            assert theta_at(fam.spec, s) == pytest.approx(fam.spec.theta0 + rate * s, abs=1e-9)
