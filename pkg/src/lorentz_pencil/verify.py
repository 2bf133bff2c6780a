"""Numerical verification that the generating curve is a line of curvature.

The checks are deliberately redundant. ``phi_decompose`` expands the normal
in the Frenet frame from closed forms; ``surface_normal`` takes the Lorentzian
cross product of the surface partials in world coordinates; the Rodrigues
check differentiates the unit normal by central differences and never looks
at the frame expansion or at theta.

Parametrisation singularities: where dP/ds x dP/dt vanishes on the curve
(lambda(s) = 0) the surface has no tangent plane. Isolated singular samples
are excluded from the pointwise checks and reported as warnings; a normal that
vanishes on adjacent samples, or on more than 2% of them, fails the check.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import numpy as np

from . import expr as ex
from .frenet import CurveError, check_unit_speed, classify_curve
from .minkowski import CausalClass, causal_class, inner, lorentz_cross
from .pencil import (PencilSpec, evaluate_surface, reference_normal,
                     surface_partials, theta_along)

__all__ = [
    "Tolerances", "CheckRecord", "VerificationReport", "PhiTriple",
    "DegenerateTangentPlane", "ZeroNormal", "ParallelismResult",
    "RodriguesResult", "SurfaceTypeResult", "isoparametric_residual",
    "surface_normal", "phi_decompose", "parallelism_residual",
    "rodrigues_residual", "surface_causal_check", "verify_all", "CHECK_NAMES",
    "TOL_ENV",
]

TOL_ENV = "LORENTZ_PENCIL_TOL"
CHECK_NAMES = ("unit_speed", "frame_ok", "isoparametric", "phi1_zero",
               "parallelism", "rodrigues", "surface_type")
DEGENERATE_NORM = 1e-10


@dataclass(frozen=True)
class Tolerances:
    unit_speed: float = 1e-6
    frame: float = 1e-9
    isoparametric: float = 1e-9
    phi1: float = 1e-8
    parallelism: float = 1e-7
    rodrigues: float = 1e-5
    family: float = 1e-8
    omega_warn: float = 1e-8

    @classmethod
    def default(cls) -> "Tolerances":
        """Defaults, scaled by the decimal factor in $LORENTZ_PENCIL_TOL if set."""
        tol = cls()
        raw = os.environ.get(TOL_ENV)
        if raw:
            factor = float(raw)
            if not (math.isfinite(factor) and factor > 0):
                raise ValueError(f"{TOL_ENV} must be a positive decimal, got {raw!r}")
            tol = tol.scaled(factor)
        return tol

    def scaled(self, factor: float) -> "Tolerances":
        return Tolerances(**{f.name: getattr(self, f.name) * factor for f in fields(self)})

    def override(self, values: Optional[dict]) -> "Tolerances":
        if not values:
            return self
        known = {f.name for f in fields(self)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown tolerance keys {sorted(unknown)}")
        return replace(self, **{k: float(v) for k, v in values.items()})


class DegenerateTangentPlane(ArithmeticError):
    pass


class ZeroNormal(ArithmeticError):
    pass


@dataclass(frozen=True)
class PhiTriple:
    phi1: float
    phi2: float
    phi3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.phi1, self.phi2, self.phi3])


@dataclass
class CheckRecord:
    check: str
    residual: float
    threshold: float
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"check": self.check, "residual": self.residual,
                "threshold": self.threshold, "pass": self.passed}


@dataclass
class VerificationReport:
    records: list
    name: str = ""
    warnings: list = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(r.passed for r in self.records)

    def __getitem__(self, check: str) -> CheckRecord:
        for r in self.records:
            if r.check == check:
                return r
        raise KeyError(check)

    @property
    def failed(self) -> list:
        return [r.check for r in self.records if not r.passed]

    def to_json(self) -> str:
        doc = {"name": self.name, "overall": self.overall,
               "checks": [r.as_dict() for r in self.records],
               "warnings": list(self.warnings)}
        return json.dumps(doc, indent=2)

    def to_text(self) -> str:
        lines = [f"# report {self.name}".rstrip()]
        for r in self.records:
            status = "PASS" if r.passed else "FAIL"
            line = f"{r.check:<14} {status}  residual={r.residual:.3e}  threshold={r.threshold:.1e}"
            if r.detail:
                line += f"  ({r.detail})"
            lines.append(line)
        for w in self.warnings:
            lines.append(f"warning: {w}")
        lines.append(f"overall {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# pointwise quantities


def isoparametric_residual(spec: PencilSpec, n_s: int = 101) -> float:
    if n_s < 2:
        raise ValueError("n_s must be >= 2")
    worst = 0.0
    for s in spec.curve.grid(n_s):
        d = evaluate_surface(spec, s, spec.t0) - spec.curve.point(s)
        worst = max(worst, float(np.linalg.norm(d)))
    return worst


def _fd_partials(spec: PencilSpec, s: float, t: float):
    hs = 1e-6 * (spec.curve.s_range[1] - spec.curve.s_range[0])
    ht = 1e-6 * (spec.t_range[1] - spec.t_range[0])
    Ps = (evaluate_surface(spec, s + hs, t) - evaluate_surface(spec, s - hs, t)) / (2 * hs)
    Pt = (evaluate_surface(spec, s, t + ht) - evaluate_surface(spec, s, t - ht)) / (2 * ht)
    return Ps, Pt


def surface_normal(spec: PencilSpec, s: float, t: float, method: str = "symbolic",
                   frame=None) -> np.ndarray:
    """dP/ds x dP/dt with the Lorentzian cross product."""
    if method == "symbolic":
        Ps, Pt = surface_partials(spec, s, t, frame)
    elif method == "fd":
        Ps, Pt = _fd_partials(spec, s, t)
    else:
        raise ValueError(f"unknown method {method!r}")
    n = lorentz_cross(Ps, Pt)
    if np.linalg.norm(n) < DEGENERATE_NORM:
        raise DegenerateTangentPlane(f"surface normal vanishes at (s, t) = ({s:.9g}, {t:.9g})")
    return n


def phi_decompose(spec: PencilSpec, s: float, frame=None) -> PhiTriple:
    """Frame components of the normal along t = t0.

    With dP/ds = A1 T + A2 N + A3 B and dP/dt = u_t T + v_t N + w_t B,
    and T x N = a B, N x B = T, B x T = c N where a = <T,T><B,B> and
    c = <T,T><N,N> for the frame orientation used here.
    """
    f = frame if frame is not None else spec.frame(s)
    u, v, w, us, vs, ws, ut, vt, wt = spec.marching(s, spec.t0)
    k, tau = f.kappa, f.tau
    gT, gN, gB = spec.kind.signatures
    if spec.kind.spacelike_curve:
        A1 = 1.0 + us + f.eps * k * v
        A3 = ws + tau * v
    else:
        A1 = 1.0 + us + k * v
        A3 = ws - tau * v
    A2 = k * u + vs + tau * w
    a, c = gT * gB, gT * gN
    return PhiTriple(float(A2 * wt - A3 * vt), float(c * (A3 * ut - A1 * wt)),
                     float(a * (A1 * vt - A2 * ut)))


# ---------------------------------------------------------------------------
# samples along the curve


@dataclass
class _Sample:
    s: float
    frame: object
    theta: float
    n1: np.ndarray
    normal: Optional[np.ndarray]  # None at a singular point


def _sample_curve(spec: PencilSpec, n_s: int) -> list:
    out = []
    grid = spec.curve.grid(n_s)
    for s, theta in zip(grid, theta_along(spec, grid)):
        s, theta = float(s), float(theta)
        f = spec.frame(s)
        try:
            n = surface_normal(spec, s, spec.t0, frame=f)
        except DegenerateTangentPlane:
            n = None
        out.append(_Sample(s, f, theta, reference_normal(f, theta), n))
    return out


def _singular_points(samples) -> list:
    """s-values of isolated singular samples; raises ZeroNormal when not isolated."""
    idx = [i for i, smp in enumerate(samples) if smp.normal is None]
    if not idx:
        return []
    n = len(samples)
    if len(idx) == n:
        raise ZeroNormal("surface normal vanishes along the whole curve")
    if len(idx) > max(1, int(0.02 * n)):
        raise ZeroNormal(f"surface normal vanishes at {len(idx)} of {n} curve samples")
    for i, j in zip(idx, idx[1:]):
        if j == i + 1:
            raise ZeroNormal(f"surface normal vanishes on adjacent samples s={samples[i].s:.6g}, "
                             f"{samples[j].s:.6g}")
    return [samples[i].s for i in idx]


@dataclass
class ParallelismResult:
    residual: float
    lambda_sign_changes: list  # s-midpoints where the implied lambda changes sign
    singular: list
    implied_lambda: list

    @property
    def warnings(self) -> list:
        w = []
        if self.singular:
            w.append("normal vanishes at isolated s = "
                     + ", ".join(f"{s:.6g}" for s in self.singular) + " (excluded)")
        if self.lambda_sign_changes:
            w.append("implied lambda changes sign near s = "
                     + ", ".join(f"{s:.6g}" for s in self.lambda_sign_changes))
        return w


def parallelism_residual(spec: PencilSpec, n_s: int = 101, _samples=None) -> ParallelismResult:
    """Largest Euclidean size of the part of the (Euclidean-unit) normal that is
    Lorentz-orthogonal to the reference normal n1."""
    samples = _samples if _samples is not None else _sample_curve(spec, n_s)
    singular = _singular_points(samples)
    worst = 0.0
    lams = []
    for smp in samples:
        if smp.normal is None:
            lams.append((smp.s, 0.0))
            continue
        n1 = smp.n1
        g = inner(n1, n1)
        nu = smp.normal / np.linalg.norm(smp.normal)
        perp = nu - (inner(nu, n1) / g) * n1
        worst = max(worst, float(np.linalg.norm(perp)))
        lams.append((smp.s, inner(smp.normal, n1) / g))
    changes = []
    signs = [(s, math.copysign(1.0, lam)) for s, lam in lams if lam != 0.0]
    for (s0, a), (s1, b) in zip(signs, signs[1:]):
        if a != b:
            changes.append(0.5 * (s0 + s1))
    return ParallelismResult(worst, changes, singular, lams)


@dataclass
class RodriguesResult:
    residual: float
    omega_min: float
    euclidean_fallback: int  # samples where the normal was numerically null
    skipped: list
    escalated: int = 0  # samples re-evaluated in extended precision

    @property
    def warnings(self) -> list:
        w = []
        if self.omega_min < 1e-8:
            w.append(f"principal curvature along the curve nearly vanishes (min |omega| = {self.omega_min:.3g})")
        if self.euclidean_fallback:
            w.append(f"normal numerically null at {self.euclidean_fallback} samples; Euclidean normalisation used")
        return w


_EPS = float(np.finfo(float).eps)
HP_DPS = 40


class _HighPrecisionNormal:
    """Surface normal along the curve evaluated with mpmath.

    Mirrors the double-precision construction (frame from r', r'', r''',
    partials, Lorentzian cross product) at ``HP_DPS`` significant digits.
    """

    def __init__(self, spec: PencilSpec):
        import mpmath

        self.mp = mpmath
        c = spec.curve
        self.curve = {k: [ex.compile_mp(e, ("s",)) for e in getattr(c, k)] for k in ("d1", "d2", "d3")}
        self.ms = [ex.compile_mp(e) for e in spec.exprs]
        self.gN = spec.kind.signatures[1]

    @staticmethod
    def inner(x, y):
        return x[0] * y[0] + x[1] * y[1] - x[2] * y[2]

    @staticmethod
    def cross(x, y):
        return [x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[1] * y[0] - x[0] * y[1]]

    def normal_and_tangent(self, s, t):
        T, dT, ddT = ([f(s) for f in self.curve[k]] for k in ("d1", "d2", "d3"))
        gN = self.gN
        kappa = self.mp.sqrt(abs(self.inner(dT, dT)))
        N = [x / kappa for x in dT]
        B = [-gN * x for x in self.cross(T, N)]
        dkappa = gN * self.inner(dT, ddT) / kappa
        dN = [(a - dkappa / kappa * b) / kappa for a, b in zip(ddT, dT)]
        dB = [-gN * x for x in self.cross(T, dN)]
        u, v, w, us, vs, ws, ut, vt, wt = (f(s, t) for f in self.ms)
        Ps = [T[i] * (1 + us) + u * dT[i] + vs * N[i] + v * dN[i] + ws * B[i] + w * dB[i]
              for i in range(3)]
        Pt = [ut * T[i] + vt * N[i] + wt * B[i] for i in range(3)]
        return self.cross(Ps, Pt), T

    def residual(self, s: float, t0: float, h: float):
        """(non-tangential residual, omega) at s, or None when the normal is null."""
        mpf = self.mp.mpf
        with self.mp.workdps(HP_DPS):
            s, t0, h = mpf(s), mpf(t0), mpf(h)
            n, T = self.normal_and_tangent(s, t0)
            n_p, _ = self.normal_and_tangent(s + h, t0)
            n_m, _ = self.normal_and_tangent(s - h, t0)
            if sum(a * b for a, b in zip(n_p, n_m)) < 0:
                n_m = [-x for x in n_m]
            dn = [(a - b) / (2 * h) for a, b in zip(n_p, n_m)]
            nn = self.inner(n, n)
            if nn == 0:
                return None
            k = self.inner(n, dn) / nn
            sigma = self.mp.sqrt(abs(nn))
            dn_hat = [(a - k * b) / sigma for a, b in zip(dn, n)]
            omega = self.inner(dn_hat, T) / self.inner(T, T)
            r = self.mp.sqrt(sum((a - omega * b) ** 2 for a, b in zip(dn_hat, T)))
            return float(r), float(omega)


def rodrigues_residual(spec: PencilSpec, n_s: int = 101, h: float = 1e-5,
                       omega_warn: float = 1e-8, threshold: float = 1e-5,
                       _samples=None) -> RodriguesResult:
    """Non-tangential part of d(n_hat)/ds along the curve, by central differences.

    Zero exactly when dP/ds is a principal direction: S(T) = omega T.
    The raw normal is differenced and the normalisation is differentiated by
    the quotient rule, d(n/sigma) = (n' - (<n,n'>/<n,n>) n) / sigma.

    In ambient coordinates the frame vectors can be far larger than the
    Lorentzian quantities built from them. The normal then carries a relative
    rounding error near eps * |frame|^2, which the 1/h of the difference
    quotient magnifies. Samples where that rounding floor exceeds 1% of
    ``threshold`` are re-evaluated with mpmath; ``escalated`` counts them.
    """
    samples = _samples if _samples is not None else _sample_curve(spec, n_s)
    singular = set(_singular_points(samples))
    t0 = spec.t0
    worst, omega_min, fallback, skipped, escalated = 0.0, math.inf, 0, [], 0
    hp = None
    for smp in samples:
        if smp.s in singular:
            skipped.append(smp.s)
            continue
        try:
            n_p = surface_normal(spec, smp.s + h, t0)
            n_m = surface_normal(spec, smp.s - h, t0)
        except DegenerateTangentPlane:
            skipped.append(smp.s)
            continue
        n = smp.normal
        if float(np.dot(n_p, n_m)) < 0:
            n_m = -n_m
        dn = (n_p - n_m) / (2 * h)
        null = causal_class(n) is CausalClass.NULL
        if null:
            fallback += 1
            nn, ndn = float(np.dot(n, n)), float(np.dot(n, dn))
        else:
            nn, ndn = inner(n, n), inner(n, dn)
        sigma = math.sqrt(abs(nn))
        dn_hat = (dn - (ndn / nn) * n) / sigma
        T = smp.frame.T
        omega = inner(dn_hat, T) / inner(T, T)
        r = float(np.linalg.norm(dn_hat - omega * T))
        if not null:
            f = smp.frame
            scale = max(np.linalg.norm(f.T), np.linalg.norm(f.N), np.linalg.norm(f.B))
            floor = _EPS * scale ** 2 * (np.linalg.norm(n) / sigma) / h
            if floor > 0.01 * threshold:
                hp = hp or _HighPrecisionNormal(spec)
                got = hp.residual(smp.s, t0, h)
                if got is not None:
                    r, omega = got
                    escalated += 1
        worst = max(worst, r)
        omega_min = min(omega_min, abs(omega))
    if len(skipped) == len(samples):
        raise ZeroNormal("no regular sample on the curve")
    return RodriguesResult(worst, omega_min, fallback, skipped, escalated)


@dataclass
class SurfaceTypeResult:
    expected: CausalClass
    curve_fraction: float  # conforming regular samples on t = t0
    mesh_fraction: float  # conforming nodes of the whole lattice
    worst_violation: float  # largest |<n,n>| (normal scaled to Euclidean unit) with the wrong sign
    null_nodes: int
    curve_violations: list

    @property
    def passed(self) -> bool:
        return not self.curve_violations


def surface_causal_check(spec: PencilSpec, n_s: int = 101, n_t: int = 41,
                         _samples=None) -> SurfaceTypeResult:
    """Causal character of the normal: timelike for a spacelike surface and
    spacelike for a timelike one. Only the curve row is asserted."""
    expected = CausalClass.TIMELIKE if spec.spacelike_surface else CausalClass.SPACELIKE
    samples = _samples if _samples is not None else _sample_curve(spec, n_s)
    _singular_points(samples)
    worst, nulls = 0.0, 0

    def classify(n):
        nonlocal worst, nulls
        cls = causal_class(n)
        if cls is CausalClass.NULL:
            nulls += 1
        elif cls is not expected:
            nu = n / np.linalg.norm(n)
            worst = max(worst, abs(inner(nu, nu)))
        return cls is expected

    regular = [smp for smp in samples if smp.normal is not None]
    bad = [smp.s for smp in regular if not classify(smp.normal)]
    curve_fraction = 1.0 - len(bad) / len(regular)

    good = total = 0
    for s in spec.curve.grid(n_s):
        f = spec.frame(float(s))
        for t in np.linspace(spec.t_range[0], spec.t_range[1], n_t):
            try:
                n = surface_normal(spec, float(s), float(t), frame=f)
            except DegenerateTangentPlane:
                nulls += 1
                total += 1
                continue
            total += 1
            good += classify(n)
    return SurfaceTypeResult(expected, curve_fraction, good / total, worst, nulls, bad)


# ---------------------------------------------------------------------------


def _frame_residual(samples) -> float:
    worst = 0.0
    for smp in samples:
        f = smp.frame
        for v in (f.T, f.N, f.B):
            worst = max(worst, abs(abs(inner(v, v)) - 1.0))
        for a, b in ((f.T, f.N), (f.T, f.B), (f.N, f.B)):
            worst = max(worst, abs(inner(a, b)))
    return worst


def verify_all(spec: PencilSpec, tolerances: Optional[Tolerances] = None, n_s: int = 101,
               surface_grid: tuple = (21, 11)) -> VerificationReport:
    """Run every check; sub-check errors become failed records."""
    tol = tolerances or Tolerances.default().override(spec.tolerances)
    report = VerificationReport([], name=spec.name)
    add = report.records.append

    def failed(name, threshold, exc):
        add(CheckRecord(name, math.inf, threshold, False, f"{type(exc).__name__}: {exc}"))

    dev = check_unit_speed(spec.curve, n_s)
    add(CheckRecord("unit_speed", dev, tol.unit_speed, dev <= tol.unit_speed))

    samples = None
    try:
        kind = classify_curve(spec.curve, n_s)
        if kind is not spec.kind:
            raise CurveError(f"curve is {kind.value}, spec declares {spec.kind.value}")
        samples = _sample_curve(spec, n_s)
        res = _frame_residual(samples)
        add(CheckRecord("frame_ok", res, tol.frame, res <= tol.frame, kind.value))
    except (CurveError, ArithmeticError, ValueError) as exc:
        failed("frame_ok", tol.frame, exc)

    try:
        res = isoparametric_residual(spec, n_s)
        add(CheckRecord("isoparametric", res, tol.isoparametric, res <= tol.isoparametric))
    except (CurveError, ArithmeticError, ValueError) as exc:
        failed("isoparametric", tol.isoparametric, exc)

    if samples is None:
        for name, thr in (("phi1_zero", tol.phi1), ("parallelism", tol.parallelism),
                          ("rodrigues", tol.rodrigues)):
            add(CheckRecord(name, math.inf, thr, False, "no valid frame"))
        add(CheckRecord("surface_type", 1.0, 0.0, False, "no valid frame"))
        return report

    try:
        singular = set(_singular_points(samples))
        res = max(abs(phi_decompose(spec, smp.s, smp.frame).phi1)
                  for smp in samples if smp.s not in singular)
        add(CheckRecord("phi1_zero", res, tol.phi1, res <= tol.phi1))
    except (ArithmeticError, ValueError) as exc:
        failed("phi1_zero", tol.phi1, exc)

    try:
        par = parallelism_residual(spec, n_s, _samples=samples)
        report.warnings.extend(par.warnings)
        detail = f"lambda sign changes: {len(par.lambda_sign_changes)}" if par.lambda_sign_changes else ""
        add(CheckRecord("parallelism", par.residual, tol.parallelism,
                        par.residual <= tol.parallelism, detail))
    except (ArithmeticError, ValueError) as exc:
        failed("parallelism", tol.parallelism, exc)

    try:
        rod = rodrigues_residual(spec, n_s, omega_warn=tol.omega_warn,
                                 threshold=tol.rodrigues, _samples=samples)
        report.warnings.extend(rod.warnings)
        add(CheckRecord("rodrigues", rod.residual, tol.rodrigues, rod.residual <= tol.rodrigues,
                        f"min |omega| = {rod.omega_min:.3g}"))
    except (ArithmeticError, ValueError) as exc:
        failed("rodrigues", tol.rodrigues, exc)

    try:
        st = surface_causal_check(spec, *surface_grid, _samples=samples)
        res = 1.0 - st.curve_fraction
        add(CheckRecord("surface_type", res, 0.0, st.passed,
                        f"expected {st.expected.value} normal; mesh conforming {st.mesh_fraction:.1%}"))
    except (ArithmeticError, ValueError) as exc:
        failed("surface_type", 0.0, exc)
    return report
