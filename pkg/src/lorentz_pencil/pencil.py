"""Surface pencils P(s,t) = r(s) + u T + v N + w B through a prescribed curve.

Three cases are distinguished by the curve kind:

* spacelike curve, spacelike binormal  -> spacelike surface,
  reference normal n1 = cosh(theta) N + sinh(theta) B, theta' = -tau
* spacelike curve, timelike binormal   -> timelike surface,
  n1 = cosh(theta) N + sinh(theta) B, theta' = -tau
* timelike curve                       -> timelike surface,
  n1 = cos(theta) N + sin(theta) B,    theta' = +tau

theta is integrated from s = 0.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import expr as ex
from .frenet import CurveKind, CurveSpec, FrenetFrame, classify_curve, frame_at
from .quad import adaptive_simpson

__all__ = [
    "DirectScale", "PolynomialScale", "ComposedScale", "PencilSpec", "PencilError",
    "SurfaceMesh", "ConditionRecord", "ConditionReport", "theta_at", "theta_along",
    "reference_normal", "evaluate_surface", "surface_partials",
    "check_family_conditions", "coupling_targets", "sample_grid", "curve_row_index",
    "THETA_TOL", "LAMBDA_MIN",
]

THETA_TOL = 1e-10
FRAME_CACHE_SIZE = 4096
LAMBDA_MIN = 1e-9


class PencilError(ValueError):
    pass


def _check_vars(e: ex.Expression, allowed: set, what: str):
    extra = ex.variables(e) - allowed
    if extra:
        raise PencilError(f"{what} may only use {sorted(allowed)}, found {sorted(extra)}")


@dataclass(frozen=True)
class DirectScale:
    u: ex.Expression
    v: ex.Expression
    w: ex.Expression

    def __post_init__(self):
        for name in "uvw":
            _check_vars(getattr(self, name), {"s", "t"}, name)

    def uvw(self):
        return self.u, self.v, self.w


@dataclass(frozen=True)
class PolynomialScale:
    """u = sum_k a[0][k-1] l(s)^k U(t)^k, likewise v from (m, V), w from (n, W)."""

    p: int
    a: tuple  # 3 rows of p coefficients
    l: ex.Expression
    m: ex.Expression
    n: ex.Expression
    U: ex.Expression
    V: ex.Expression
    W: ex.Expression

    def __post_init__(self):
        if self.p < 1:
            raise PencilError("p must be >= 1")
        a = tuple(tuple(float(c) for c in row) for row in self.a)
        if len(a) != 3 or any(len(row) != self.p for row in a):
            raise PencilError(f"coefficient matrix must be 3 x {self.p}")
        object.__setattr__(self, "a", a)
        for name in "lmn":
            _check_vars(getattr(self, name), {"s"}, name)
        for name in "UVW":
            _check_vars(getattr(self, name), {"t"}, name)

    def sums(self):
        out = []
        for row, fs, ft in zip(self.a, (self.l, self.m, self.n), (self.U, self.V, self.W)):
            total = ex.ZERO
            for k, coef in enumerate(row, start=1):
                term = ex.mul(ex.Const(coef), ex.mul(ex.power(fs, k), ex.power(ft, k)))
                total = ex.add(total, term)
            out.append(total)
        return tuple(out)

    def uvw(self):
        return self.sums()

    def outer_slopes(self):
        """Derivatives at 0 of the outer maps (identity here)."""
        return 1.0, 1.0, 1.0


@dataclass(frozen=True)
class ComposedScale(PolynomialScale):
    """u = f(sum ...), v = g(sum ...), w = h(sum ...); f, g, h use variable x."""

    f: ex.Expression = ex.Var("x")
    g: ex.Expression = ex.Var("x")
    h: ex.Expression = ex.Var("x")

    def __post_init__(self):
        super().__post_init__()
        for name in "fgh":
            _check_vars(getattr(self, name), {"x"}, name)

    def uvw(self):
        return tuple(ex.substitute(outer, "x", inner)
                     for outer, inner in zip((self.f, self.g, self.h), self.sums()))

    def outer_values(self):
        return tuple(ex.evaluate(e, {"x": 0.0}) for e in (self.f, self.g, self.h))

    def outer_slopes(self):
        return tuple(ex.evaluate(ex.derivative(e, "x"), {"x": 0.0})
                     for e in (self.f, self.g, self.h))


@dataclass(frozen=True)
class PencilSpec:
    curve: CurveSpec
    ms: object  # DirectScale | PolynomialScale | ComposedScale
    t0: float
    t_range: tuple
    theta0: float = 0.0
    lam: ex.Expression = ex.ONE
    kind: Optional[CurveKind] = None
    name: str = ""
    grid: tuple = (101, 41)
    tolerances: Optional[dict] = None
    # resolved u, v, w and their partials: (u, v, w, u_s, v_s, w_s, u_t, v_t, w_t)
    exprs: tuple = field(init=False, repr=False, compare=False)
    _fns: tuple = field(init=False, repr=False, compare=False)
    _lam: object = field(init=False, repr=False, compare=False)
    _all: object = field(init=False, repr=False, compare=False)
    _frames: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo, hi = (float(x) for x in self.t_range)
        if not lo < hi:
            raise PencilError(f"t_range must be increasing, got {self.t_range!r}")
        if not lo <= self.t0 <= hi:
            raise PencilError(f"t0={self.t0} lies outside t_range [{lo}, {hi}]")
        object.__setattr__(self, "t_range", (lo, hi))
        object.__setattr__(self, "t0", float(self.t0))
        object.__setattr__(self, "theta0", float(self.theta0))
        _check_vars(self.lam, {"s"}, "lambda")
        if self.kind is None:
            object.__setattr__(self, "kind", classify_curve(self.curve))
        u, v, w = self.ms.uvw()
        ds = tuple(ex.derivative(e, "s") for e in (u, v, w))
        dt = tuple(ex.derivative(e, "t") for e in (u, v, w))
        object.__setattr__(self, "exprs", (u, v, w) + ds + dt)
        object.__setattr__(self, "_fns", tuple(ex.compile_expr(e) for e in self.exprs))
        object.__setattr__(self, "_all", ex.compile_many(self.exprs))
        object.__setattr__(self, "_lam", ex.compile_expr(self.lam, ("s",)))
        object.__setattr__(self, "_frames", {})

    @property
    def spacelike_surface(self) -> bool:
        return self.kind is CurveKind.SPACELIKE_SPACELIKE_BINORMAL

    def lam_at(self, s: float) -> float:
        return self._lam(s)

    def marching(self, s: float, t: float) -> np.ndarray:
        """(u, v, w, u_s, v_s, w_s, u_t, v_t, w_t) at (s, t)."""
        return np.array(self._all(s, t))

    def frame(self, s: float) -> FrenetFrame:
        """Frenet frame at s, memoized (frames are pure functions of s)."""
        s = float(s)
        f = self._frames.get(s)
        if f is None:
            if len(self._frames) >= FRAME_CACHE_SIZE:
                self._frames.clear()
            f = self._frames[s] = frame_at(self.curve, self.kind, s)
        return f

    def replace(self, **changes) -> "PencilSpec":
        fields = dict(curve=self.curve, ms=self.ms, t0=self.t0, t_range=self.t_range,
                      theta0=self.theta0, lam=self.lam, kind=self.kind, name=self.name,
                      grid=self.grid, tolerances=self.tolerances)
        fields.update(changes)
        return PencilSpec(**fields)


@dataclass
class SurfaceMesh:
    n_s: int
    n_t: int
    s_values: np.ndarray
    t_values: np.ndarray
    vertices: np.ndarray  # (n_s * n_t, 3), s-major

    def vertex(self, i: int, j: int) -> np.ndarray:
        return self.vertices[i * self.n_t + j]


def theta_at(spec: PencilSpec, s: float, tol: float = THETA_TOL) -> float:
    sign = -1.0 if spec.kind.spacelike_curve else 1.0
    tau = lambda x: frame_at(spec.curve, spec.kind, x).tau
    return spec.theta0 + sign * adaptive_simpson(tau, 0.0, float(s), tol=tol)


def theta_along(spec: PencilSpec, s_values, tol: float = THETA_TOL) -> np.ndarray:
    """theta at increasing s_values, integrating panel by panel from the previous node."""
    sign = -1.0 if spec.kind.spacelike_curve else 1.0
    tau = lambda x: spec.frame(x).tau
    out = np.empty(len(s_values))
    acc, prev = 0.0, 0.0
    for i, s in enumerate(s_values):
        acc += adaptive_simpson(tau, prev, float(s), tol=tol)
        prev = float(s)
        out[i] = spec.theta0 + sign * acc
    return out


def reference_normal(frame: FrenetFrame, theta: float) -> np.ndarray:
    if frame.kind.spacelike_curve:
        return math.cosh(theta) * frame.N + math.sinh(theta) * frame.B
    return math.cos(theta) * frame.N + math.sin(theta) * frame.B


def _point(spec: PencilSpec, frame: FrenetFrame, s: float, t: float) -> np.ndarray:
    u, v, w = (f(s, t) for f in spec._fns[:3])
    return spec.curve.point(s) + u * frame.T + v * frame.N + w * frame.B


def evaluate_surface(spec: PencilSpec, s: float, t: float) -> np.ndarray:
    return _point(spec, spec.frame(s), s, t)


def surface_partials(spec: PencilSpec, s: float, t: float, frame: Optional[FrenetFrame] = None):
    """Exact (dP/ds, dP/dt), using the symbolic frame derivatives."""
    f = frame if frame is not None else spec.frame(s)
    u, v, w, us, vs, ws, ut, vt, wt = spec.marching(s, t)
    Ps = (f.T + us * f.T + u * f.dT + vs * f.N + v * f.dN + ws * f.B + w * f.dB)
    Pt = ut * f.T + vt * f.N + wt * f.B
    return Ps, Pt


# ---------------------------------------------------------------------------
# family conditions


@dataclass
class ConditionRecord:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.threshold


@dataclass
class ConditionReport:
    records: list
    lambda_min_abs: float
    warnings: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def __getitem__(self, name: str) -> ConditionRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)


def coupling_targets(spec: PencilSpec, s: float, theta: float):
    """Right-hand sides (for v, for w) of the coupling equations at s."""
    lam = spec.lam_at(s)
    if spec.kind is CurveKind.SPACELIKE_SPACELIKE_BINORMAL:
        return lam * math.sinh(theta), lam * math.cosh(theta)
    if spec.kind is CurveKind.SPACELIKE_TIMELIKE_BINORMAL:
        return -lam * math.sinh(theta), -lam * math.cosh(theta)
    return lam * math.sin(theta), -lam * math.cos(theta)


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _gauss(f, a, b):
    half, mid = 0.5 * (b - a), 0.5 * (a + b)
    return half * sum(wt * f(mid + half * x) for x, wt in zip(_GL_NODES, _GL_WEIGHTS))


def check_family_conditions(spec: PencilSpec, n_s: int = 101, tol: float = 1e-8) -> ConditionReport:
    ms = spec.ms
    if not isinstance(ms, PolynomialScale):
        raise PencilError("family conditions apply to polynomial/composed marching scales only")
    t0 = spec.t0
    grid = spec.curve.grid(n_s)

    vanish = [abs(ex.evaluate(F, {"t": t0})) for F in (ms.U, ms.V, ms.W)]
    if isinstance(ms, ComposedScale):
        vanish += [abs(x) for x in ms.outer_values()]
    records = [ConditionRecord("vanishing_at_t0", max(vanish), tol)]

    # theta: value at 0, and each grid step against an independent Gauss rule
    sign = -1.0 if spec.kind.spacelike_curve else 1.0
    tau = lambda x: frame_at(spec.curve, spec.kind, x).tau
    thetas = [float(x) for x in theta_along(spec, grid)]
    theta_res = abs(theta_at(spec, 0.0) - spec.theta0)
    for a, b, ta, tb in zip(grid[:-1], grid[1:], thetas[:-1], thetas[1:]):
        theta_res = max(theta_res, abs((tb - ta) - sign * _gauss(tau, a, b)))
    records.append(ConditionRecord("theta", float(theta_res), tol))

    _, gslope, hslope = ms.outer_slopes()
    dV = ex.evaluate(ex.derivative(ms.V, "t"), {"t": t0})
    dW = ex.evaluate(ex.derivative(ms.W, "t"), {"t": t0})
    a21, a31 = ms.a[1][0], ms.a[2][0]
    res_v = res_w = 0.0
    lam_min = math.inf
    for s, theta in zip(grid, thetas):
        rv, rw = coupling_targets(spec, s, theta)
        lv = gslope * a21 * ex.evaluate(ms.m, {"s": s}) * dV
        lw = hslope * a31 * ex.evaluate(ms.n, {"s": s}) * dW
        res_v = max(res_v, abs(lv - rv))
        res_w = max(res_w, abs(lw - rw))
        lam_min = min(lam_min, abs(spec.lam_at(s)))
    records.append(ConditionRecord("coupling_v", res_v, tol))
    records.append(ConditionRecord("coupling_w", res_w, tol))
    report = ConditionReport(records, lam_min)
    if lam_min <= LAMBDA_MIN:
        report.warnings.append(f"lambda vanishes on the grid (min |lambda| = {lam_min:.3g})")
    return report


# ---------------------------------------------------------------------------
# sampling


def sample_grid(spec: PencilSpec, n_s: int, n_t: int, workers: Optional[int] = None) -> SurfaceMesh:
    """Evaluate P on a uniform s-major lattice; ``workers`` > 1 splits rows over threads."""
    if n_s < 2 or n_t < 2:
        raise PencilError("grid needs at least 2 samples per direction")
    s_values = spec.curve.grid(n_s)
    t_values = np.linspace(spec.t_range[0], spec.t_range[1], n_t)

    def row(i):
        s = float(s_values[i])
        f = spec.frame(s)
        out = np.empty((n_t, 3))
        for j, t in enumerate(t_values):
            p = _point(spec, f, s, float(t))
            if not np.all(np.isfinite(p)):
                raise PencilError(f"non-finite surface point at (s, t) = ({s:.9g}, {t:.9g})")
            out[j] = p
        return out

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, range(n_s)))
    else:
        rows = [row(i) for i in range(n_s)]
    return SurfaceMesh(n_s, n_t, s_values, t_values, np.vstack(rows))


def curve_row_index(spec: PencilSpec, mesh: SurfaceMesh) -> Optional[int]:
    """Lattice column holding t = t0, or None when t0 falls between nodes."""
    width = spec.t_range[1] - spec.t_range[0]
    j = int(np.argmin(np.abs(mesh.t_values - spec.t0)))
    if abs(mesh.t_values[j] - spec.t0) <= 1e-12 * width:
        return j
    return None
