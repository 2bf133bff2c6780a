"""Frenet frames of unit-speed curves in Minkowski 3-space.

Structural equations, with g_N = <N, N> and eps = <B, B>:

    spacelike curve:  T' = k N,  N' = eps k T + tau B,  B' = tau N
    timelike curve:   T' = k N,  N' = k T - tau B,      B' = tau N

For a spacelike curve eps = -g_N follows from differentiating <N, T> = 0,
which fixes the sign of the k-term whether N is timelike or spacelike.

Binormal orientation is B = -g_N (T x N). The closed-form frames of the
reference curves (hyperbolic helices, the circle, the timelike hyperbola)
follow this rule, and it gives det[T, N, B] = <T, T>.
Torsion is read off B' = tau N as tau = g_N <B', N>.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import expr as ex
from .minkowski import CausalClass, causal_class, inner, lorentz_cross

__all__ = [
    "CurveError", "NotUnitSpeed", "MixedCausalType", "NullTangent",
    "VanishingCurvature", "CurveKind", "CurveSpec", "FrenetFrame",
    "check_unit_speed", "classify_curve", "frame_at", "torsion_profile",
    "structural_residual", "KAPPA_MIN", "CANCELLATION_LIMIT",
]

KAPPA_MIN = 1e-9
CANCELLATION_LIMIT = 100.0


class CurveError(ValueError):
    pass


class NotUnitSpeed(CurveError):
    def __init__(self, deviation: float):
        super().__init__(f"curve is not unit speed: max ||<r',r'>| - 1| = {deviation:.6g}")
        self.deviation = deviation


class MixedCausalType(CurveError):
    pass


class NullTangent(CurveError):
    pass


class VanishingCurvature(CurveError):
    pass


class CurveKind(enum.Enum):
    SPACELIKE_SPACELIKE_BINORMAL = "spacelike-spacelike-binormal"
    SPACELIKE_TIMELIKE_BINORMAL = "spacelike-timelike-binormal"
    TIMELIKE = "timelike"

    @property
    def spacelike_curve(self) -> bool:
        return self is not CurveKind.TIMELIKE

    @property
    def eps(self) -> int:
        """<B, B> for this kind."""
        return -1 if self is CurveKind.SPACELIKE_TIMELIKE_BINORMAL else 1

    @property
    def signatures(self) -> tuple:
        """Expected (<T,T>, <N,N>, <B,B>)."""
        return {
            CurveKind.SPACELIKE_SPACELIKE_BINORMAL: (1, -1, 1),
            CurveKind.SPACELIKE_TIMELIKE_BINORMAL: (1, 1, -1),
            CurveKind.TIMELIKE: (-1, 1, 1),
        }[self]


@dataclass(frozen=True)
class CurveSpec:
    x: ex.Expression
    y: ex.Expression
    z: ex.Expression
    s_range: tuple
    d1: tuple = field(init=False, repr=False, compare=False)
    d2: tuple = field(init=False, repr=False, compare=False)
    d3: tuple = field(init=False, repr=False, compare=False)
    _fns: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        lo, hi = self.s_range
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise CurveError(f"bad s_range {self.s_range!r}")
        comps = (self.x, self.y, self.z)
        for e in comps:
            extra = ex.variables(e) - {"s"}
            if extra:
                raise CurveError(f"curve component depends on {sorted(extra)}")
        d1 = tuple(ex.derivative(e, "s") for e in comps)
        d2 = tuple(ex.derivative(e, "s") for e in d1)
        d3 = tuple(ex.derivative(e, "s") for e in d2)
        object.__setattr__(self, "s_range", (float(lo), float(hi)))
        object.__setattr__(self, "d1", d1)
        object.__setattr__(self, "d2", d2)
        object.__setattr__(self, "d3", d3)
        fns = {}
        for key, group in (("r", comps), ("d1", d1), ("d2", d2), ("d3", d3)):
            fns[key] = tuple(ex.compile_expr(e, ("s",)) for e in group)
        object.__setattr__(self, "_fns", fns)

    @classmethod
    def from_strings(cls, x: str, y: str, z: str, s_range) -> "CurveSpec":
        p = lambda text: ex.parse(text, {"s"})
        return cls(p(x), p(y), p(z), tuple(s_range))

    def lorentz_sq(self, key: str, s: float, v: np.ndarray) -> float:
        """<v, v> for v = the ``key`` derivative at s.

        When the Euclidean size of v dwarfs the result, the float sum has lost
        most of its digits; the components are then re-evaluated in mpmath.
        """
        q = inner(v, v)
        if float(np.dot(v, v)) <= CANCELLATION_LIMIT * abs(q):
            return q
        import mpmath

        fns = self._mp_fns(key)
        with mpmath.workdps(40):
            x = mpmath.mpf(s)
            a, b, c = (f(x) for f in fns)
            return float(a * a + b * b - c * c)

    def _mp_fns(self, key: str):
        cache = self.__dict__.setdefault("_mp_cache", {})
        if key not in cache:
            cache[key] = tuple(ex.compile_mp(e, ("s",)) for e in getattr(self, key))
        return cache[key]

    def _eval(self, key: str, s: float) -> np.ndarray:
        f0, f1, f2 = self._fns[key]
        return np.array([f0(s), f1(s), f2(s)])

    def point(self, s: float) -> np.ndarray:
        return self._eval("r", s)

    def tangent(self, s: float) -> np.ndarray:
        return self._eval("d1", s)

    def grid(self, n: int) -> np.ndarray:
        return np.linspace(self.s_range[0], self.s_range[1], n)


@dataclass(frozen=True)
class FrenetFrame:
    s: float
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: float
    tau: float
    eps: int
    kind: CurveKind
    # s-derivatives of the frame vectors, from the symbolic r'', r'''
    dT: np.ndarray = field(repr=False)
    dN: np.ndarray = field(repr=False)
    dB: np.ndarray = field(repr=False)


def check_unit_speed(c: CurveSpec, n_samples: int = 101) -> float:
    """Max over a uniform grid of ||<r', r'>| - 1|."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    worst = 0.0
    for s in c.grid(n_samples):
        t = c.tangent(s)
        worst = max(worst, abs(abs(inner(t, t)) - 1.0))
    return worst


def _kind_at(c: CurveSpec, s: float) -> CurveKind:
    T = c.tangent(s)
    tc = causal_class(T)
    if tc is CausalClass.NULL:
        raise NullTangent(f"tangent is null at s={s:.6g}")
    if tc is CausalClass.TIMELIKE:
        return CurveKind.TIMELIKE
    dT = c._eval("d2", s)
    q = c.lorentz_sq("d2", s, dT)
    kappa = math.sqrt(abs(q))
    if kappa < KAPPA_MIN or causal_class(dT) is CausalClass.NULL:
        raise VanishingCurvature(f"principal normal undefined at s={s:.6g} (kappa={kappa:.3g})")
    # B = -g_N T x N has <B,B> = -g_N for a spacelike tangent
    return (CurveKind.SPACELIKE_SPACELIKE_BINORMAL if q < 0
            else CurveKind.SPACELIKE_TIMELIKE_BINORMAL)


def classify_curve(c: CurveSpec, n_samples: int = 101) -> CurveKind:
    """Causal kind of the curve, required to be constant over the sampled range."""
    kinds = {}
    for s in c.grid(n_samples):
        k = _kind_at(c, s)
        kinds.setdefault(k, s)
        # timelike curves still need a principal normal
        frame_at(c, k, s)
    if len(kinds) > 1:
        where = ", ".join(f"{k.value} at s={s:.6g}" for k, s in kinds.items())
        raise MixedCausalType(f"curve changes causal kind over its range: {where}")
    return next(iter(kinds))


def frame_at(c: CurveSpec, kind: CurveKind, s: float) -> FrenetFrame:
    T = c.tangent(s)
    dT = c._eval("d2", s)
    ddT = c._eval("d3", s)
    q = inner(dT, dT)
    ill = float(np.dot(dT, dT)) > CANCELLATION_LIMIT * abs(q)
    if ill:
        q = c.lorentz_sq("d2", s, dT)
    kappa = math.sqrt(abs(q))
    if kappa < KAPPA_MIN or causal_class(dT) is CausalClass.NULL:
        raise VanishingCurvature(f"principal normal undefined at s={s:.6g} (kappa={kappa:.3g})")
    gT, gN, gB = kind.signatures
    if (inner(T, T) > 0) != (gT > 0) or (q > 0) != (gN > 0):
        raise MixedCausalType(f"frame at s={s:.6g} does not have {kind.value} signature")
    if ill:
        return _frame_mp(c, kind, s)
    N = dT / kappa
    B = -gN * lorentz_cross(T, N)
    # kappa kappa' = g_N <T', T''>
    dkappa = gN * inner(dT, ddT) / kappa
    dN = (ddT - (dkappa / kappa) * dT) / kappa
    dB = -gN * lorentz_cross(T, dN)
    tau = gN * inner(dB, N)
    return FrenetFrame(float(s), T, N, B, kappa, tau, gB, kind, dT, dN, dB)


def _frame_mp(c: CurveSpec, kind: CurveKind, s: float) -> FrenetFrame:
    """frame_at in 40-digit arithmetic, rounded once at the end.

    Used where the frame vectors are so much longer than the Lorentzian
    products formed from them that double precision would keep few digits.
    """
    import mpmath

    dot = lambda x, y: x[0] * y[0] + x[1] * y[1] - x[2] * y[2]
    cross = lambda x, y: [x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2],
                          x[1] * y[0] - x[0] * y[1]]
    gN = kind.signatures[1]
    with mpmath.workdps(40):
        x = mpmath.mpf(s)
        T, dT, ddT = ([f(x) for f in c._mp_fns(k)] for k in ("d1", "d2", "d3"))
        kappa = mpmath.sqrt(abs(dot(dT, dT)))
        N = [v / kappa for v in dT]
        B = [-gN * v for v in cross(T, N)]
        dkappa = gN * dot(dT, ddT) / kappa
        dN = [(a - dkappa / kappa * b) / kappa for a, b in zip(ddT, dT)]
        dB = [-gN * v for v in cross(T, dN)]
        tau = gN * dot(dB, N)
        arr = lambda v: np.array([float(a) for a in v])
        return FrenetFrame(float(s), arr(T), arr(N), arr(B), float(kappa), float(tau),
                           kind.signatures[2], kind, arr(dT), arr(dN), arr(dB))


def torsion_profile(c: CurveSpec, kind: CurveKind, grid: Sequence[float]) -> list:
    return [(float(s), frame_at(c, kind, s).tau) for s in grid]


def structural_residual(c: CurveSpec, kind: CurveKind, s: float, h: float = 1e-5) -> float:
    """Euclidean max-norm mismatch of the structural equations, with the frame
    derivatives taken by central differences of step ``h``."""
    f = frame_at(c, kind, s)
    fp = frame_at(c, kind, s + h)
    fm = frame_at(c, kind, s - h)
    dT = (fp.T - fm.T) / (2 * h)
    dN = (fp.N - fm.N) / (2 * h)
    dB = (fp.B - fm.B) / (2 * h)
    if kind.spacelike_curve:
        rhs_N = f.eps * f.kappa * f.T + f.tau * f.B
    else:
        rhs_N = f.kappa * f.T - f.tau * f.B
    return float(max(np.max(np.abs(dT - f.kappa * f.N)),
                     np.max(np.abs(dN - rhs_N)),
                     np.max(np.abs(dB - f.tau * f.N))))
