"""Random expression trees and reference curves shared by the test modules."""

from __future__ import annotations

import math

import numpy as np
from hypothesis import strategies as st

from lorentz_pencil import expr as ex
from lorentz_pencil.frenet import CurveSpec

# smooth everywhere, so first and second derivatives exist wherever e does
SMOOTH_UNARY = ("neg", "sin", "cos", "sinh", "cosh", "tanh", "exp")
BINARY = ("+", "-", "*", "/")

leaves = st.one_of(
    st.sampled_from([ex.Var("s"), ex.Var("t")]),
    st.floats(-3, 3, allow_nan=False).map(lambda v: ex.Const(round(v, 3))),
)


def _extend(children):
    return st.one_of(
        st.builds(ex.Unary, st.sampled_from(SMOOTH_UNARY), children),
        st.builds(ex.Binary, st.sampled_from(BINARY), children, children),
        st.builds(ex.Pow, children, st.sampled_from([0.0, 1.0, 2.0, 3.0])),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


def depth(e: ex.Expression) -> int:
    if isinstance(e, ex.Unary):
        return 1 + depth(e.arg)
    if isinstance(e, ex.Pow):
        return 1 + depth(e.base)
    if isinstance(e, ex.Binary):
        return 1 + max(depth(e.left), depth(e.right))
    return 0


def bounded(e: ex.Expression, env: dict, limit: float = 1e4) -> bool:
    """True when every subexpression of e evaluates finitely with |value| <= limit
    and no divisor comes within 1e-3 of zero."""
    try:
        v = ex.evaluate(e, env)
    except ex.ExprError:
        return False
    if not (math.isfinite(v) and abs(v) <= limit):
        return False
    if isinstance(e, ex.Unary):
        return bounded(e.arg, env, limit)
    if isinstance(e, ex.Pow):
        return bounded(e.base, env, limit)
    if isinstance(e, ex.Binary):
        if e.op == "/" and abs(ex.evaluate(e.right, env)) < 1e-3:
            return False
        return bounded(e.left, env, limit) and bounded(e.right, env, limit)
    return True


def random_tree(rng: np.random.Generator, max_depth: int = 6) -> ex.Expression:
    """Numpy-driven generator used where a fixed case count is needed."""
    if max_depth == 0 or rng.random() < 0.25:
        if rng.random() < 0.6:
            return ex.Var("s" if rng.random() < 0.6 else "t")
        return ex.Const(round(float(rng.uniform(-3, 3)), 3))
    r = rng.random()
    if r < 0.4:
        return ex.Unary(SMOOTH_UNARY[rng.integers(len(SMOOTH_UNARY))], random_tree(rng, max_depth - 1))
    if r < 0.85:
        return ex.Binary(BINARY[rng.integers(len(BINARY))],
                         random_tree(rng, max_depth - 1), random_tree(rng, max_depth - 1))
    return ex.Pow(random_tree(rng, max_depth - 1), float(rng.integers(0, 4)))


def central_difference(e: ex.Expression, env: dict, name: str, h: float = 1e-6) -> float:
    hi = dict(env, **{name: env[name] + h})
    lo = dict(env, **{name: env[name] - h})
    return (ex.evaluate(e, hi) - ex.evaluate(e, lo)) / (2 * h)


# reference curves -----------------------------------------------------------

SQRT2 = math.sqrt(2.0)


def helix_31(a: float = 1.0, b: float = 1.0, s_range=(-2.0, 2.0)) -> CurveSpec:
    """(a sinh(s/c), b s/c, a cosh(s/c)), c^2 = a^2 + b^2."""
    c = math.sqrt(a * a + b * b)
    return CurveSpec.from_strings(f"{a!r} * sinh(s / {c!r})", f"{b!r} * s / {c!r}",
                                  f"{a!r} * cosh(s / {c!r})", s_range)


def helix_32(s_range=(0.0, 2 * math.pi)) -> CurveSpec:
    return CurveSpec.from_strings("sqrt(3) / 2 * sinh(s)", "s / 2", "sqrt(3) / 2 * cosh(s)", s_range)


def circle(s_range=(0.0, 2 * math.pi)) -> CurveSpec:
    return CurveSpec.from_strings("cos(s)", "sin(s)", "0", s_range)


def hyperbola(s_range=(-1.0, 1.0)) -> CurveSpec:
    return CurveSpec.from_strings("cosh(s)", "0", "sinh(s)", s_range)


def circular_helix(a: float, b: float, s_range=(-1.0, 1.0)) -> CurveSpec:
    """(a cos(s/c), a sin(s/c), b s/c) with c^2 = |a^2 - b^2|.

    Spacelike with timelike binormal when a > b, timelike when b > a.
    """
    c = math.sqrt(abs(a * a - b * b))
    return CurveSpec.from_strings(f"{a!r} * cos(s / {c!r})", f"{a!r} * sin(s / {c!r})",
                                  f"{b!r} * s / {c!r}", s_range)
