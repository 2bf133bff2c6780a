"""Adaptive Simpson quadrature."""

from __future__ import annotations

from typing import Callable

__all__ = ["QuadratureError", "adaptive_simpson"]


class QuadratureError(ArithmeticError):
    pass


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = 1e-10, max_depth: int = 20) -> float:
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Each panel is split until the two-half estimate agrees with the whole-panel
    estimate to 15*tol (the Richardson bound), then the extrapolated value is
    kept. Raises :class:`QuadratureError` when a panel still disagrees after
    ``max_depth`` bisections. ``b < a`` gives the negated integral.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    return _refine(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _refine(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
    right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(
            f"adaptive Simpson did not converge on [{a:.6g}, {b:.6g}] "
            f"(panel error {abs(delta) / 15.0:.3g} > {tol:.3g})")
    return (_refine(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _refine(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))
