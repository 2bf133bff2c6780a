"""Reference surface pencils, stored as configuration documents.

P1  hyperbolic helix (a = b = 1, c = sqrt 2), cubic family, lambda = 1
P2  helix (sqrt3/2 sinh s, s/2, sqrt3/2 cosh s) with u = t, v = sinh(-s/2) t,
    w = cosh(-s/2) t, evaluated through the frame.
P3  unit circle, u = sin t, v = 0, w = -sinh(ts), lambda = s
P4  unit circle, quartic family, lambda = -cosh s
P5  timelike hyperbola, u = sinh t, v = 0, w = cosh(st), lambda = -s.
    w does not vanish at t = 0, so the surface misses the curve by one unit.
P5c P5 with w = sinh(st), which vanishes at t = 0 and keeps the same lambda.
P6  timelike hyperbola, quartic family, lambda = -sinh s. lambda vanishes at
    s = 0, where the surface has no tangent plane.

lambda = +-s vanishes at s = 0, so P3, P5 and P5c start at s = 0.1.
"""

from __future__ import annotations

import copy

from .config import spec_from_dict
from .pencil import PencilSpec

__all__ = ["FIXTURES", "EXPECTED_PASS", "fixture_config", "fixture"]

_HELIX_31 = {"x": "sinh(s / sqrt(2))", "y": "s / sqrt(2)", "z": "cosh(s / sqrt(2))",
             "s_range": [-2.0, 2.0]}
_HELIX_32 = {"x": "sqrt(3) / 2 * sinh(s)", "y": "s / 2", "z": "sqrt(3) / 2 * cosh(s)",
             "s_range": [0.0, 6.283185307179586]}
_CIRCLE = {"x": "cos(s)", "y": "sin(s)", "z": "0"}
_HYPERBOLA = {"x": "cosh(s)", "y": "0", "z": "sinh(s)"}
_TWO_PI = 6.283185307179586

FIXTURES = {
    "P1": {
        "curve": _HELIX_31, "t_range": [-1.0, 1.0], "t0": 0.0, "theta0": 0.0, "lambda": "1",
        "marching_scale": {"polynomial": {
            "p": 3, "a": [[0, 0, 0], [1, 0, 0], [1, 0, 0]],
            "l": "1", "m": "sinh(-s / 2)", "n": "cosh(-s / 2)",
            "U": "t", "V": "t", "W": "t"}},
    },
    "P2": {
        "curve": _HELIX_32, "t_range": [-2.0, 2.0], "t0": 0.0, "theta0": 0.0, "lambda": "1",
        "marching_scale": {"direct": {
            "u": "t", "v": "sinh(-s / 2) * t", "w": "cosh(-s / 2) * t"}},
    },
    "P3": {
        "curve": {**_CIRCLE, "s_range": [0.1, _TWO_PI]}, "t_range": [-1.0, 1.0], "t0": 0.0,
        "lambda": "s",
        "marching_scale": {"direct": {"u": "sin(t)", "v": "0", "w": "-sinh(t * s)"}},
    },
    "P4": {
        "curve": {**_CIRCLE, "s_range": [-1.1, 1.1]}, "t_range": [-0.7, 0.2], "t0": 0.0,
        "lambda": "-cosh(s)",
        "marching_scale": {"polynomial": {
            "p": 4, "a": [[1, 1, 1, 1], [0, 0, 0, 0], [1, 1, 1, 1]],
            "l": "sin(s)", "m": "0", "n": "cosh(s)",
            "U": "sin(t)", "V": "t", "W": "sinh(t)"}},
    },
    "P5": {
        "curve": {**_HYPERBOLA, "s_range": [0.1, _TWO_PI]}, "t_range": [-1.0, 1.0], "t0": 0.0,
        "lambda": "-s",
        "marching_scale": {"direct": {"u": "sinh(t)", "v": "0", "w": "cosh(s * t)"}},
    },
    "P5c": {
        "curve": {**_HYPERBOLA, "s_range": [0.1, _TWO_PI]}, "t_range": [-1.0, 1.0], "t0": 0.0,
        "lambda": "-s",
        "marching_scale": {"direct": {"u": "sinh(t)", "v": "0", "w": "sinh(s * t)"}},
    },
    "P6": {
        "curve": {**_HYPERBOLA, "s_range": [-1.0, 1.0]}, "t_range": [-0.4, 0.4], "t0": 0.0,
        "lambda": "-sinh(s)",
        "marching_scale": {"polynomial": {
            "p": 4, "a": [[1, 1, 1, 1], [0, 0, 0, 0], [1, 1, 1, 1]],
            "l": "1", "m": "0", "n": "sinh(s)",
            "U": "sinh(t)", "V": "t", "W": "sinh(t)"}},
    },
}

EXPECTED_PASS = {name: name != "P5" for name in FIXTURES}


def fixture_config(name: str) -> dict:
    try:
        doc = copy.deepcopy(FIXTURES[name])
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}") from None
    doc["name"] = name
    return doc


def fixture(name: str) -> PencilSpec:
    return spec_from_dict(fixture_config(name))
