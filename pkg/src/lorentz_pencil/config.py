"""JSON configuration documents for pencil specifications."""

from __future__ import annotations

import json
import math
from dataclasses import fields
from pathlib import Path

import jsonschema

from . import expr as ex
from .frenet import CurveSpec, NotUnitSpeed, check_unit_speed
from .pencil import ComposedScale, DirectScale, PencilError, PencilSpec, PolynomialScale
from .verify import Tolerances

__all__ = ["ConfigError", "SCHEMA", "load_config", "spec_from_dict"]

_STR = {"type": "string"}
_NUM = {"type": "number"}
_RANGE = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}


def _obj(props: dict, required=None) -> dict:
    return {"type": "object", "properties": props, "additionalProperties": False,
            "required": list(props) if required is None else required}


_POLY = {"p": {"type": "integer", "minimum": 1},
         "a": {"type": "array", "items": {"type": "array", "items": _NUM}},
         **{k: _STR for k in ("l", "m", "n", "U", "V", "W")}}

SCHEMA = _obj({
    "name": _STR,
    "curve": _obj({"x": _STR, "y": _STR, "z": _STR, "s_range": _RANGE}),
    "t_range": _RANGE,
    "t0": _NUM,
    "theta0": _NUM,
    "lambda": _STR,
    "marching_scale": {
        **_obj({"direct": _obj({"u": _STR, "v": _STR, "w": _STR}),
                "polynomial": _obj(_POLY),
                "composed": _obj({**_POLY, "f": _STR, "g": _STR, "h": _STR})},
               required=[]),
        "minProperties": 1, "maxProperties": 1,
    },
    "grid": _obj({"ns": {"type": "integer", "minimum": 2},
                  "nt": {"type": "integer", "minimum": 2}}, required=[]),
    "tolerances": _obj({f.name: {"type": "number", "exclusiveMinimum": 0}
                        for f in fields(Tolerances)}, required=[]),
}, required=["curve", "t_range", "t0", "marching_scale"])


class ConfigError(ValueError):
    """Invalid configuration; ``pointer`` is the JSON pointer of the offending value."""

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


def _pointer(parts) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def _schema_error(doc) -> None:
    err = jsonschema.exceptions.best_match(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc))
    if err is None:
        return
    path = list(err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        raise ConfigError(_pointer(path + extra[:1]), f"unknown key {extra[0]!r}")
    if err.validator in ("minProperties", "maxProperties") and path == ["marching_scale"]:
        raise ConfigError(_pointer(path), "exactly one of 'direct', 'polynomial', 'composed' is required")
    raise ConfigError(_pointer(path), err.message)


def _expr(doc_value: str, pointer: str, allowed) -> ex.Expression:
    try:
        return ex.parse(doc_value, allowed)
    except ex.ExprSyntaxError as e:
        raise ConfigError(pointer, f"{e} (offset {e.offset})") from e
    except ex.ExprError as e:
        raise ConfigError(pointer, str(e)) from e


def _ordered(rng, pointer):
    lo, hi = rng
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise ConfigError(pointer, f"range must be finite and increasing, got {rng!r}")
    return float(lo), float(hi)


def _polynomial(d: dict, base: str, composed: bool):
    p = d["p"]
    a = d["a"]
    if len(a) != 3 or any(len(row) != p for row in a):
        raise ConfigError(base + "/a", f"coefficient matrix must be 3 x {p}")
    kw = {k: _expr(d[k], f"{base}/{k}", {"s"}) for k in "lmn"}
    kw.update({k: _expr(d[k], f"{base}/{k}", {"t"}) for k in "UVW"})
    if composed:
        kw.update({k: _expr(d[k], f"{base}/{k}", {"x"}) for k in "fgh"})
        return ComposedScale(p, a, **kw)
    return PolynomialScale(p, a, **kw)


def spec_from_dict(doc: dict, name: str = "") -> PencilSpec:
    """Validate a parsed configuration document and build the spec."""
    _schema_error(doc)
    tol = Tolerances.default().override(doc.get("tolerances"))

    c = doc["curve"]
    s_range = _ordered(c["s_range"], "/curve/s_range")
    curve = CurveSpec(*(_expr(c[k], f"/curve/{k}", {"s"}) for k in "xyz"), s_range)
    t_range = _ordered(doc["t_range"], "/t_range")
    t0 = float(doc["t0"])
    if not t_range[0] <= t0 <= t_range[1]:
        raise ConfigError("/t0", f"t0={t0:g} lies outside t_range [{t_range[0]:g}, {t_range[1]:g}]")

    dev = check_unit_speed(curve)
    if dev > tol.unit_speed:
        raise NotUnitSpeed(dev)

    (variant, body), = doc["marching_scale"].items()
    base = f"/marching_scale/{variant}"
    if variant == "direct":
        ms = DirectScale(*(_expr(body[k], f"{base}/{k}", {"s", "t"}) for k in "uvw"))
    else:
        ms = _polynomial(body, base, variant == "composed")

    lam = _expr(doc.get("lambda", "1"), "/lambda", {"s"})
    grid = doc.get("grid", {})
    try:
        return PencilSpec(curve, ms, t0, t_range, theta0=float(doc.get("theta0", 0.0)), lam=lam,
                          name=doc.get("name", name), grid=(grid.get("ns", 101), grid.get("nt", 41)),
                          tolerances=doc.get("tolerances"))
    except PencilError as e:
        raise ConfigError("", str(e)) from e


def load_config(path) -> PencilSpec:
    """Read and validate a JSON config. Raises ConfigError, NotUnitSpeed or CurveError."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError("", f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    return spec_from_dict(doc, name=path.stem)
