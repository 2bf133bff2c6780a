"""Command-line interface: ``lorentz-pencil {build,verify,examples,info}``.

Exit status: 0 on success or passing verification, 1 on failed
verification, 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from . import expr as ex
from .config import load_config
from .fixtures import EXPECTED_PASS, FIXTURES, fixture
from .frenet import CurveError, torsion_profile
from .objfile import export_obj
from .pencil import PencilError, PencilSpec, SurfaceMesh, curve_row_index, sample_grid, theta_at
from .verify import Tolerances, VerificationReport, verify_all

__all__ = ["main", "run_example", "build_mesh"]

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _UsageError(Exception):
    pass


def build_mesh(spec: PencilSpec, path=None, workers: Optional[int] = None) -> SurfaceMesh:
    """Sample ``spec`` on its grid and, if ``path`` is given, export it as OBJ."""
    mesh = sample_grid(spec, *spec.grid, workers=workers)
    if path is not None:
        j = curve_row_index(spec, mesh)
        row = j if j is not None else np.array([spec.curve.point(s) for s in mesh.s_values])
        export_obj(mesh, row, path)
    return mesh


def _tolerances(spec: PencilSpec, overrides: Sequence[str] = ()) -> Tolerances:
    tol = Tolerances.default().override(spec.tolerances)
    extra = {}
    for item in overrides:
        key, sep, value = item.partition("=")
        if not sep:
            raise _UsageError(f"--tol expects name=value, got {item!r}")
        try:
            extra[key] = float(value)
        except ValueError:
            raise _UsageError(f"--tol {key}: not a number: {value!r}") from None
    try:
        return tol.override(extra)
    except ValueError as e:
        raise _UsageError(str(e)) from None


def _verify(spec: PencilSpec, overrides: Sequence[str] = ()) -> VerificationReport:
    return verify_all(spec, _tolerances(spec, overrides), surface_grid=spec.grid)


def run_example(name: str, outdir=None, workers: Optional[int] = None):
    """Build, verify and optionally export one reference fixture."""
    spec = fixture(name)
    path = Path(outdir) / f"{name}.obj" if outdir is not None else None
    mesh = build_mesh(spec, path, workers)
    return mesh, _verify(spec)


def _cmd_build(args) -> int:
    spec = load_config(args.config)
    mesh = build_mesh(spec, args.output, args.workers)
    print(f"wrote {args.output}: {mesh.n_s * mesh.n_t} vertices, "
          f"{(mesh.n_s - 1) * (mesh.n_t - 1)} faces")
    return EXIT_OK


def _cmd_verify(args) -> int:
    spec = load_config(args.config)
    report = _verify(spec, args.tol)
    sys.stdout.write(report.to_json() + "\n" if args.json else report.to_text())
    return EXIT_OK if report.overall else EXIT_FAIL


def _cmd_examples(args) -> int:
    names = [args.name] if args.name else list(FIXTURES)
    if args.outdir:
        Path(args.outdir).mkdir(parents=True, exist_ok=True)
    status = EXIT_OK
    docs = []
    for name in names:
        _, report = run_example(name, args.outdir, args.workers)
        expected = EXPECTED_PASS[name]
        if report.overall != expected:
            status = EXIT_FAIL
        if args.json:
            docs.append(json.loads(report.to_json()) | {"expected": expected})
            continue
        verdict = "PASS" if report.overall else "FAIL"
        note = "" if report.overall else "  failed: " + ", ".join(report.failed)
        tag = "" if report.overall == expected else "  UNEXPECTED"
        print(f"{name:<4} {verdict}  (expected {'PASS' if expected else 'FAIL'}){tag}{note}")
    if args.json:
        print(json.dumps(docs, indent=2))
    return status


def _cmd_info(args) -> int:
    spec = load_config(args.config)
    grid = spec.curve.grid(spec.grid[0])
    prof = torsion_profile(spec.curve, spec.kind, grid)
    kappas = [spec.frame(s).kappa for s in grid]
    taus = [t for _, t in prof]
    lo, hi = spec.curve.s_range
    print(f"curve kind   {spec.kind.value}")
    print(f"surface      {'spacelike' if spec.spacelike_surface else 'timelike'}")
    print(f"s range      [{lo:.9g}, {hi:.9g}]")
    print(f"kappa        min {min(kappas):.9g}  max {max(kappas):.9g}")
    print(f"tau          min {min(taus):.9g}  max {max(taus):.9g}")
    print(f"theta(s)     {theta_at(spec, lo):.9g} at s={lo:.9g}, {theta_at(spec, hi):.9g} at s={hi:.9g}")
    print(f"u, v, w      {', '.join(ex.to_string(e) for e in spec.exprs[:3])}")
    print(f"lambda       {ex.to_string(spec.lam)}")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lorentz-pencil",
                                description="Surface pencils with a common line of curvature in Minkowski 3-space.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="sample a config and write an OBJ mesh")
    b.add_argument("config")
    b.add_argument("-o", "--output", required=True, help="OBJ file to write")
    b.add_argument("--workers", type=int, default=None, help="threads for grid evaluation")
    b.set_defaults(func=_cmd_build)

    v = sub.add_parser("verify", help="check that the curve is a line of curvature")
    v.add_argument("config")
    v.add_argument("--json", action="store_true", help="emit the report as JSON")
    v.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override one residual threshold (repeatable)")
    v.set_defaults(func=_cmd_verify)

    e = sub.add_parser("examples", help="build and verify the reference fixtures")
    e.add_argument("name", nargs="?", choices=list(FIXTURES))
    e.add_argument("--outdir", help="directory for <name>.obj files")
    e.add_argument("--json", action="store_true")
    e.add_argument("--workers", type=int, default=None)
    e.set_defaults(func=_cmd_examples)

    i = sub.add_parser("info", help="curve kind, curvature and torsion summary")
    i.add_argument("config")
    i.set_defaults(func=_cmd_info)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except _UsageError as e:
        print(f"lorentz-pencil: {e}", file=sys.stderr)
    except (OSError, CurveError, PencilError, ex.ExprError, ValueError) as e:
        # ConfigError and NotUnitSpeed are ValueErrors
        print(f"lorentz-pencil: {type(e).__name__}: {e}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
