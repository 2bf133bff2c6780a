"""Wavefront OBJ output for sampled surfaces."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path
from typing import Union

import numpy as np

from .pencil import SurfaceMesh

__all__ = ["HEADER", "obj_text", "export_obj", "read_obj"]

HEADER = "# lorentz-pencil v1"


def _v(p) -> str:
    # + 0.0 turns -0.0 into 0.0
    x, y, z = (float(c) + 0.0 for c in p)
    return "v %.9g %.9g %.9g" % (x, y, z)


def obj_text(mesh: SurfaceMesh, curve_row: Union[int, np.ndarray, None] = None) -> str:
    """OBJ document for ``mesh``.

    ``curve_row`` is either the lattice column index j holding the curve, whose
    vertices are then referenced by the polyline, or an (n, 3) array of curve
    points appended as extra vertices. ``None`` omits the polyline.
    """
    n_s, n_t = mesh.n_s, mesh.n_t
    lines = [HEADER]
    lines.extend(_v(p) for p in mesh.vertices)
    for i in range(n_s - 1):
        for j in range(n_t - 1):
            a = i * n_t + j + 1
            lines.append(f"f {a} {a + n_t} {a + n_t + 1} {a + 1}")
    if curve_row is not None:
        if isinstance(curve_row, (int, np.integer)):
            if not 0 <= curve_row < n_t:
                raise IndexError(f"curve row {curve_row} outside 0..{n_t - 1}")
            idx = [i * n_t + int(curve_row) + 1 for i in range(n_s)]
        else:
            pts = np.asarray(curve_row, dtype=float).reshape(-1, 3)
            base = n_s * n_t
            lines.extend(_v(p) for p in pts)
            idx = list(range(base + 1, base + len(pts) + 1))
        lines.append("l " + " ".join(map(str, idx)))
    return "\n".join(lines) + "\n"


def export_obj(mesh: SurfaceMesh, curve_row, path) -> None:
    """Write ``obj_text(mesh, curve_row)`` to ``path`` via a temp file and rename."""
    path = Path(path)
    data = obj_text(mesh, curve_row).encode("ascii")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent or ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_obj(path) -> tuple:
    """(vertices (n, 3), faces as 1-based index tuples, polyline indices or None)."""
    verts, faces, line = [], [], None
    for raw in Path(path).read_text(encoding="ascii").splitlines():
        head, _, rest = raw.partition(" ")
        if head == "v":
            verts.append([float(x) for x in rest.split()])
        elif head == "f":
            faces.append(tuple(int(x) for x in rest.split()))
        elif head == "l":
            line = [int(x) for x in rest.split()]
    return np.array(verts, dtype=float).reshape(-1, 3), faces, line

