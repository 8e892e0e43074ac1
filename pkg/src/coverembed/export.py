"""Plot-ready text exports: CSV point samples, OBJ meshes, spiral traces."""
from __future__ import annotations

import io

import numpy as np

from .construct import AmbientMap
from .errors import ConfigError
from .sampling import Sampler

__all__ = ["samples_csv", "mesh_obj", "spiral_csv"]

FMT = "%.17g"


def _rows(buf, arr):
    np.savetxt(buf, arr, fmt=FMT, delimiter=",")


def samples_csv(m: AmbientMap, sampler: Sampler) -> str:
    """One sample per line: domain coordinates then image coordinates."""
    X = sampler.points(m.n, "export")
    head = [f"x{i + 1}" for i in range(m.n)] + [f"y{k + 1}" for k in range(m.D)]
    buf = io.StringIO()
    buf.write(",".join(head) + "\n")
    _rows(buf, np.hstack([X, m(X)]))
    return buf.getvalue()


def mesh_obj(m: AmbientMap, window: float, resolution: int = 128, coords=(0, 1, 2),
             config_hash: str = "") -> str:
    """
    ``resolution x resolution`` grid over ``[-window, window]^2`` pushed through
    ``m``; vertices are the selected coordinate triple, faces are quads.
    """
    if m.n != 2:
        raise ConfigError(f"OBJ export needs a 2-dimensional domain, map is on R^{m.n}")
    coords = [int(c) for c in coords]
    if max(coords) >= m.D:
        raise ConfigError(f"export.coords {coords} out of range for D = {m.D}")
    t = np.linspace(-window, window, resolution)
    U, W = np.meshgrid(t, t, indexing="ij")
    P = m(np.stack([U.ravel(), W.ravel()], axis=-1))[:, coords]
    buf = io.StringIO()
    buf.write(f"# coverembed mesh, map {m.tag}, D = {m.D}\n")
    buf.write(f"# config sha256 {config_hash}\n")
    buf.write(f"# coordinates {coords[0]} {coords[1]} {coords[2]} (0-based), "
              f"grid {resolution}x{resolution}, window {window!r}\n")
    for p in P:
        buf.write("v " + " ".join(FMT % c for c in p) + "\n")
    idx = np.arange(resolution * resolution).reshape(resolution, resolution) + 1
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[1:, 1:].ravel(), idx[:-1, 1:].ravel()
    for q in zip(a, b, c, d):
        buf.write("f %d %d %d %d\n" % q)
    return buf.getvalue()


def spiral_csv(curve, lo: float = -20.0, hi: float = 20.0, count: int = 2001) -> str:
    s = np.linspace(lo, hi, count)
    buf = io.StringIO()
    buf.write("s,x,y\n")
    _rows(buf, np.column_stack([s, curve.point(s)]))
    return buf.getvalue()
