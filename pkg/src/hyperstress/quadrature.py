"""Gauss quadrature on segments, triangles and tetrahedra.

Rules are generated from 1-D Gauss-Legendre nodes; the simplex rules use
the collapsed (Duffy) product construction, so a rule of requested degree
integrates every polynomial of that total degree exactly.  Degrees are
capped to keep point counts sane; requests beyond the cap raise.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_DEGREE = 60

__all__ = ["MAX_DEGREE", "QuadratureError", "segment_rule", "triangle_rule", "tetrahedron_rule"]


class QuadratureError(ValueError):
    pass


def _check_degree(degree: int) -> int:
    degree = int(degree)
    if degree < 0:
        raise QuadratureError("quadrature degree must be >= 0")
    if degree > MAX_DEGREE:
        raise QuadratureError(f"requested degree {degree} exceeds available rules (max {MAX_DEGREE})")
    return degree


@lru_cache(maxsize=None)
def _gauss01(npts: int):
    x, w = np.polynomial.legendre.leggauss(npts)
    return 0.5 * (x + 1.0), 0.5 * w


@lru_cache(maxsize=None)
def segment_rule(degree: int):
    """Nodes/weights on [0, 1], exact for polynomials of the given degree."""
    degree = _check_degree(degree)
    return _gauss01(degree // 2 + 1)


@lru_cache(maxsize=None)
def triangle_rule(degree: int):
    """Nodes (m, 2) and weights on the reference triangle x,y>=0, x+y<=1.

    Weights sum to 1/2.  Collapsed coordinates: x = u, y = v(1-u) with
    Jacobian (1-u), so exactness needs one extra degree in u.
    """
    degree = _check_degree(degree)
    u, wu = _gauss01((degree + 2) // 2 + 1)
    v, wv = _gauss01((degree + 1) // 2 + 1)
    pts, wts = [], []
    for ui, wui in zip(u, wu):
        for vj, wvj in zip(v, wv):
            pts.append((ui, vj * (1.0 - ui)))
            wts.append(wui * wvj * (1.0 - ui))
    return np.array(pts), np.array(wts)


@lru_cache(maxsize=None)
def tetrahedron_rule(degree: int):
    """Nodes (m, 3) and weights on the reference tetrahedron; weights sum to 1/6."""
    degree = _check_degree(degree)
    u, wu = _gauss01((degree + 3) // 2 + 1)
    v, wv = _gauss01((degree + 2) // 2 + 1)
    w, ww = _gauss01((degree + 1) // 2 + 1)
    pts, wts = [], []
    for ui, wui in zip(u, wu):
        for vj, wvj in zip(v, wv):
            for wk, wwk in zip(w, ww):
                pts.append((ui, vj * (1.0 - ui), wk * (1.0 - ui) * (1.0 - vj)))
                wts.append(wui * wvj * wwk * (1.0 - ui) ** 2 * (1.0 - vj))
    return np.array(pts), np.array(wts)
