"""Fixed-dimension (3D) tensor algebra used by the contact-force calculus.

Index conventions (everything else in the package depends on them):

    (C.a)_{ij}    = C_{ijk} a_k          right contraction of a 3-tensor
    ((C.a).b)_i   = C_{ijk} b_j a_k      then left contraction with b
    (grad U)_{ij} = dU_i / dx_j
    M : N         = M_{ij} N_{ij}
    (M : C)_k     = M_{ij} C_{ijk}
    (div M)_i     = d_j M_{ij}

They are chosen so that the pairing identity  gradU : (C.n) = (gradU : C).n
holds componentwise, which the flux/divergence bridge between surface and
bulk power requires.
"""

from __future__ import annotations

import numpy as np

UNIT_TOL = 1e-12

__all__ = [
    "UNIT_TOL",
    "vec3",
    "unit",
    "require_unit",
    "contract3_vv",
    "contract3_t2",
    "right_symmetrize",
    "left_symmetrize",
    "projector",
    "rotation_about",
]


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """A finite 3-vector as a float array."""
    v = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("vector components must be finite")
    return v


def unit(v) -> np.ndarray:
    """Normalize ``v``; error on (near-)zero input."""
    v = np.asarray(v, dtype=float)
    norm = float(np.linalg.norm(v))
    if norm < 1e-300:
        raise ValueError("cannot normalize a zero vector")
    return v / norm


def require_unit(v, tol: float = UNIT_TOL, name: str = "n") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
    if abs(float(np.linalg.norm(v)) - 1.0) > tol:
        raise ValueError(f"{name} must be a unit vector (|{name}| = 1 within {tol:g})")
    return v


def contract3_vv(C, a, b) -> np.ndarray:
    """((C.a).b)_i = C_{ijk} b_j a_k, i.e. contract a on the last slot, b on the middle."""
    return np.einsum("ijk,j,k->i", np.asarray(C, float), np.asarray(b, float), np.asarray(a, float))


def contract3_t2(C, M) -> np.ndarray:
    """(M : C)_k = M_{ij} C_{ijk}."""
    return np.einsum("ij,ijk->k", np.asarray(M, float), np.asarray(C, float))


def right_symmetrize(C) -> np.ndarray:
    """Symmetrize the last two slots: (C_{ijk} + C_{ikj}) / 2.  Idempotent."""
    C = np.asarray(C, dtype=float)
    return 0.5 * (C + C.swapaxes(1, 2))


def left_symmetrize(C) -> np.ndarray:
    """Symmetrize the first two slots: (C_{ijk} + C_{jik}) / 2.  Idempotent."""
    C = np.asarray(C, dtype=float)
    return 0.5 * (C + C.swapaxes(0, 1))


def projector(n) -> np.ndarray:
    """Projector onto the plane orthogonal to the unit vector n: Id - n (x) n."""
    n = require_unit(n)
    return np.eye(3) - np.outer(n, n)


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rotation matrix about a unit axis (Rodrigues form)."""
    k = require_unit(axis, name="axis")
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
