"""Rebuilding the hyperstress from coordinate-plane and coordinate-edge probes.

Probing a stress state at a point yields the normal tractions on the three
coordinate planes and the edge forces on the three coordinate edge shapes.
The quadratic interpolation formula reproduces the traction for every unit
normal, and two explicit assemblies rebuild a hyperstress tensor with
right- or left-side symmetry; the two differ by a right-antisymmetric
gauge term, so all derived contact densities agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .contact import StressState, edge_force, normal_traction
from .geometry import coordinate_edge_shapes
from .tensor import left_symmetrize, require_unit

__all__ = [
    "CoordinateProbes",
    "probe",
    "traction_from_probes",
    "build_right_symmetric",
    "build_left_symmetric",
]


@dataclass(frozen=True)
class CoordinateProbes:
    """Point probes: tractions G(x0, e_i) and edge forces on the coordinate edge shapes."""

    plane_tractions: tuple  # G(x0, e1), G(x0, e2), G(x0, e3)
    edge_forces: tuple  # on shapes (-e2,-e3,e1), (-e3,-e1,e2), (-e1,-e2,e3)
    x0: np.ndarray


def probe(state: StressState, x0) -> CoordinateProbes:
    """Evaluate the derived densities on the coordinate shapes at a point."""
    x0 = np.asarray(x0, dtype=float)
    e = np.eye(3)
    tractions = tuple(normal_traction(state, x0, e[i]) for i in range(3))
    forces = tuple(edge_force(state, x0, d) for d in coordinate_edge_shapes())
    return CoordinateProbes(tractions, forces, x0)


def traction_from_probes(p: CoordinateProbes, n) -> np.ndarray:
    """Traction for an arbitrary unit normal from the six coordinate probes:

        G(n) = F1 n2 n3 + F2 n3 n1 + F3 n1 n2 + sum_i G(e_i) n_i^2

    Even in n, and equal to (C.n).n for the probed state.
    """
    n = require_unit(n)
    F1, F2, F3 = p.edge_forces
    G1, G2, G3 = p.plane_tractions
    return (
        F1 * (n[1] * n[2])
        + F2 * (n[2] * n[0])
        + F3 * (n[0] * n[1])
        + G1 * n[0] ** 2
        + G2 * n[1] ** 2
        + G3 * n[2] ** 2
    )


def _sym_pair(j: int, k: int) -> np.ndarray:
    M = np.zeros((3, 3))
    M[j, k] += 1.0
    M[k, j] += 1.0
    return M


def build_right_symmetric(p: CoordinateProbes) -> np.ndarray:
    """Hyperstress with C_{ijk} = C_{ikj} reproducing the probes:

        C = 1/2 sum_cyc F_i (x) (e_j (x) e_k + e_k (x) e_j) + sum_i G_i (x) e_i (x) e_i.
    """
    C = np.zeros((3, 3, 3))
    pairs = [(1, 2), (2, 0), (0, 1)]
    for F, (j, k) in zip(p.edge_forces, pairs):
        C += 0.5 * np.einsum("i,jk->ijk", F, _sym_pair(j, k))
    e = np.eye(3)
    for i, G in enumerate(p.plane_tractions):
        C += np.einsum("i,j,k->ijk", G, e[i], e[i])
    return C


def build_left_symmetric(p: CoordinateProbes) -> np.ndarray:
    """Hyperstress with C_{ijk} = C_{jik}, gauge-equivalent to the right-symmetric one.

    Assembled term by term: for each cyclic pair the right-symmetric block,
    minus its first-slots transpose block, plus the mixed block; the
    traction blocks get the analogous three-term treatment.  The published
    form of the traction group contains a pair of self-cancelling terms in
    place of the transpose block; the assembly below is the left-symmetric
    completion, and it is validated through its contractions only (the
    difference from the right-symmetric tensor is right-antisymmetric, so
    every derived density agrees).
    """
    C = np.zeros((3, 3, 3))
    e = np.eye(3)
    pairs = [(1, 2), (2, 0), (0, 1)]
    for F, (j, k) in zip(p.edge_forces, pairs):
        S = _sym_pair(j, k)
        C += 0.5 * np.einsum("i,jk->ijk", F, S)
        C -= 0.5 * np.einsum("ij,k->ijk", S, F)
        C += 0.5 * (np.einsum("i,j,k->ijk", e[j], F, e[k]) + np.einsum("i,j,k->ijk", e[k], F, e[j]))
    for i, G in enumerate(p.plane_tractions):
        C += np.einsum("i,j,k->ijk", G, e[i], e[i])
        C -= np.einsum("i,j,k->ijk", e[i], e[i], G)
        C += np.einsum("i,j,k->ijk", e[i], G, e[i])
    # the assembly is left-symmetric up to summation order; make it so bitwise
    return left_symmetrize(C)
