"""Contact-force densities derived from a stress pair and their power.

A stress state is an ordinary 2-tensor stress field together with a
3-tensor hyperstress field.  From it the package *derives* the three
contact densities:

    normal double traction   G(x, n)       = (C(x).n).n
    edge force               F_edge(x, d)  = (C(x).n1).nu1 + (C(x).n2).nu2
    surface force            F(x, face)    = T(x).n - div_s((C(x).n).Pi)

and the contact power of a velocity field, which the quasi-balance
identity ties to the bulk integral

    (div T).U + T : grad U + div(grad U : C).

``RawContactAnsatz`` holds user-supplied densities that are *not* derived
from any stress state; the impossibility experiments feed those to the
same power functionals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dual import Dual, dual_eval
from .fields import PolyField, div, dot, field_einsum, grad
from .geometry import AdmissibleDomain, DihedralShape, PlanarFace, shapes_match
from .tensor import contract3_t2, contract3_vv, projector, require_unit

__all__ = [
    "StressState",
    "VelocityField",
    "PowerBreakdown",
    "RawContactAnsatz",
    "ContactError",
    "normal_traction",
    "normal_traction_field",
    "edge_force",
    "edge_force_field",
    "surface_divergence",
    "surface_force",
    "surface_force_field",
    "contact_power",
    "bulk_power",
    "bulk_density",
    "quasi_balance_constant",
    "interstitial_flux",
    "interstitial_flux_field",
    "normal_tangential_split",
    "reduced_edge_force",
    "reduced_surface_force",
    "raw_power",
    "contact_force_resultant",
]


class ContactError(ValueError):
    pass


@dataclass(frozen=True)
class StressState:
    """Ordinary stress (3x3 field) plus hyperstress (3x3x3 field)."""

    stress: PolyField
    hyperstress: PolyField

    def __post_init__(self):
        if self.stress.shape != (3, 3) or self.stress.nvars != 3:
            raise ContactError("stress must be a 3x3 polynomial field in three coordinates")
        if self.hyperstress.shape != (3, 3, 3) or self.hyperstress.nvars != 3:
            raise ContactError("hyperstress must be a 3x3x3 polynomial field in three coordinates")

    @classmethod
    def constant(cls, T, C) -> "StressState":
        return cls(PolyField.constant(np.asarray(T, float).reshape(3, 3)), PolyField.constant(np.asarray(C, float).reshape(3, 3, 3)))


@dataclass(frozen=True)
class VelocityField:
    """Polynomial test velocity; stands in for the smooth fields of the theory."""

    field: PolyField

    def __post_init__(self):
        if self.field.shape != (3,) or self.field.nvars != 3:
            raise ContactError("velocity must be a 3-vector polynomial field")

    @classmethod
    def linear_along(cls, direction, u0) -> "VelocityField":
        """x -> (x . direction) u0, the test field of the limit constructions."""
        direction = np.asarray(direction, float)
        u0 = np.asarray(u0, float)
        terms = {}
        for j in range(3):
            if direction[j] != 0.0:
                key = tuple(1 if i == j else 0 for i in range(3))
                terms[key] = direction[j] * u0
        return cls(PolyField(terms, (3,), 3))

    @classmethod
    def constant(cls, u0) -> "VelocityField":
        return cls(PolyField.constant(np.asarray(u0, float).reshape(3)))


@dataclass(frozen=True)
class PowerBreakdown:
    """The three additive parts of the contact power, with itemization."""

    surface_force_power: float
    edge_power: float
    normal_power: float
    per_face: tuple
    per_edge: tuple

    @property
    def total(self) -> float:
        return self.surface_force_power + self.edge_power + self.normal_power


# ---------------------------------------------------------------------------
# derived densities
# ---------------------------------------------------------------------------


def normal_traction(state: StressState, x, n) -> np.ndarray:
    """G(x, n) = (C(x).n).n; even in n, so G(x, n) = G(x, -n)."""
    n = require_unit(n)
    return contract3_vv(state.hyperstress(x), n, n)


def normal_traction_field(state: StressState, n) -> PolyField:
    n = require_unit(n)
    return state.hyperstress.contract("ijk,j,k->i", n, n)


def edge_force(state: StressState, x, d: DihedralShape) -> np.ndarray:
    """Edge force density (C.n1).nu1 + (C.n2).nu2 at a point."""
    C = state.hyperstress(x)
    return contract3_vv(C, d.n1, d.nu1) + contract3_vv(C, d.n2, d.nu2)


def edge_force_field(state: StressState, d: DihedralShape) -> PolyField:
    C = state.hyperstress
    return C.contract("ijk,j,k->i", d.nu1, d.n1) + C.contract("ijk,j,k->i", d.nu2, d.n2)


def _check_tangential(face, W: PolyField) -> None:
    if face.is_planar:
        resid = W.contract("ij,j->i", face.normal)
        probes = [face.centroid] + [v for v in face.vertices]
        worst = max(float(np.max(np.abs(resid(x)))) for x in probes)
        if worst > 1e-10:
            raise ContactError("field is not tangential on the face (W.n != 0)")


def surface_divergence(face, W: PolyField):
    """Surface divergence of a row-wise tangential 2-tensor field on a face.

    Planar faces: returns the exact polynomial field Pi_jk d_k W_ij.
    Graph patches: returns a pointwise evaluator computed exactly from the
    parametric pullback (densitized contravariant components).
    """
    _check_tangential(face, W)
    if face.is_planar:
        Pi = projector(face.normal)
        return W.jacobian().contract("ijk,jk->i", Pi)

    def rows(x_dual: Dual, n_dual: Dual) -> Dual:
        return dual_eval(W, [x_dual[0], x_dual[1], x_dual[2]])

    def evaluate(x):
        u, v = face.params_of(x)
        n = face.normal_at_param(u, v)
        if float(np.max(np.abs(W(x) @ n))) > 1e-10:
            raise ContactError("field is not tangential on the patch (W.n != 0)")
        return face.surface_divergence_at(u, v, rows)

    return evaluate


def _patch_hyperstress_rows(state: StressState):
    """(C(x).n).Pi as a Dual 3x3 builder on a patch; tangential by construction."""

    def rows(x_dual: Dual, n_dual: Dual) -> Dual:
        C = dual_eval(state.hyperstress, [x_dual[0], x_dual[1], x_dual[2]])
        Cn = C.einsum("ijk,k->ij", n_dual)
        nn = n_dual.einsum("i,j->ij", n_dual)
        eye = Dual.const(np.eye(3))
        Pi = eye - nn
        return Cn.einsum("ij,jk->ik", Pi)

    return rows


def hyperstress_tangential_field(state: StressState, n) -> PolyField:
    """(C.n).Pi for a fixed unit normal (used on planar faces)."""
    n = require_unit(n)
    return state.hyperstress.contract("ijk,k->ij", n).contract("ij,jk->ik", projector(n))


def surface_force_field(state: StressState, face: PlanarFace) -> PolyField:
    """F = T.n - div_s((C.n).Pi) as an exact polynomial field (planar faces)."""
    if not face.is_planar:
        raise ContactError("surface_force_field requires a planar face")
    n = face.normal
    W = hyperstress_tangential_field(state, n)
    divs = W.jacobian().contract("ijk,jk->i", projector(n))
    return state.stress.contract("ij,j->i", n) - divs


def surface_force(state: StressState, face, x) -> np.ndarray:
    """Surface contact-force density at a point of a face."""
    if face.is_planar:
        return surface_force_field(state, face)(x)
    u, v = face.params_of(x)
    n = face.normal_at_param(u, v)
    divs = face.surface_divergence_at(u, v, _patch_hyperstress_rows(state))
    return state.stress(x) @ n - divs


# ---------------------------------------------------------------------------
# power functionals
# ---------------------------------------------------------------------------


def contact_power(state: StressState, dom: AdmissibleDomain, u: VelocityField, patch_order: int | None = None) -> PowerBreakdown:
    """Surface, edge and normal-traction power of the derived densities.

    Exact on polyhedral domains; graph patches use convergent quadrature.
    """
    U = u.field
    gradU = grad(U)
    per_face = []
    surf_total = 0.0
    normal_total = 0.0
    for f in dom.faces:
        if f.is_planar:
            n = f.normal
            F = surface_force_field(state, f)
            G = normal_traction_field(state, n)
            dUdn = gradU.contract("ij,j->i", n)
            sval = float(f.integrate(dot(F, U)))
            gval = float(f.integrate(dot(G, dUdn)))
        else:
            rows = _patch_hyperstress_rows(state)

            def fpow(x, n):
                uu, vv = f.params_of(x)
                Fx = state.stress(x) @ n - f.surface_divergence_at(uu, vv, rows)
                return float(np.dot(Fx, U(x)))

            def gpow(x, n):
                Gx = contract3_vv(state.hyperstress(x), n, n)
                return float(np.dot(Gx, gradU(x) @ n))

            sval = float(f.integrate_with_normal(fpow, patch_order))
            gval = float(f.integrate_with_normal(gpow, patch_order))
        per_face.append((f.name, sval, gval))
        surf_total += sval
        normal_total += gval
    per_edge = []
    edge_total = 0.0
    for e in dom.edges:
        if e.shape is not None:
            Ff = edge_force_field(state, e.shape)
            val = float(e.integrate(dot(Ff, U)))
        else:
            fa, fb = (dom.faces[i] for i in e.faces)

            def epow(x):
                d = _local_shape(e, fa, fb, x)
                return float(np.dot(edge_force(state, x, d), U(x)))

            val = float(e.integrate(epow, degree=None))
        per_edge.append((e.name, val))
        edge_total += val
    return PowerBreakdown(surf_total, edge_total, normal_total, tuple(per_face), tuple(per_edge))


def _local_shape(edge, fa, fb, x) -> DihedralShape:
    from .geometry import make_dihedral

    t = edge.tau
    na, nb = fa.normal_at(x), fb.normal_at(x)
    nu1 = np.cross(t, na)
    if float(np.dot(nu1, edge.midpoint() - fa.centroid)) < 0:
        t = -t
    return make_dihedral(na, nb, t)


def bulk_density(state: StressState, u: VelocityField) -> PolyField:
    """(div T).U + T : grad U + div(grad U : C), the volume power density."""
    U = u.field
    gradU = grad(U)
    flux = field_einsum("ij,ijk->k", gradU, state.hyperstress)
    return dot(div(state.stress), U) + field_einsum("ij,ij->", state.stress, gradU) + div(flux)


def bulk_power(state: StressState, dom: AdmissibleDomain, u: VelocityField) -> float:
    """Exact volume integral of the bulk power density."""
    return float(dom.integrate_volume(bulk_density(state, u)))


def quasi_balance_constant(state: StressState, u: VelocityField, dom: AdmissibleDomain, grid: int = 20, safety: float = 1.01) -> float:
    """Grid-estimated sup of the bulk density over the bounding box, times a safety factor."""
    lo, hi = dom.bounding_box()
    density = bulk_density(state, u)
    axes = [np.linspace(lo[i], hi[i], grid) for i in range(3)]
    X = np.array(np.meshgrid(*axes, indexing="ij")).reshape(3, -1).T
    return safety * float(np.max(np.abs(density.eval_many(X))))


def interstitial_flux(state: StressState, u: VelocityField, x) -> np.ndarray:
    """q = grad U : C at a point."""
    return contract3_t2(state.hyperstress(x), grad(u.field)(x))


def interstitial_flux_field(state: StressState, u: VelocityField) -> PolyField:
    return field_einsum("ij,ijk->k", grad(u.field), state.hyperstress)


def normal_tangential_split(state: StressState, u: VelocityField, x, n) -> tuple[float, float]:
    """Split grad U : (C.n) into (dU/dn).((C.n).n) plus grad_s U : ((C.n).Pi)."""
    n = require_unit(n)
    C = state.hyperstress(x)
    gU = grad(u.field)(x)
    Cn = np.einsum("ijk,k->ij", C, n)
    Pi = projector(n)
    normal_part = float(np.dot(gU @ n, Cn @ n))
    tangential_part = float(np.einsum("ij,ij->", gU @ Pi, Cn @ Pi))
    return normal_part, tangential_part


# ---------------------------------------------------------------------------
# raw (non-derived) densities
# ---------------------------------------------------------------------------


@dataclass
class RawContactAnsatz:
    """User-supplied contact densities keyed by shape; zero where unmatched.

    ``surface`` maps plane shapes (unit normals) to vector fields,
    ``edge`` maps dihedral shapes to vector fields, and the optional
    ``normal`` part pairs with dU/dn.  Nothing constrains these to be
    representable by a stress state; that is the point.
    """

    surface: list = field(default_factory=list)
    edge: list = field(default_factory=list)
    normal: list = field(default_factory=list)

    def surface_density(self, n) -> PolyField:
        for key, f in self.surface:
            if float(np.linalg.norm(np.asarray(key, float) - n)) <= 1e-9:
                return f
        return PolyField.zero((3,), 3)

    def edge_density(self, d: DihedralShape) -> PolyField:
        for key, f in self.edge:
            if shapes_match(key, d):
                return f
        return PolyField.zero((3,), 3)

    def normal_density(self, n) -> PolyField:
        for key, f in self.normal:
            if float(np.linalg.norm(np.asarray(key, float) - n)) <= 1e-9:
                return f
        return PolyField.zero((3,), 3)

    @classmethod
    def from_state(cls, state: StressState, dom: AdmissibleDomain) -> "RawContactAnsatz":
        """Register the derived densities of ``state`` for every shape of ``dom``."""
        surface = []
        seen = []
        for f in dom.faces:
            if not f.is_planar:
                raise ContactError("from_state supports polyhedral domains")
            if any(float(np.linalg.norm(f.normal - n)) <= 1e-12 for n in seen):
                continue
            seen.append(f.normal)
            surface.append((f.normal.copy(), surface_force_field(state, f)))
        edge = []
        for e in dom.edges:
            if e.shape is None:
                continue
            if any(shapes_match(k, e.shape) for k, _ in edge):
                continue
            edge.append((e.shape, edge_force_field(state, e.shape)))
        normal = [(n.copy(), normal_traction_field(state, n)) for n in seen]
        return cls(surface=surface, edge=edge, normal=normal)


def reduced_edge_force(state: StressState, raw: RawContactAnsatz, d: DihedralShape, x) -> np.ndarray:
    """Raw edge density minus the hyperstress-determined part; zero for consistent data."""
    return raw.edge_density(d)(x) - edge_force(state, x, d)


def reduced_surface_force(state: StressState, raw: RawContactAnsatz, face, x) -> np.ndarray:
    """Raw surface density plus div_s((C.n).Pi); equals T.n for consistent data."""
    if face.is_planar:
        n = face.normal
        W = hyperstress_tangential_field(state, n)
        divs = W.jacobian().contract("ijk,jk->i", projector(n))(x)
    else:
        u, v = face.params_of(x)
        divs = face.surface_divergence_at(u, v, _patch_hyperstress_rows(state))
        n = face.normal_at_param(u, v)
    return raw.surface_density(n)(x) + divs


def raw_power(raw: RawContactAnsatz, dom: AdmissibleDomain, u: VelocityField, include_normal: bool = True) -> PowerBreakdown:
    """Power of a raw ansatz, integrated as supplied (no derivation from any stress)."""
    U = u.field
    gradU = grad(U)
    per_face = []
    surf_total = normal_total = 0.0
    for f in dom.faces:
        if not f.is_planar:
            raise ContactError("raw_power supports polyhedral domains")
        sval = float(f.integrate(dot(raw.surface_density(f.normal), U)))
        gval = 0.0
        if include_normal and raw.normal:
            dUdn = gradU.contract("ij,j->i", f.normal)
            gval = float(f.integrate(dot(raw.normal_density(f.normal), dUdn)))
        per_face.append((f.name, sval, gval))
        surf_total += sval
        normal_total += gval
    per_edge = []
    edge_total = 0.0
    for e in dom.edges:
        if e.shape is None:
            raise ContactError("raw_power requires constant-shape edges")
        val = float(e.integrate(dot(raw.edge_density(e.shape), U)))
        per_edge.append((e.name, val))
        edge_total += val
    return PowerBreakdown(surf_total, edge_total, normal_total, tuple(per_face), tuple(per_edge))


def contact_force_resultant(raw: RawContactAnsatz, dom: AdmissibleDomain) -> np.ndarray:
    """Total contact force: surface density over faces plus edge density over edges."""
    total = np.zeros(3)
    for f in dom.faces:
        total = total + np.asarray(f.integrate(raw.surface_density(f.normal)))
    for e in dom.edges:
        total = total + np.asarray(e.integrate(raw.edge_density(e.shape)))
    return total
