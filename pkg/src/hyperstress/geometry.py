"""Admissible domains: faces, edges, dihedral shapes and exact quadrature.

A domain is a closed boundary made of convex planar polygons (plus,
optionally, polynomial graph patches), a list of edges each bordering two
listed faces, and a tetrahedral decomposition of the interior.  Quadrature
over planar faces, straight edges and tetrahedra is exact for the degree
of the polynomial integrand; quadrature over graph patches is convergent
with a configurable order (the curved area element is not polynomial).

Also houses the parametrized shape families the verification experiments
replay: the grooved slab, the shrinking wedge near an edge, and the
coordinate tetrahedron with labelled faces and edges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dual import Dual, dual_eval
from .fields import PolyField
from .quadrature import segment_rule, tetrahedron_rule, triangle_rule
from .tensor import require_unit, unit

__all__ = [
    "GeometryError",
    "DihedralShape",
    "make_dihedral",
    "swap_faces",
    "dihedral_angle",
    "shapes_match",
    "PlanarFace",
    "GraphPatchFace",
    "StraightEdge",
    "CurveEdge",
    "AdmissibleDomain",
    "integrate_volume",
    "integrate_face",
    "integrate_edge",
    "build_box",
    "build_cauchy_tetrahedron",
    "build_grooved_slab",
    "build_wedge",
    "build_graph_patch_box",
    "convex_hull_domain",
    "random_convex_polyhedron",
    "homothety",
    "ShapeFamily",
    "grooved_slab_family",
    "wedge_family",
    "homothety_family",
    "plane_shape_census",
    "edge_shape_census",
]

_ORTHO_TOL = 1e-10
_ANGLE_TOL = 1e-10


class GeometryError(ValueError):
    pass


# ---------------------------------------------------------------------------
# dihedral shapes
# ---------------------------------------------------------------------------


class DihedralShape:
    """Shape of a non-degenerate dihedral edge: (n1, n2, tau) with derived conormals.

    nu1 = tau x n1 and nu2 = -tau x n2 are the outward in-plane normals to
    the edge within each face.  (n1, n2, tau) and (n2, n1, -tau) denote the
    same shape.
    """

    __slots__ = ("n1", "n2", "tau", "nu1", "nu2")

    def __init__(self, n1, n2, tau, nu1, nu2):
        for name, v in (("n1", n1), ("n2", n2), ("tau", tau), ("nu1", nu1), ("nu2", nu2)):
            a = np.asarray(v, dtype=float).copy()
            a.setflags(write=False)
            object.__setattr__(self, name, a)

    def __setattr__(self, *_):
        raise AttributeError("DihedralShape is immutable")

    def __repr__(self):
        return f"DihedralShape(n1={self.n1.tolist()}, n2={self.n2.tolist()}, tau={self.tau.tolist()})"


def make_dihedral(n1, n2, tau) -> DihedralShape:
    """Build a dihedral shape; rejects flat or folded configurations."""
    n1 = require_unit(n1, name="n1")
    n2 = require_unit(n2, name="n2")
    tau = require_unit(tau, name="tau")
    if abs(float(np.dot(tau, n1))) > _ORTHO_TOL or abs(float(np.dot(tau, n2))) > _ORTHO_TOL:
        raise GeometryError("tau must be orthogonal to both face normals")
    if float(np.linalg.norm(np.cross(n1, n2))) < _ORTHO_TOL:
        raise GeometryError("flat or folded shape: the dihedral angle must differ from 0, pi and 2*pi")
    nu1 = np.cross(tau, n1)
    nu2 = -np.cross(tau, n2)
    return DihedralShape(n1, n2, tau, nu1, nu2)


def swap_faces(d: DihedralShape) -> DihedralShape:
    """The shape (n2, n1, tau); distinct from d unless the dihedron is symmetric."""
    return make_dihedral(d.n2, d.n1, d.tau)


def dihedral_angle(d: DihedralShape) -> float:
    """Angle from -n1 to n2 in the plane oriented by tau, in (0, 2*pi)."""
    u = -d.n1
    v = d.n2
    s = float(np.dot(np.cross(u, v), d.tau))
    c = float(np.dot(u, v))
    theta = math.atan2(s, c) % (2.0 * math.pi)
    if min(theta, abs(theta - math.pi), 2.0 * math.pi - theta) < _ANGLE_TOL:
        raise GeometryError("degenerate dihedral angle (0, pi or 2*pi)")
    return theta


def shapes_match(a: DihedralShape, b: DihedralShape, tol: float = 1e-9) -> bool:
    """Equality of shapes under the identification (n1, n2, tau) = (n2, n1, -tau)."""

    def close(x, y):
        return float(np.linalg.norm(x - y)) <= tol

    direct = close(a.n1, b.n1) and close(a.n2, b.n2) and close(a.tau, b.tau)
    swapped = close(a.n1, b.n2) and close(a.n2, b.n1) and close(a.tau, -b.tau)
    return direct or swapped


def _canonical_shape_key(d: DihedralShape, ndigits: int = 8) -> tuple:
    def key(n1, n2, tau):
        return tuple(round(float(x), ndigits) + 0.0 for v in (n1, n2, tau) for x in v)

    return min(key(d.n1, d.n2, d.tau), key(d.n2, d.n1, -d.tau))


# ---------------------------------------------------------------------------
# faces
# ---------------------------------------------------------------------------


def _newell_normal(V: np.ndarray) -> np.ndarray:
    n = np.zeros(3)
    for i in range(len(V)):
        a, b = V[i], V[(i + 1) % len(V)]
        n += np.cross(a, b)
    return 0.5 * n


class PlanarFace:
    """Convex planar polygon with an outward unit normal.

    The vertex loop must be oriented so the computed (Newell) normal is the
    outward one; with ``auto_orient`` the loop is reversed if needed
    (builders use this), otherwise a mismatch is an error.
    """

    is_planar = True

    def __init__(self, vertices, normal=None, name: str = "", order: int = 8, auto_orient: bool = False):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 3 or len(V) < 3:
            raise GeometryError("a planar face needs at least three 3D vertices")
        nw = _newell_normal(V)
        area = float(np.linalg.norm(nw))
        if area < 1e-300:
            raise GeometryError("degenerate (zero-area) face")
        computed = nw / area
        if normal is None:
            n = computed
        else:
            n = require_unit(normal, name="face normal")
            if float(np.dot(n, computed)) < 0 and auto_orient:
                V = V[::-1].copy()
                computed = -computed
            if float(np.linalg.norm(n - computed)) > 1e-8:
                raise GeometryError("unoriented face: vertex loop does not match the outward normal")
            n = computed  # use the loop-derived normal; it is exactly consistent
        scale = max(1.0, float(np.max(np.abs(V - V[0]))))
        offsets = (V - V[0]) @ n
        if float(np.max(np.abs(offsets))) > _ORTHO_TOL * scale:
            raise GeometryError("face vertices are not coplanar")
        self.vertices = V
        self.vertices.setflags(write=False)
        self.normal = n
        self.normal.setflags(write=False)
        self.area = area
        self.name = name
        self.order = int(order)
        self.centroid = self._area_centroid()

    def _area_centroid(self) -> np.ndarray:
        c = np.zeros(3)
        total = 0.0
        for a, b, cc in self.triangles():
            t_area = 0.5 * float(np.linalg.norm(np.cross(b - a, cc - a)))
            c += t_area * (a + b + cc) / 3.0
            total += t_area
        return c / total

    def triangles(self):
        V = self.vertices
        return [(V[0], V[i], V[i + 1]) for i in range(1, len(V) - 1)]

    def normal_at(self, x) -> np.ndarray:
        return self.normal

    def quadrature(self, degree: int):
        """All physical nodes and weights for a rule exact to ``degree``."""
        ref_pts, ref_wts = triangle_rule(degree)
        pts, wts = [], []
        for a, b, c in self.triangles():
            e1, e2 = b - a, c - a
            factor = float(np.linalg.norm(np.cross(e1, e2)))
            pts.append(a + ref_pts[:, :1] * e1 + ref_pts[:, 1:] * e2)
            wts.append(ref_wts * factor)
        return np.vstack(pts), np.concatenate(wts)

    def integrate(self, f, degree: int | None = None):
        """Integral over the face; exact when f is a polynomial field."""
        if isinstance(f, PolyField):
            if f.is_zero():
                return np.zeros(f.shape) if f.shape else 0.0
            pts, wts = self.quadrature(f.degree if degree is None else degree)
            vals = f.eval_many(pts)
        else:
            pts, wts = self.quadrature(self.order if degree is None else degree)
            vals = np.array([f(x) for x in pts])
        return _weighted_sum(vals, wts)

    def integrate_with_normal(self, fn, degree: int | None = None):
        pts, wts = self.quadrature(self.order if degree is None else degree)
        vals = np.array([fn(x, self.normal) for x in pts])
        return _weighted_sum(vals, wts)

    def normal_flux(self) -> np.ndarray:
        """Exact integral of the outward normal over the face."""
        return self.area * self.normal

    def boundary_segments(self):
        """(p, q, conormal) triples; conormal = outward in-plane normal of each side."""
        V = self.vertices
        out = []
        for i in range(len(V)):
            p, q = V[i], V[(i + 1) % len(V)]
            t = unit(q - p)
            out.append((p, q, np.cross(t, self.normal)))
        return out


class GraphPatchFace:
    """Curved face given as a polynomial height over a convex planar polygon.

    Points are ``origin + u*t1 + v*t2 + phi(u, v)*m`` for (u, v) in the base
    polygon; ``orientation=+1`` means the outward normal has a positive
    component along m.  Quadrature is convergent (order knob), not exact,
    except for the normal flux which is polynomial.
    """

    is_planar = False

    def __init__(self, origin, t1, t2, m, base, height: PolyField, orientation: int = 1, order: int = 8, name: str = ""):
        self.origin = np.asarray(origin, dtype=float)
        self.t1 = require_unit(t1, name="t1")
        self.t2 = require_unit(t2, name="t2")
        self.m = require_unit(m, name="m")
        frame_err = max(
            abs(float(np.dot(self.t1, self.t2))),
            abs(float(np.dot(self.t1, self.m))),
            abs(float(np.dot(self.t2, self.m))),
            float(np.linalg.norm(np.cross(self.t1, self.t2) - self.m)),
        )
        if frame_err > 1e-12:
            raise GeometryError("patch frame must be orthonormal and right-handed")
        self.base = np.asarray(base, dtype=float)
        if self.base.ndim != 2 or self.base.shape[1] != 2 or len(self.base) < 3:
            raise GeometryError("patch base must be a 2D polygon")
        if height.nvars != 2 or height.shape != ():
            raise GeometryError("patch height must be a scalar field in two parameters")
        self.height = height
        self.height_u = height.diff(0)
        self.height_v = height.diff(1)
        if orientation not in (1, -1):
            raise GeometryError("orientation must be +1 or -1")
        self.orientation = int(orientation)
        self.order = int(order)
        self.name = name
        self.centroid = self.point(*np.mean(self.base, axis=0))

    # -- parametrization ----------------------------------------------------

    def point(self, u: float, v: float) -> np.ndarray:
        return self.origin + u * self.t1 + v * self.t2 + self.height((u, v)) * self.m

    def params_of(self, x) -> tuple[float, float]:
        rel = np.asarray(x, dtype=float) - self.origin
        return float(np.dot(rel, self.t1)), float(np.dot(rel, self.t2))

    def _raw_normal(self, u: float, v: float) -> tuple[np.ndarray, float]:
        pu = self.height_u((u, v))
        pv = self.height_v((u, v))
        N = self.orientation * (self.m - pu * self.t1 - pv * self.t2)
        return N, math.sqrt(1.0 + pu * pu + pv * pv)

    def normal_at_param(self, u: float, v: float) -> np.ndarray:
        N, w = self._raw_normal(u, v)
        return N / w

    def normal_at(self, x) -> np.ndarray:
        return self.normal_at_param(*self.params_of(x))

    # -- quadrature ----------------------------------------------------------

    def _base_triangles(self):
        B = self.base
        return [(B[0], B[i], B[i + 1]) for i in range(1, len(B) - 1)]

    def _base_quadrature(self, degree: int):
        ref_pts, ref_wts = triangle_rule(degree)
        pts, wts = [], []
        for a, b, c in self._base_triangles():
            e1, e2 = b - a, c - a
            factor = abs(float(e1[0] * e2[1] - e1[1] * e2[0]))
            pts.append(a + ref_pts[:, :1] * e1 + ref_pts[:, 1:] * e2)
            wts.append(ref_wts * factor)
        return np.vstack(pts), np.concatenate(wts)

    def integrate(self, f, order: int | None = None):
        """Convergent surface integral of a pointwise function f(x)."""
        if isinstance(f, PolyField):
            g = f
            f = lambda x: g(x)  # noqa: E731 - uniform pointwise path
        pts, wts = self._base_quadrature(self.order if order is None else order)
        vals = []
        for (u, v), w in zip(pts, wts):
            _, area_el = self._raw_normal(u, v)
            vals.append(np.asarray(f(self.point(u, v))) * area_el)
        return _weighted_sum(np.array(vals), wts)

    def integrate_with_normal(self, fn, order: int | None = None):
        pts, wts = self._base_quadrature(self.order if order is None else order)
        vals = []
        for u, v in pts:
            N, area_el = self._raw_normal(u, v)
            vals.append(np.asarray(fn(self.point(u, v), N / area_el)) * area_el)
        return _weighted_sum(np.array(vals), wts)

    def area(self, order: int | None = None) -> float:
        return float(self.integrate(lambda x: 1.0, order=order))

    def normal_flux(self) -> np.ndarray:
        """Exact: the area element cancels against the normal's normalization."""
        comps = []
        for k in range(3):
            poly = (
                PolyField.constant(self.m[k], nvars=2)
                - self.height_u * float(self.t1[k])
                - self.height_v * float(self.t2[k])
            )
            comps.append(self._integrate_base_poly(poly))
        return self.orientation * np.array(comps)

    def _integrate_base_poly(self, poly: PolyField) -> float:
        if poly.is_zero():
            return 0.0
        ref_pts, ref_wts = triangle_rule(poly.degree)
        total = 0.0
        for a, b, c in self._base_triangles():
            e1, e2 = b - a, c - a
            factor = abs(float(e1[0] * e2[1] - e1[1] * e2[0]))
            pts = a + ref_pts[:, :1] * e1 + ref_pts[:, 1:] * e2
            total += factor * float(np.dot(ref_wts, poly.eval_many(pts)))
        return total

    # -- exact tangential calculus -------------------------------------------

    def surface_divergence_at(self, u: float, v: float, rows) -> np.ndarray:
        """Surface divergence of a row-wise tangential 2-tensor field at (u, v).

        ``rows(x, n)`` receives the position and unit normal as Dual
        quantities and must return the 3x3 field as a Dual; differentiation
        of the parametric pullback is exact (forward-mode).
        """
        ud, vd = Dual.seed(u, 0), Dual.seed(v, 1)
        phi = dual_eval(self.height, [ud, vd])
        phu = dual_eval(self.height_u, [ud, vd])
        phv = dual_eval(self.height_v, [ud, vd])
        t1, t2, m = Dual.const(self.t1), Dual.const(self.t2), Dual.const(self.m)
        x = Dual.const(self.origin) + ud * t1 + vd * t2 + phi * m
        Xu = t1 + phu * m
        Xv = t2 + phv * m
        Nvec = (m - phu * t1 - phv * t2) * float(self.orientation)
        g11, g12, g22 = Xu.dot(Xu), Xu.dot(Xv), Xv.dot(Xv)
        D = g11 * g22 - g12 * g12
        w = D.sqrt()
        n = Nvec / w
        W = rows(x, n)
        out = np.zeros(3)
        for i in range(3):
            wi = W[i]
            p, q = wi.dot(Xu), wi.dot(Xv)
            a = (g22 * p - g12 * q) / D
            b = (g11 * q - g12 * p) / D
            sa, sb = w * a, w * b
            out[i] = (float(sa.du) + float(sb.dv)) / float(w.v)
        return out


def _weighted_sum(vals: np.ndarray, wts: np.ndarray):
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        return float(np.dot(wts, vals))
    return np.tensordot(wts, vals, axes=(0, 0))


# ---------------------------------------------------------------------------
# edges
# ---------------------------------------------------------------------------


class StraightEdge:
    """Straight edge segment with oriented tangent and two adjacent faces."""

    def __init__(self, p0, p1, tau, faces: tuple[int, int], shape: DihedralShape | None, name: str = ""):
        self.p0 = np.asarray(p0, dtype=float)
        self.p1 = np.asarray(p1, dtype=float)
        direction = self.p1 - self.p0
        if float(np.linalg.norm(direction)) < 1e-300:
            raise GeometryError("degenerate (zero-length) edge")
        self.tau = require_unit(tau, name="tau")
        if float(np.linalg.norm(np.cross(self.tau, direction))) > 1e-10 * float(np.linalg.norm(direction)):
            raise GeometryError("edge tangent must be parallel to the segment")
        self.faces = (int(faces[0]), int(faces[1]))
        self.shape = shape
        self.name = name

    @property
    def length(self) -> float:
        return float(np.linalg.norm(self.p1 - self.p0))

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.p0 + self.p1)

    def quadrature(self, degree: int):
        t, w = segment_rule(degree)
        pts = self.p0 + t[:, None] * (self.p1 - self.p0)
        return pts, w * self.length

    def integrate(self, f, degree: int | None = None):
        """Line integral, exact when f is a polynomial field."""
        if isinstance(f, PolyField):
            if f.is_zero():
                return np.zeros(f.shape) if f.shape else 0.0
            pts, wts = self.quadrature(f.degree if degree is None else degree)
            vals = f.eval_many(pts)
        else:
            pts, wts = self.quadrature(8 if degree is None else degree)
            vals = np.array([f(x) for x in pts])
        return _weighted_sum(vals, wts)


class CurveEdge:
    """Polynomial parametric edge c(t), t in [0, 1], degree <= 3; convergent quadrature."""

    def __init__(self, curve: PolyField, faces: tuple[int, int], name: str = "", order: int = 16):
        if curve.nvars != 1 or curve.shape != (3,):
            raise GeometryError("curve must be a 3-vector field in one parameter")
        if curve.degree > 3:
            raise GeometryError("curve degree must be at most 3")
        self.curve = curve
        self.velocity = curve.diff(0)
        self.faces = (int(faces[0]), int(faces[1]))
        self.shape = None
        self.name = name
        self.order = int(order)

    def point(self, t: float) -> np.ndarray:
        return self.curve((t,))

    def tangent_at(self, t: float) -> np.ndarray:
        return unit(self.velocity((t,)))

    @property
    def length(self) -> float:
        return float(self.integrate(lambda x: 1.0))

    def integrate(self, f, degree: int | None = None):
        t, w = segment_rule(self.order if degree is None else degree)
        vals = []
        for ti in t:
            speed = float(np.linalg.norm(self.velocity((ti,))))
            vals.append(np.asarray(f(self.point(ti))) * speed)
        return _weighted_sum(np.array(vals), w)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------


@dataclass
class AdmissibleDomain:
    """Closed boundary (faces and edges) plus a tetrahedral interior decomposition."""

    faces: list
    edges: list
    cells: np.ndarray | None
    label: str = ""
    meta: dict = field(default_factory=dict)

    def volume(self) -> float:
        if self.cells is None:
            raise GeometryError(f"domain {self.label!r} carries no volume decomposition")
        vols = [abs(float(np.linalg.det(cell[1:] - cell[0]))) / 6.0 for cell in self.cells]
        return float(sum(vols))

    def volume_from_surface(self) -> float:
        """(1/3) * integral of x.n over the boundary; independent of the cells."""
        total = 0.0
        for f in self.faces:
            if f.is_planar:
                total += float(f.integrate_with_normal(lambda x, n: float(np.dot(x, n)), degree=1))
            else:
                total += float(f.integrate_with_normal(lambda x, n: float(np.dot(x, n))))
        return total / 3.0

    def surface_area(self) -> float:
        return float(sum(f.area if f.is_planar else f.area() for f in self.faces))

    def closure_vector(self) -> np.ndarray:
        return np.sum([f.normal_flux() for f in self.faces], axis=0)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        pts = []
        for f in self.faces:
            if f.is_planar:
                pts.append(f.vertices)
            else:
                grid = np.linspace(0, 1, 5)
                lo, hi = f.base.min(axis=0), f.base.max(axis=0)
                pts.append(
                    np.array([f.point(lo[0] + a * (hi[0] - lo[0]), lo[1] + b * (hi[1] - lo[1])) for a in grid for b in grid])
                )
        allp = np.vstack(pts)
        return allp.min(axis=0), allp.max(axis=0)

    def integrate_volume(self, f, degree: int | None = None):
        if self.cells is None:
            raise GeometryError(f"domain {self.label!r} carries no volume decomposition")
        if isinstance(f, PolyField):
            if f.is_zero():
                return np.zeros(f.shape) if f.shape else 0.0
            deg = f.degree if degree is None else degree
            evaluate = f.eval_many
        else:
            if degree is None:
                raise GeometryError("a quadrature degree is required for non-polynomial integrands")
            deg = degree
            evaluate = lambda pts: np.array([f(x) for x in pts])  # noqa: E731
        ref_pts, ref_wts = tetrahedron_rule(deg)
        total = None
        for cell in self.cells:
            E = cell[1:] - cell[0]
            factor = abs(float(np.linalg.det(E)))
            pts = cell[0] + ref_pts @ E
            contrib = _weighted_sum(evaluate(pts), ref_wts * factor)
            total = contrib if total is None else total + contrib
        return total

    def validate(self, tol: float = 1e-12) -> None:
        """Raise if closure, edge adjacency or the volume decomposition is off."""
        area = self.surface_area()
        closure = self.closure_vector()
        if float(np.max(np.abs(closure))) > tol * max(area, 1e-300):
            raise GeometryError(f"boundary of {self.label!r} is not closed: sum n ds = {closure}")
        nfaces = len(self.faces)
        for e in self.edges:
            ia, ib = e.faces
            if ia == ib or not (0 <= ia < nfaces and 0 <= ib < nfaces):
                raise GeometryError("every edge must border exactly two distinct listed faces")
            if isinstance(e, StraightEdge):
                for t in (0.0, 0.5, 1.0):
                    x = e.p0 + t * (e.p1 - e.p0)
                    for idx in (ia, ib):
                        f = self.faces[idx]
                        n = f.normal_at(x)
                        if abs(float(np.dot(e.tau, n))) > 1e-8:
                            raise GeometryError(f"edge {e.name!r} tangent is not orthogonal to face normal")
        if self.cells is not None:
            v_cells = self.volume()
            v_surf = self.volume_from_surface()
            if abs(v_cells - v_surf) > 1e-10 * max(v_surf, 1e-300):
                raise GeometryError(
                    f"volume decomposition of {self.label!r} does not match the boundary: {v_cells} vs {v_surf}"
                )


def integrate_volume(dom: AdmissibleDomain, f, degree: int | None = None):
    return dom.integrate_volume(f, degree=degree)


def integrate_face(face, f, degree: int | None = None):
    return face.integrate(f, degree)


def integrate_edge(edge, f, degree: int | None = None):
    return edge.integrate(f, degree)


# ---------------------------------------------------------------------------
# construction helpers
# ---------------------------------------------------------------------------


def _edge_between(faces: list, ia: int, ib: int, p, q, name: str = "") -> StraightEdge:
    """Edge between two planar faces with the tangent oriented per the shape rule."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    fa, fb = faces[ia], faces[ib]
    t = unit(q - p)
    mid = 0.5 * (p + q)
    na, nb = fa.normal, fb.normal
    nu_a = np.cross(t, na)
    if float(np.dot(nu_a, mid - fa.centroid)) < 0.0:
        t = -t
    shape = make_dihedral(na, nb, t)
    if float(np.dot(shape.nu2, mid - fb.centroid)) <= 0.0:
        raise GeometryError("adjacent faces do not form a consistent dihedron along the edge")
    return StraightEdge(p, q, t, (ia, ib), shape, name=name)


def _auto_edges(faces: list) -> list:
    """Detect edges as boundary segments shared (with matching endpoints) by two faces."""
    seen: dict = {}
    for idx, f in enumerate(faces):
        V = f.vertices
        for i in range(len(V)):
            p, q = V[i], V[(i + 1) % len(V)]
            key = frozenset((tuple(np.round(p, 12)), tuple(np.round(q, 12))))
            seen.setdefault(key, []).append((idx, p, q))
    edges = []
    for key, hits in sorted(seen.items(), key=lambda kv: sorted(kv[0])):
        if len(hits) != 2:
            raise GeometryError("boundary segment not shared by exactly two faces")
        (ia, p, q), (ib, _, _) = hits
        edges.append(_edge_between(faces, ia, ib, p, q, name=f"edge{len(edges)}"))
    return edges


def _fan_cells(faces: list, center: np.ndarray) -> np.ndarray:
    cells = []
    for f in faces:
        for a, b, c in f.triangles():
            cells.append(np.array([center, a, b, c]))
    return np.array(cells)


def _prism_cells(bottom: np.ndarray, top: np.ndarray) -> list:
    """Tetrahedralize the prism spanned by two parallel triangles."""
    P0, P1, P2 = bottom
    Q0, Q1, Q2 = top
    return [np.array(t) for t in ([P0, P1, P2, Q0], [P1, P2, Q0, Q1], [P2, Q0, Q1, Q2])]


def _extrude_cells(poly_xz: np.ndarray, y0: float, y1: float, e1, e2, e3) -> list:
    """Cells for a convex cross-section polygon extruded along e2."""

    def lift(p2, y):
        return p2[0] * e1 + y * e2 + p2[1] * e3

    cells = []
    for i in range(1, len(poly_xz) - 1):
        tri = [poly_xz[0], poly_xz[i], poly_xz[i + 1]]
        bottom = np.array([lift(p, y0) for p in tri])
        top = np.array([lift(p, y1) for p in tri])
        cells.extend(_prism_cells(bottom, top))
    return cells


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


def build_box(a, b, label: str = "box") -> AdmissibleDomain:
    """Axis-aligned box with outward faces, 12 edges and a centroid-fan decomposition."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not np.all(b > a):
        raise GeometryError("box requires componentwise a < b")
    a1, a2, a3 = a
    b1, b2, b3 = b
    faces = [
        PlanarFace([(a1, a2, a3), (a1, b2, a3), (b1, b2, a3), (b1, a2, a3)], name="z-"),
        PlanarFace([(a1, a2, b3), (b1, a2, b3), (b1, b2, b3), (a1, b2, b3)], name="z+"),
        PlanarFace([(a1, a2, a3), (a1, a2, b3), (a1, b2, b3), (a1, b2, a3)], name="x-"),
        PlanarFace([(b1, a2, a3), (b1, b2, a3), (b1, b2, b3), (b1, a2, b3)], name="x+"),
        PlanarFace([(a1, a2, a3), (b1, a2, a3), (b1, a2, b3), (a1, a2, b3)], name="y-"),
        PlanarFace([(a1, b2, a3), (a1, b2, b3), (b1, b2, b3), (b1, b2, a3)], name="y+"),
    ]
    edges = _auto_edges(faces)
    cells = _fan_cells(faces, 0.5 * (a + b))
    return AdmissibleDomain(faces, edges, cells, label=label)


_COORD_EDGE_SHAPES = None


def coordinate_edge_shapes() -> list[DihedralShape]:
    """The three coordinate edge shapes of the probe tetrahedron:
    (-e2,-e3,e1), (-e3,-e1,e2), (-e1,-e2,e3)."""
    global _COORD_EDGE_SHAPES
    if _COORD_EDGE_SHAPES is None:
        e = np.eye(3)
        _COORD_EDGE_SHAPES = [
            make_dihedral(-e[1], -e[2], e[0]),
            make_dihedral(-e[2], -e[0], e[1]),
            make_dihedral(-e[0], -e[1], e[2]),
        ]
    return _COORD_EDGE_SHAPES


def build_cauchy_tetrahedron(n, h: float, label: str = "tetra") -> AdmissibleDomain:
    """Tetrahedron with slant face through the origin normal to n and coordinate side faces.

    Faces are named S (normal n) and S1, S2, S3 (normals -e1, -e2, -e3);
    the coordinate edges L1, L2, L3 from the apex carry the shapes
    (-e2,-e3,e1), (-e3,-e1,e2), (-e1,-e2,e3).
    """
    n = require_unit(n)
    if not np.all(n > 0):
        raise GeometryError("the slant normal must have strictly positive components")
    h = float(h)
    if h <= 0:
        raise GeometryError("height must be positive")
    apex = -h * n
    e = np.eye(3)
    V = [apex + (h / n[i]) * e[i] for i in range(3)]
    faces = [
        PlanarFace([V[0], V[1], V[2]], normal=n, name="S", auto_orient=True),
        PlanarFace([apex, V[1], V[2]], normal=-e[0], name="S1", auto_orient=True),
        PlanarFace([apex, V[0], V[2]], normal=-e[1], name="S2", auto_orient=True),
        PlanarFace([apex, V[0], V[1]], normal=-e[2], name="S3", auto_orient=True),
    ]
    shapes = coordinate_edge_shapes()
    edges = []
    for i, (ia, ib) in enumerate([(2, 3), (3, 1), (1, 2)]):
        edge = _edge_between(faces, ia, ib, apex, V[i], name=f"L{i + 1}")
        if not shapes_match(edge.shape, shapes[i]):
            raise GeometryError(f"edge L{i + 1} does not realize the coordinate shape")
        edges.append(edge)
    slant_pairs = [((0, 3), V[0], V[1], "E12"), ((0, 1), V[1], V[2], "E23"), ((0, 2), V[2], V[0], "E31")]
    for (ia, ib), p, q, name in slant_pairs:
        edges.append(_edge_between(faces, ia, ib, p, q, name=name))
    cells = np.array([[apex, V[0], V[1], V[2]]])
    dom = AdmissibleDomain(faces, edges, cells, label=label)
    dom.meta.update(height=h, slant_normal=n)
    return dom


def _dihedral_frame(d: DihedralShape):
    """Frame (e1, e2, e3) with e2 = tau, e3 along n1+n2, e1 = tau x e3."""
    e3 = unit(d.n1 + d.n2)
    e2 = d.tau
    e1 = np.cross(e2, e3)
    s1 = float(np.dot(d.n1, e1))
    c = float(np.dot(d.n1, e3))
    return e1, e2, e3, s1, c


def build_grooved_slab(n_teeth: int, d: DihedralShape, label: str = "grooved_slab") -> AdmissibleDomain:
    """Thin slab whose top is a sawtooth of N grooves realizing the dihedral d.

    Scalings (in the frame of d): pitch and depth ~ N^-2, footprint
    ~ N^-1 x N^-1, thickness ~ N^-2, so the volume is ~ N^-4 while the
    groove edges keep total length ~ 1.  Edges are named L1 (shape d),
    L2 (shape with faces swapped) and L3 (everything else).  The edge
    heights along n1+n2 are 1/N^2 and 2/N^2 and the bottom sits at 0,
    so the linear field x -> (x.e3) U0 scales like N^-2 on the slab.
    """
    N = int(n_teeth)
    if N < 2:
        raise GeometryError("need at least two grooves")
    e1, e2, e3, s1, c = _dihedral_frame(d)
    delta = 1.0 / N**2
    a = c / abs(s1) * delta  # half pitch giving slope |s1|/c
    L = 1.0 / N
    w = 2 * N * a
    n_down = d.n1 if s1 > 0 else d.n2  # normal of segments descending along +e1
    n_up = d.n2 if s1 > 0 else d.n1
    # profile starts and ends mid-descent so the slab has exactly N valley
    # and N ridge edges; valleys sit at height delta, ridges at 2*delta
    nseg = 2 * N + 1
    xs = [0.0] + [0.5 * a + (k - 1) * a for k in range(1, 2 * N + 1)] + [w]
    zs = [1.5 * delta] + [delta if k % 2 == 1 else 2.0 * delta for k in range(1, 2 * N + 1)] + [1.5 * delta]

    def P(xk, y, z):
        return xk * e1 + y * e2 + z * e3

    faces = []
    top_ids = []
    for k in range(nseg):
        nk = n_down if zs[k + 1] < zs[k] else n_up
        f = PlanarFace(
            [P(xs[k], 0, zs[k]), P(xs[k + 1], 0, zs[k + 1]), P(xs[k + 1], L, zs[k + 1]), P(xs[k], L, zs[k])],
            normal=nk,
            name=f"top{k}",
        )
        top_ids.append(len(faces))
        faces.append(f)
    bottom_id = len(faces)
    faces.append(PlanarFace([P(0, 0, 0), P(0, L, 0), P(w, L, 0), P(w, 0, 0)], normal=-e3, name="bottom"))
    side0_id = len(faces)
    faces.append(PlanarFace([P(0, 0, 0), P(0, 0, zs[0]), P(0, L, zs[0]), P(0, L, 0)], normal=-e1, name="side0"))
    sidew_id = len(faces)
    faces.append(PlanarFace([P(w, 0, 0), P(w, L, 0), P(w, L, zs[-1]), P(w, 0, zs[-1])], normal=e1, name="sidew"))
    end0_ids, endL_ids = [], []
    for k in range(nseg):
        x0, x1 = xs[k], xs[k + 1]
        z0, z1 = zs[k], zs[k + 1]
        end0_ids.append(len(faces))
        faces.append(PlanarFace([P(x0, 0, z0), P(x0, 0, 0), P(x1, 0, 0), P(x1, 0, z1)], normal=-e2, name=f"end0_{k}"))
        endL_ids.append(len(faces))
        faces.append(PlanarFace([P(x0, L, z0), P(x1, L, z1), P(x1, L, 0), P(x0, L, 0)], normal=e2, name=f"endL_{k}"))

    swapped = swap_faces(d)

    def classify(shape: DihedralShape) -> str:
        if shapes_match(shape, d):
            return "L1"
        if shapes_match(shape, swapped):
            return "L2"
        return "L3"

    edges = []

    def add_edge(ia, ib, p, q):
        edge = _edge_between(faces, ia, ib, p, q)
        edge.name = classify(edge.shape)
        edges.append(edge)

    for k in range(1, 2 * N + 1):
        add_edge(top_ids[k - 1], top_ids[k], P(xs[k], 0, zs[k]), P(xs[k], L, zs[k]))
    add_edge(side0_id, top_ids[0], P(0, 0, zs[0]), P(0, L, zs[0]))
    add_edge(top_ids[nseg - 1], sidew_id, P(w, 0, zs[-1]), P(w, L, zs[-1]))
    for k in range(nseg):
        x0, x1 = xs[k], xs[k + 1]
        z0, z1 = zs[k], zs[k + 1]
        add_edge(top_ids[k], end0_ids[k], P(x0, 0, z0), P(x1, 0, z1))
        add_edge(top_ids[k], endL_ids[k], P(x0, L, z0), P(x1, L, z1))
        add_edge(bottom_id, end0_ids[k], P(x0, 0, 0), P(x1, 0, 0))
        add_edge(bottom_id, endL_ids[k], P(x0, L, 0), P(x1, L, 0))
    add_edge(bottom_id, side0_id, P(0, 0, 0), P(0, L, 0))
    add_edge(bottom_id, sidew_id, P(w, 0, 0), P(w, L, 0))
    add_edge(side0_id, end0_ids[0], P(0, 0, 0), P(0, 0, zs[0]))
    add_edge(side0_id, endL_ids[0], P(0, L, 0), P(0, L, zs[0]))
    add_edge(sidew_id, end0_ids[nseg - 1], P(w, 0, 0), P(w, 0, zs[-1]))
    add_edge(sidew_id, endL_ids[nseg - 1], P(w, L, 0), P(w, L, zs[-1]))

    cells = []
    for k in range(nseg):
        poly = np.array([(xs[k], 0.0), (xs[k + 1], 0.0), (xs[k + 1], zs[k + 1]), (xs[k], zs[k])])
        cells.extend(_extrude_cells(poly, 0.0, L, e1, e2, e3))
    dom = AdmissibleDomain(faces, edges, np.array(cells), label=f"{label}_N{N}")
    dom.meta.update(n_teeth=N, frame=(e1, e2, e3), height_axis=e3)
    return dom


def build_wedge(d: DihedralShape, half_width: float, length: float, eps: float, label: str = "wedge") -> AdmissibleDomain:
    """Neighborhood of an edge: the solid wedge of shape d translated up by
    eps^2 along n1+n2 and clipped to the slab-like box
    [-half_width*eps^2, half_width*eps^2] x [0, length*eps] x [0, 2*eps^2].

    The top edge L_eps (shape d) sits at height eps^2, so its length is
    length*eps and the height integral along it is exactly length*eps^3.
    Works in both regimes: faces descending from the edge (convex wedge)
    or ascending (reentrant); containment of the clipped faces requires
    ``half_width >= (n1.e3)/|n1.e1|`` in the frame of d.
    """
    if eps <= 0 or half_width <= 0 or length <= 0:
        raise GeometryError("wedge parameters must be positive")
    e1, e2, e3, s1, c = _dihedral_frame(d)
    h = eps * eps
    A = float(half_width)
    Ly = float(length) * eps
    slope = abs(s1) / c
    xint = h / slope  # where the faces reach z=0 (descending) or z=2h (ascending)
    if xint > A * h + 1e-15 * h:
        raise GeometryError(
            f"containment violated: need half_width >= {c / abs(s1):.6g} so the wedge faces exit inside the box"
        )

    def P(x, y, z):
        return x * e1 + y * e2 + z * e3

    faces = []
    edges = []
    cells = []

    def lateral(p2a, p2b, normal, name):
        # cross polygon is CCW in (x, z); traverse b -> a so Newell points outward
        loop = [P(p2b[0], 0, p2b[1]), P(p2a[0], 0, p2a[1]), P(p2a[0], Ly, p2a[1]), P(p2b[0], Ly, p2b[1])]
        return PlanarFace(loop, normal=normal, name=name, auto_orient=True)

    def P0(p2):
        return P(p2[0], 0.0, p2[1])

    def PL(p2):
        return P(p2[0], Ly, p2[1])

    if s1 < 0:
        # faces descend from the edge: convex tent over the bottom plane
        apex, bl, br = (0.0, h), (-xint, 0.0), (xint, 0.0)
        cross = np.array([bl, br, apex])  # CCW
        faces.append(lateral(bl, apex, d.n1, "slant1"))
        faces.append(lateral(apex, br, d.n2, "slant2"))
        faces.append(lateral(br, bl, -e3, "bottom"))
        end0 = PlanarFace([P0(apex), P0(bl), P0(br)], normal=-e2, name="end0", auto_orient=True)
        endL = PlanarFace([PL(apex), PL(bl), PL(br)], normal=e2, name="endL", auto_orient=True)
        faces.extend([end0, endL])
        idx = {f.name: i for i, f in enumerate(faces)}
        top = _edge_between(faces, idx["slant1"], idx["slant2"], P0(apex), PL(apex), name="L_eps")
        edges.append(top)
        edges.append(_edge_between(faces, idx["slant1"], idx["bottom"], P0(bl), PL(bl)))
        edges.append(_edge_between(faces, idx["slant2"], idx["bottom"], P0(br), PL(br)))
        for pa, pb, fname in [(apex, bl, "slant1"), (apex, br, "slant2"), (bl, br, "bottom")]:
            edges.append(_edge_between(faces, idx[fname], idx["end0"], P0(pa), P0(pb)))
            edges.append(_edge_between(faces, idx[fname], idx["endL"], PL(pa), PL(pb)))
        cells.extend(_extrude_cells(cross, 0.0, Ly, e1, e2, e3))
    else:
        # faces ascend from the edge: box minus the V-notch above them
        apex = (0.0, h)
        vl, vr = (-xint, 2 * h), (xint, 2 * h)
        bl, br = (-A * h, 0.0), (A * h, 0.0)
        tl, tr = (-A * h, 2 * h), (A * h, 2 * h)
        # cross section (CCW): bl, br, tr, vr, apex, vl, tl; non-convex at the apex
        faces.append(lateral(bl, br, -e3, "bottom"))
        faces.append(lateral(br, tr, e1, "side+"))
        faces.append(lateral(tr, vr, e3, "top+"))
        faces.append(lateral(vr, apex, d.n2, "slant2"))
        faces.append(lateral(apex, vl, d.n1, "slant1"))
        faces.append(lateral(vl, tl, e3, "top-"))
        faces.append(lateral(tl, bl, -e1, "side-"))
        end_quads = [
            np.array([bl, (-xint, 0.0), vl, tl]),
            np.array([(-xint, 0.0), (0.0, 0.0), apex, vl]),
            np.array([(0.0, 0.0), (xint, 0.0), vr, apex]),
            np.array([(xint, 0.0), br, tr, vr]),
        ]
        for j, quad in enumerate(end_quads):
            faces.append(PlanarFace([P(p[0], 0, p[1]) for p in quad], normal=-e2, name=f"end0_{j}", auto_orient=True))
            faces.append(PlanarFace([P(p[0], Ly, p[1]) for p in quad], normal=e2, name=f"endL_{j}", auto_orient=True))
        idx = {f.name: i for i, f in enumerate(faces)}
        top = _edge_between(faces, idx["slant1"], idx["slant2"], P0(apex), PL(apex), name="L_eps")
        edges.append(top)
        rim = [("bottom", "side+", br), ("side+", "top+", tr), ("top+", "slant2", vr), ("slant1", "top-", vl), ("top-", "side-", tl), ("side-", "bottom", bl)]
        for fa, fb, p2 in rim:
            edges.append(_edge_between(faces, idx[fa], idx[fb], P0(p2), PL(p2)))
        ring = [
            ("bottom", 0, bl, (-xint, 0.0)),
            ("bottom", 1, (-xint, 0.0), (0.0, 0.0)),
            ("bottom", 2, (0.0, 0.0), (xint, 0.0)),
            ("bottom", 3, (xint, 0.0), br),
            ("side+", 3, br, tr),
            ("top+", 3, tr, vr),
            ("slant2", 2, vr, apex),
            ("slant1", 1, apex, vl),
            ("top-", 0, vl, tl),
            ("side-", 0, tl, bl),
        ]
        for fname, j, pa, pb in ring:
            edges.append(_edge_between(faces, idx[fname], idx[f"end0_{j}"], P(pa[0], 0, pa[1]), P(pb[0], 0, pb[1])))
            edges.append(_edge_between(faces, idx[fname], idx[f"endL_{j}"], P(pa[0], Ly, pa[1]), P(pb[0], Ly, pb[1])))
        for quad in end_quads:
            cells.extend(_extrude_cells(quad, 0.0, Ly, e1, e2, e3))

    if not shapes_match(edges[0].shape, d):
        raise GeometryError("wedge top edge does not realize the requested dihedral shape")
    dom = AdmissibleDomain(faces, edges, np.array(cells), label=f"{label}_eps{eps:g}")
    dom.meta.update(eps=eps, height_axis=e3, frame=(e1, e2, e3))
    return dom


def build_graph_patch_box(a, b, height: PolyField, order: int = 8, label: str = "graph_patch_box") -> AdmissibleDomain:
    """Box whose top face is the graph z = b3 + phi(x1, x2).

    ``height`` must vanish on the boundary of the top rectangle so the
    planar side faces still close the boundary.  The domain carries no
    volume decomposition (curved top); surface operations stay available.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if not np.all(b > a):
        raise GeometryError("box requires componentwise a < b")
    if height.nvars != 2 or height.shape != ():
        raise GeometryError("height must be a scalar field in (x1, x2)")
    a1, a2, a3 = a
    b1, b2, b3 = b
    for t in np.linspace(0.0, 1.0, 21):
        for u, v in (
            (a1 + t * (b1 - a1), a2),
            (a1 + t * (b1 - a1), b2),
            (a1, a2 + t * (b2 - a2)),
            (b1, a2 + t * (b2 - a2)),
        ):
            if abs(height((u, v))) > 1e-12:
                raise GeometryError("height must vanish on the top rectangle boundary")
    e = np.eye(3)
    patch = GraphPatchFace(
        origin=(0.0, 0.0, b3),
        t1=e[0],
        t2=e[1],
        m=e[2],
        base=[(a1, a2), (b1, a2), (b1, b2), (a1, b2)],
        height=height,
        orientation=1,
        order=order,
        name="top",
    )
    faces = [
        patch,
        PlanarFace([(a1, a2, a3), (a1, b2, a3), (b1, b2, a3), (b1, a2, a3)], name="bottom"),
        PlanarFace([(a1, a2, a3), (a1, a2, b3), (a1, b2, b3), (a1, b2, a3)], name="x-"),
        PlanarFace([(b1, a2, a3), (b1, b2, a3), (b1, b2, b3), (b1, a2, b3)], name="x+"),
        PlanarFace([(a1, a2, a3), (b1, a2, a3), (b1, a2, b3), (a1, a2, b3)], name="y-"),
        PlanarFace([(a1, b2, a3), (a1, b2, b3), (b1, b2, b3), (b1, b2, a3)], name="y+"),
    ]
    planar = faces[1:]
    edges = []
    for i in range(len(planar)):
        for j in range(i + 1, len(planar)):
            shared = _shared_segment(planar[i], planar[j])
            if shared is not None:
                p, q = shared
                ed = _edge_between(faces, i + 1, j + 1, p, q, name=f"edge{len(edges)}")
                edges.append(ed)
    rim = [
        ((a1, a2, b3), (b1, a2, b3), 4),
        ((b1, a2, b3), (b1, b2, b3), 3),
        ((b1, b2, b3), (a1, b2, b3), 5),
        ((a1, b2, b3), (a1, a2, b3), 2),
    ]
    for p, q, side in rim:
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        edges.append(StraightEdge(p, q, unit(q - p), (0, side), None, name="rim"))
    return AdmissibleDomain(faces, edges, None, label=label)


def _shared_segment(fa: PlanarFace, fb: PlanarFace):
    keys_b = set()
    Vb = fb.vertices
    for i in range(len(Vb)):
        p, q = Vb[i], Vb[(i + 1) % len(Vb)]
        keys_b.add(frozenset((tuple(np.round(p, 12)), tuple(np.round(q, 12)))))
    Va = fa.vertices
    for i in range(len(Va)):
        p, q = Va[i], Va[(i + 1) % len(Va)]
        if frozenset((tuple(np.round(p, 12)), tuple(np.round(q, 12)))) in keys_b:
            return p, q
    return None


def convex_hull_domain(points, label: str = "hull") -> AdmissibleDomain:
    """Admissible domain from the convex hull of a point cloud (triangulated facets)."""
    from scipy.spatial import ConvexHull

    points = np.asarray(points, dtype=float)
    hull = ConvexHull(points)
    faces = []
    for i, simplex in enumerate(hull.simplices):
        n = unit(hull.equations[i, :3])
        faces.append(PlanarFace(points[simplex], normal=n, name=f"f{i}", auto_orient=True))
    edges = []
    for i, nbrs in enumerate(hull.neighbors):
        for j in nbrs:
            if j <= i:
                continue
            shared = sorted(set(hull.simplices[i]) & set(hull.simplices[j]))
            if len(shared) != 2:
                raise GeometryError("hull facets share an unexpected number of vertices")
            p, q = points[shared[0]], points[shared[1]]
            edges.append(_edge_between(faces, i, int(j), p, q, name=f"e{i}_{j}"))
    center = points[hull.vertices].mean(axis=0)
    cells = _fan_cells(faces, center)
    return AdmissibleDomain(faces, edges, cells, label=label)


def random_convex_polyhedron(rng: np.random.Generator, n_points: int = 10, label: str = "hull") -> AdmissibleDomain:
    """Seeded random convex polyhedron with well-separated dihedral angles."""
    for _ in range(64):
        dirs = rng.normal(size=(n_points, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = rng.uniform(0.7, 1.3, size=n_points)
        pts = dirs * radii[:, None]
        try:
            dom = convex_hull_domain(pts, label=label)
            if all(abs(dihedral_angle(e.shape) - math.pi) > 1e-3 for e in dom.edges):
                return dom
        except GeometryError:
            continue
    raise GeometryError("failed to generate a valid random polyhedron")


def homothety(dom: AdmissibleDomain, ratio: float, center=(0.0, 0.0, 0.0)) -> AdmissibleDomain:
    """Scale a domain about a center: lengths by ratio, areas by ratio^2, volumes by ratio^3."""
    if ratio <= 0:
        raise GeometryError("homothety ratio must be positive")
    c = np.asarray(center, dtype=float)

    def mp(x):
        return c + ratio * (np.asarray(x, dtype=float) - c)

    faces = []
    for f in dom.faces:
        if f.is_planar:
            faces.append(PlanarFace([mp(v) for v in f.vertices], normal=f.normal, name=f.name, order=f.order))
        else:
            new_origin = mp(f.origin)
            scaled_terms = {
                key: coeff * ratio ** (1 - sum(key)) for key, coeff in f.height.terms.items()
            }
            new_height = PolyField(scaled_terms, (), 2)
            # base parameters measure arc along t1/t2 from the origin, so they scale by ratio
            faces.append(
                GraphPatchFace(
                    new_origin, f.t1, f.t2, f.m, f.base * ratio, new_height, f.orientation, f.order, f.name
                )
            )
    edges = []
    for e in dom.edges:
        if isinstance(e, StraightEdge):
            edges.append(StraightEdge(mp(e.p0), mp(e.p1), e.tau, e.faces, e.shape, name=e.name))
        else:
            raise GeometryError("homothety of curved edges is not supported")
    cells = None if dom.cells is None else np.array([[mp(v) for v in cell] for cell in dom.cells])
    out = AdmissibleDomain(faces, edges, cells, label=f"{dom.label}*{ratio:g}")
    out.meta = dict(dom.meta)
    return out


# ---------------------------------------------------------------------------
# parametrized families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShapeFamily:
    """Parametrized family of admissible domains with a shared shape census.

    ``generator(parameter)`` builds one member; ``domains()`` yields
    (parameter, domain) pairs over the grid in order.
    """

    kind: str
    parameters: tuple
    generator: object

    def domains(self):
        for p in self.parameters:
            yield p, self.generator(p)


def grooved_slab_family(d: DihedralShape, teeth_grid=(4, 8, 16, 32, 64)) -> ShapeFamily:
    return ShapeFamily("grooved_slab", tuple(int(n) for n in teeth_grid), lambda n: build_grooved_slab(int(n), d))


def wedge_family(d: DihedralShape, half_width: float, length: float, eps_grid) -> ShapeFamily:
    return ShapeFamily("wedge", tuple(float(e) for e in eps_grid), lambda eps: build_wedge(d, half_width, length, eps))


def homothety_family(dom: AdmissibleDomain, ratios, center=(0.0, 0.0, 0.0)) -> ShapeFamily:
    return ShapeFamily("homothety", tuple(float(r) for r in ratios), lambda r: homothety(dom, r, center))


# ---------------------------------------------------------------------------
# shape census
# ---------------------------------------------------------------------------


def plane_shape_census(dom: AdmissibleDomain, ndigits: int = 8) -> set:
    """Distinct plane shapes (outward normals) among the planar faces."""
    return {tuple(round(float(x), ndigits) + 0.0 for x in f.normal) for f in dom.faces if f.is_planar}


def edge_shape_census(dom: AdmissibleDomain, ndigits: int = 8) -> set:
    """Distinct dihedral shapes among edges with constant shape."""
    return {_canonical_shape_key(e.shape, ndigits) for e in dom.edges if e.shape is not None}
