import math

import numpy as np
import pytest

from hyperstress.fields import PolyField, div, random_field
from hyperstress.geometry import (
    GeometryError,
    GraphPatchFace,
    PlanarFace,
    build_box,
    build_cauchy_tetrahedron,
    build_graph_patch_box,
    build_grooved_slab,
    build_wedge,
    dihedral_angle,
    edge_shape_census,
    homothety,
    make_dihedral,
    plane_shape_census,
    random_convex_polyhedron,
    shapes_match,
    swap_faces,
)
from hyperstress.tensor import rotation_about, unit

E = np.eye(3)


def random_dihedral(rng):
    while True:
        tau = unit(rng.normal(size=3))
        n1 = np.cross(tau, rng.normal(size=3))
        n2 = np.cross(tau, rng.normal(size=3))
        if np.linalg.norm(n1) < 1e-6 or np.linalg.norm(n2) < 1e-6:
            continue
        n1, n2 = unit(n1), unit(n2)
        if np.linalg.norm(np.cross(n1, n2)) < 1e-2:
            continue
        return make_dihedral(n1, n2, tau)


# ---------------------------------------------------------------------------
# dihedral shapes
# ---------------------------------------------------------------------------


def test_make_dihedral_coordinate_shape():
    # the shape f3 = (-e1, -e2, e3) of the tetrahedron edge L3
    d = make_dihedral(-E[0], -E[1], E[2])
    assert np.allclose(d.nu1, np.cross(E[2], -E[0]))
    assert np.allclose(d.nu1, -E[1])
    assert np.allclose(d.nu2, -E[0])


def test_make_dihedral_cube_edge():
    d = make_dihedral(E[2], E[0], E[1])
    assert np.allclose(d.nu1, E[0])
    assert np.allclose(d.nu2, E[2])


def test_make_dihedral_swap_exchanges_conormals():
    rng = np.random.default_rng(0)
    for _ in range(20):
        d = random_dihedral(rng)
        s = make_dihedral(d.n2, d.n1, -d.tau)
        assert np.allclose(s.nu1, d.nu2, atol=1e-15)
        assert np.allclose(s.nu2, d.nu1, atol=1e-15)


def test_make_dihedral_rejects_degenerate():
    with pytest.raises(GeometryError, match="flat or folded"):
        make_dihedral(E[2], E[2], E[0])
    with pytest.raises(GeometryError, match="flat or folded"):
        make_dihedral(E[2], -E[2], E[0])
    with pytest.raises(GeometryError):
        make_dihedral(E[2], E[0], E[2])  # tau not orthogonal


def test_dihedral_angle_cube_edge():
    d = make_dihedral(E[2], E[0], E[1])
    theta = dihedral_angle(d)
    assert theta == pytest.approx(3 * math.pi / 2, abs=1e-12)
    # rotation oracle: rotating -n1 by theta about tau lands on n2
    assert np.allclose(rotation_about(d.tau, theta) @ (-d.n1), d.n2, atol=1e-12)


def test_dihedral_angle_rejects_flat_limit():
    n1 = E[2]
    for theta in (1e-12, math.pi - 1e-12):
        n2 = rotation_about(E[1], theta) @ (-n1)
        # angle(-n1 -> n2) = theta - pi mod 2pi; near-flat configurations must fail somewhere
        with pytest.raises(GeometryError):
            d = make_dihedral(n1, unit(n2), E[1])
            dihedral_angle(d)


def test_dihedral_angle_swap_invariance():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = random_dihedral(rng)
        s = make_dihedral(d.n2, d.n1, -d.tau)
        assert abs(dihedral_angle(d) - dihedral_angle(s)) <= 1e-12
        # rotation oracle on every sample
        assert np.allclose(rotation_about(d.tau, dihedral_angle(d)) @ (-d.n1), d.n2, atol=1e-10)


# ---------------------------------------------------------------------------
# volume/face/edge quadrature
# ---------------------------------------------------------------------------


def test_unit_cube_volume_and_closure():
    box = build_box((0, 0, 0), (1, 1, 1))
    box.validate()
    assert box.volume() == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(box.closure_vector())) <= 1e-12 * box.surface_area()


def test_integrate_constant_and_divergence():
    box = build_box((0, 0, 0), (1, 1, 1))
    one = PolyField.constant(1.0)
    assert box.integrate_volume(one) == pytest.approx(1.0, abs=1e-14)
    x_field = PolyField(
        {(1, 0, 0): np.array([1.0, 0, 0]), (0, 1, 0): np.array([0, 1.0, 0]), (0, 0, 1): np.array([0, 0, 1.0])},
        (3,),
        3,
    )
    assert box.integrate_volume(div(x_field)) == pytest.approx(3.0, abs=1e-13)


def test_integrate_xyz_cube():
    # analytic antiderivative: (1/2)^3
    box = build_box((0, 0, 0), (1, 1, 1))
    f = PolyField.monomial((1, 1, 1), 1.0)
    assert box.integrate_volume(f) == pytest.approx(0.125, abs=1e-14)


def test_face_area_and_edge_integral():
    face = PlanarFace([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)])
    assert face.integrate(PolyField.constant(1.0)) == pytest.approx(1.0, abs=1e-14)
    from hyperstress.geometry import StraightEdge

    edge = StraightEdge((0, 0, 1), (0, 1, 1), (0, 1, 0), (0, 1), None)
    height = PolyField.monomial((0, 0, 1), 1.0)
    assert edge.integrate(height) == pytest.approx(1.0, abs=1e-14)


def test_divergence_theorem_on_built_domains():
    rng = np.random.default_rng(2)
    domains = [
        build_box((-0.3, 0.1, -1.0), (0.9, 1.4, 0.2)),
        build_cauchy_tetrahedron(unit([1.0, 2.0, 1.5]), 0.8),
        build_grooved_slab(4, random_dihedral(rng)),
        build_wedge(make_dihedral(E[2], E[0], E[1]), 2.0, 1.0, 0.5),
        random_convex_polyhedron(rng),
    ]
    for dom in domains:
        dom.validate()
        W = random_field(rng, (3,), 3)
        lhs = dom.integrate_volume(div(W))
        rhs = sum(f.integrate(W.contract("i,i->", f.normal)) for f in dom.faces)
        assert abs(lhs - rhs) <= 1e-12 * (abs(lhs) + abs(rhs) + 1)
        assert np.max(np.abs(dom.closure_vector())) <= 1e-12 * dom.surface_area()


def test_face_auto_orient_mismatch():
    with pytest.raises(GeometryError, match="unoriented"):
        PlanarFace([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)], normal=(0, 0, -1))


def test_face_rejects_noncoplanar():
    with pytest.raises(GeometryError, match="coplanar"):
        PlanarFace([(0, 0, 0), (1, 0, 0), (1, 1, 0.3), (0, 1, 0)])


# ---------------------------------------------------------------------------
# Cauchy tetrahedron geometry
# ---------------------------------------------------------------------------


def test_tetrahedron_height_edge_relation():
    n = unit([1.0, 1.0, 1.0])
    tet = build_cauchy_tetrahedron(n, 1.0)
    tet.validate()
    by_name = {e.name: e for e in tet.edges}
    for i in range(3):
        Li = by_name[f"L{i + 1}"]
        assert Li.length * n[i] == pytest.approx(1.0, abs=1e-12)
        assert Li.length == pytest.approx(math.sqrt(3.0), abs=1e-12)


def test_tetrahedron_area_relation():
    # 2|S|h = |L1||L2||L3|, so |S| = 3 sqrt(3) / 2 for n = (1,1,1)/sqrt(3), h = 1
    n = unit([1.0, 1.0, 1.0])
    tet = build_cauchy_tetrahedron(n, 1.0)
    S = next(f for f in tet.faces if f.name == "S")
    assert S.area == pytest.approx(3.0 * math.sqrt(3.0) / 2.0, rel=1e-12)


def test_tetrahedron_relations_random():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = unit(rng.uniform(0.15, 1.0, size=3))
        h = float(rng.uniform(0.3, 2.0))
        tet = build_cauchy_tetrahedron(n, h)
        faces = {f.name: f for f in tet.faces}
        edges = {e.name: e for e in tet.edges}
        L = [edges[f"L{i + 1}"].length for i in range(3)]
        for i in range(3):
            assert abs(h - L[i] * n[i]) <= 1e-10 * h
            assert abs(2 * faces["S"].area * h - 2 * faces[f"S{i + 1}"].area * L[i]) <= 1e-10 * h
        assert abs(2 * faces["S"].area * h - L[0] * L[1] * L[2]) <= 1e-10 * max(1.0, L[0] * L[1] * L[2])


def test_tetrahedron_edge_shapes():
    tet = build_cauchy_tetrahedron(unit([1.0, 1.0, 1.0]), 1.0)
    shapes = [
        make_dihedral(-E[1], -E[2], E[0]),
        make_dihedral(-E[2], -E[0], E[1]),
        make_dihedral(-E[0], -E[1], E[2]),
    ]
    by_name = {e.name: e for e in tet.edges}
    for i, ref in enumerate(shapes):
        assert shapes_match(by_name[f"L{i + 1}"].shape, ref)


def test_tetrahedron_rejects_bad_input():
    with pytest.raises(GeometryError):
        build_cauchy_tetrahedron(unit([1.0, 1.0, -1.0]), 1.0)
    with pytest.raises(GeometryError):
        build_cauchy_tetrahedron(unit([1.0, 1.0, 1.0]), -1.0)


# ---------------------------------------------------------------------------
# grooved slab family
# ---------------------------------------------------------------------------


def test_groove_scalings_and_census():
    rng = np.random.default_rng(4)
    d = random_dihedral(rng)
    grid = [4, 8, 16, 32, 64]
    vols, l1, l3, planes, dihedrals = [], [], [], [], []
    for N in grid:
        slab = build_grooved_slab(N, d)
        slab.validate()
        vols.append(slab.volume() * N**4)
        l1.append(sum(e.length for e in slab.edges if e.name == "L1"))
        l3.append(sum(e.length for e in slab.edges if e.name == "L3") * N)
        planes.append(len(plane_shape_census(slab)))
        dihedrals.append(len(edge_shape_census(slab)))
    # volume of order N^-4: scaled values bounded above and below
    assert max(vols) / min(vols) < 1.01
    # groove edge lengths tend to 1; L3 total is of order N^-1
    assert all(abs(v - 1.0) <= 1e-10 for v in l1)
    l3_slope = np.polyfit(np.log(grid), np.log([v / N for v, N in zip(l3, grid)]), 1)[0]
    assert abs(l3_slope + 1.0) <= 0.2
    # the set of shapes does not depend on N
    assert len(set(planes)) == 1 and len(set(dihedrals)) == 1
    # this generator reproduces the published counts exactly
    assert planes[0] == 7 and dihedrals[0] == 16


def test_groove_edge_labels_and_heights():
    rng = np.random.default_rng(5)
    d = random_dihedral(rng)
    N = 4
    slab = build_grooved_slab(N, d)
    e3 = slab.meta["height_axis"]
    l1 = [e for e in slab.edges if e.name == "L1"]
    l2 = [e for e in slab.edges if e.name == "L2"]
    assert len(l1) == N and len(l2) == N
    heights = {round(float(np.dot(e.midpoint(), e3)) * N**2, 9) for e in l1 + l2}
    assert heights == {1.0, 2.0}
    swapped = swap_faces(d)
    assert all(shapes_match(e.shape, d) for e in l1)
    assert all(shapes_match(e.shape, swapped) for e in l2)


def test_groove_rejects_small_n():
    with pytest.raises(GeometryError):
        build_grooved_slab(1, make_dihedral(E[2], E[0], E[1]))


# ---------------------------------------------------------------------------
# wedge family
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("convex", [True, False])
def test_wedge_scalings(convex):
    d = make_dihedral(E[2], E[0], E[1])  # descending-face regime
    if not convex:
        d = make_dihedral(d.n2, d.n1, d.tau)  # reversed: ascending-face regime
    length = 1.0
    eps_grid = [2.0**-k for k in range(1, 7)]
    vols, lens, heights = [], [], []
    for eps in eps_grid:
        dom = build_wedge(d, 2.0, length, eps)
        dom.validate()
        edge = next(e for e in dom.edges if e.name == "L_eps")
        assert shapes_match(edge.shape, d)
        vols.append(dom.volume())
        lens.append(edge.length / eps)
        e3 = dom.meta["height_axis"]
        height = PolyField(
            {(1, 0, 0): float(e3[0]), (0, 1, 0): float(e3[1]), (0, 0, 1): float(e3[2])}, (), 3
        )
        heights.append(float(edge.integrate(height)) / eps**3)
    slope = np.polyfit(np.log(eps_grid), np.log(vols), 1)[0]
    assert abs(slope - 5.0) <= 0.1
    assert all(abs(v - length) <= 1e-12 for v in lens)
    # k = lim eps^-3 int (x.e3) dl exists and is positive (= length for straight edges)
    assert all(abs(h - length) <= 1e-10 for h in heights)


def test_wedge_doubling_length_doubles_k():
    d = make_dihedral(E[2], E[0], E[1])

    def k_of(length):
        dom = build_wedge(d, 2.0, length, 0.25)
        edge = next(e for e in dom.edges if e.name == "L_eps")
        e3 = dom.meta["height_axis"]
        height = PolyField(
            {(1, 0, 0): float(e3[0]), (0, 1, 0): float(e3[1]), (0, 0, 1): float(e3[2])}, (), 3
        )
        return float(edge.integrate(height)) / 0.25**3

    assert k_of(2.0) == pytest.approx(2 * k_of(1.0), rel=1e-12)


def test_wedge_containment_error():
    d = make_dihedral(E[2], E[0], E[1])
    with pytest.raises(GeometryError, match="containment"):
        build_wedge(d, 0.5, 1.0, 0.25)  # needs half_width >= 1 for the right-angle wedge


# ---------------------------------------------------------------------------
# graph patches
# ---------------------------------------------------------------------------


def paraboloid_patch():
    height = PolyField({(2, 0): 0.5, (0, 2): 0.5}, (), 2)
    return GraphPatchFace(
        origin=(0.0, 0.0, 0.0),
        t1=E[0],
        t2=E[1],
        m=E[2],
        base=[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        height=height,
        order=16,
    )


def richardson_area_oracle():
    """Midpoint-rule area of the paraboloid patch, Richardson extrapolated twice."""

    def midpoint(m):
        h = 1.0 / m
        u = (np.arange(m) + 0.5) * h
        U, V = np.meshgrid(u, u, indexing="ij")
        return float(np.sum(np.sqrt(1.0 + U**2 + V**2)) * h * h)

    def rich(f, m):
        return (4.0 * f(2 * m) - f(m)) / 3.0

    r1 = rich(midpoint, 100)
    r2 = rich(midpoint, 200)
    return (16.0 * r2 - r1) / 15.0


def test_graph_patch_area_against_richardson_oracle():
    patch = paraboloid_patch()
    assert abs(patch.area() - richardson_area_oracle()) <= 1e-10


def test_graph_patch_box_closure():
    height = PolyField({(1, 1): 1.0, (2, 1): -1.0, (1, 2): -1.0, (2, 2): 1.0}, (), 2)  # u(1-u)v(1-v)
    dom = build_graph_patch_box((0, 0, 0), (1, 1, 1), height)
    dom.validate()
    assert np.max(np.abs(dom.closure_vector())) <= 1e-12 * dom.surface_area()
    assert dom.volume_from_surface() == pytest.approx(1.0 + 1.0 / 36.0, abs=1e-12)


def test_graph_patch_box_rejects_nonvanishing_rim():
    height = PolyField({(2, 0): 1.0}, (), 2)
    with pytest.raises(GeometryError, match="vanish"):
        build_graph_patch_box((0, 0, 0), (1, 1, 1), height)


# ---------------------------------------------------------------------------
# homothety
# ---------------------------------------------------------------------------


def test_homothety_scalings():
    box = build_box((0, 0, 0), (1, 1, 1))
    same = homothety(box, 1.0)
    assert same.volume() == pytest.approx(box.volume(), abs=1e-15)
    half = homothety(box, 0.5)
    assert half.volume() == pytest.approx(0.125, abs=1e-14)
    tet = build_cauchy_tetrahedron(unit([1.0, 1.0, 1.0]), 1.0)
    S = next(f for f in tet.faces if f.name == "S")
    for eps in (0.5, 0.25):
        scaled = homothety(tet, eps, center=(0, 0, 0))
        S_eps = next(f for f in scaled.faces if f.name == "S")
        assert S_eps.area == pytest.approx(eps**2 * S.area, rel=1e-12)
    with pytest.raises(GeometryError):
        homothety(box, -1.0)


# ---------------------------------------------------------------------------
# representation remark: n1 (x) nu1 + n2 (x) nu2 is symmetric
# ---------------------------------------------------------------------------


def test_dihedral_outer_product_symmetry():
    rng = np.random.default_rng(6)
    for _ in range(100):
        d = random_dihedral(rng)
        M = np.outer(d.n1, d.nu1) + np.outer(d.n2, d.nu2)
        assert np.max(np.abs(M - M.T)) <= 1e-12


# ---------------------------------------------------------------------------
# parametrized families
# ---------------------------------------------------------------------------


def test_shape_family_generates_valid_domains():
    from hyperstress.geometry import grooved_slab_family, homothety_family, wedge_family

    d = make_dihedral(E[2], E[0], E[1])
    fam = wedge_family(d, 2.0, 1.0, (0.5, 0.25))
    for eps, dom in fam.domains():
        dom.validate()
        assert dom.meta["eps"] == eps
    slabs = grooved_slab_family(d, (2, 4))
    censuses = {frozenset(edge_shape_census(dom)) for _, dom in slabs.domains()}
    assert len(censuses) == 1  # the set of shapes is independent of the parameter
    cubes = homothety_family(build_box((0, 0, 0), (1, 1, 1)), (1.0, 0.5, 0.25))
    vols = [dom.volume() for _, dom in cubes.domains()]
    assert vols == pytest.approx([1.0, 0.125, 0.125 / 8])


# ---------------------------------------------------------------------------
# curved edges and rule caps
# ---------------------------------------------------------------------------


def test_curve_edge_length_and_integral():
    from hyperstress.geometry import CurveEdge

    # parabola (t, t^2, 0): length = int sqrt(1 + 4 t^2) dt on [0, 1]
    curve = PolyField({(1,): np.array([1.0, 0.0, 0.0]), (2,): np.array([0.0, 1.0, 0.0])}, (3,), 1)
    edge = CurveEdge(curve, (0, 1), order=40)
    exact = 0.5 * math.sqrt(5.0) + 0.25 * math.asinh(2.0)
    assert edge.length == pytest.approx(exact, abs=1e-12)
    assert np.allclose(edge.point(0.5), [0.5, 0.25, 0.0])
    with pytest.raises(GeometryError, match="degree"):
        CurveEdge(PolyField({(4,): np.array([1.0, 0, 0])}, (3,), 1), (0, 1))


def test_integrate_volume_degree_cap():
    from hyperstress.quadrature import QuadratureError

    box = build_box((0, 0, 0), (1, 1, 1))
    with pytest.raises(QuadratureError, match="exceeds"):
        box.integrate_volume(lambda x: 1.0, degree=200)
