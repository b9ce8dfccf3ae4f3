import numpy as np
import pytest

from hyperstress.contact import (
    ContactError,
    RawContactAnsatz,
    StressState,
    VelocityField,
    bulk_power,
    contact_power,
    edge_force,
    edge_force_field,
    interstitial_flux,
    normal_tangential_split,
    normal_traction,
    quasi_balance_constant,
    raw_power,
    reduced_edge_force,
    reduced_surface_force,
    surface_divergence,
    surface_force,
    surface_force_field,
)
from hyperstress.fields import PolyField, field_einsum, grad, random_field
from hyperstress.geometry import PlanarFace, build_box, make_dihedral, random_convex_polyhedron
from hyperstress.tensor import projector, unit

E = np.eye(3)


def constant_state(T=None, C=None):
    T = np.zeros((3, 3)) if T is None else np.asarray(T, float)
    C = np.zeros((3, 3, 3)) if C is None else np.asarray(C, float)
    return StressState.constant(T, C)


def random_state(rng, degree=2):
    return StressState(random_field(rng, (3, 3), degree), random_field(rng, (3, 3, 3), degree))


def xy_face():
    return PlanarFace([(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)])


# ---------------------------------------------------------------------------
# derived densities
# ---------------------------------------------------------------------------


def test_normal_traction_zero_and_single_entry():
    assert np.all(normal_traction(constant_state(), (0, 0, 0), E[2]) == 0)
    C = np.zeros((3, 3, 3))
    C[0, 2, 2] = 2.0
    assert np.allclose(normal_traction(constant_state(C=C), (0, 0, 0), E[2]), [2, 0, 0])


def test_normal_traction_spherical_is_isotropic():
    g = np.array([4.0, 5.0, 6.0])
    C = np.einsum("i,jk->ijk", g, np.eye(3))
    s = constant_state(C=C)
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = unit(rng.normal(size=3))
        assert np.allclose(normal_traction(s, (0, 0, 0), n), g, atol=1e-13)


def test_normal_traction_parity():
    rng = np.random.default_rng(1)
    s = random_state(rng)
    for _ in range(50):
        n = unit(rng.normal(size=3))
        x = rng.uniform(-1, 1, size=3)
        assert np.array_equal(normal_traction(s, x, n), normal_traction(s, x, -n))


def test_edge_force_examples():
    f3 = make_dihedral(-E[0], -E[1], E[2])
    assert np.all(edge_force(constant_state(), (0, 0, 0), f3) == 0)
    g = np.array([4.0, 5.0, 6.0])
    spherical = constant_state(C=np.einsum("i,jk->ijk", g, np.eye(3)))
    assert np.allclose(edge_force(spherical, (0, 0, 0), f3), 0, atol=1e-15)
    C = np.zeros((3, 3, 3))
    C[0, 0, 1] = 1.0
    C[0, 1, 0] = 1.0
    assert np.allclose(edge_force(constant_state(C=C), (0, 0, 0), f3), [2, 0, 0])


def test_edge_force_swap_invariance_exact():
    rng = np.random.default_rng(2)
    s = random_state(rng, 1)
    for _ in range(50):
        tau = unit(rng.normal(size=3))
        n1 = unit(np.cross(tau, rng.normal(size=3)))
        n2 = unit(np.cross(tau, rng.normal(size=3)))
        if np.linalg.norm(np.cross(n1, n2)) < 1e-2:
            continue
        d = make_dihedral(n1, n2, tau)
        swapped = make_dihedral(n2, n1, -tau)
        x = rng.uniform(-1, 1, size=3)
        assert np.array_equal(edge_force(s, x, d), edge_force(s, x, swapped))


def test_gauge_invariance_right_antisymmetric():
    rng = np.random.default_rng(3)
    s = random_state(rng, 1)
    A = rng.normal(size=(3, 3, 3))
    A = 0.5 * (A - A.swapaxes(1, 2))
    gauged = StressState(s.stress, s.hyperstress + PolyField.constant(A))
    for _ in range(50):
        tau = unit(rng.normal(size=3))
        n1 = unit(np.cross(tau, rng.normal(size=3)))
        n2 = unit(np.cross(tau, rng.normal(size=3)))
        if np.linalg.norm(np.cross(n1, n2)) < 1e-2:
            continue
        d = make_dihedral(n1, n2, tau)
        x = rng.uniform(-1, 1, size=3)
        assert np.linalg.norm(edge_force(gauged, x, d) - edge_force(s, x, d)) <= 1e-13
        assert np.linalg.norm(normal_traction(gauged, x, n1) - normal_traction(s, x, n1)) <= 1e-13


def test_spherical_hyperstress_characterization():
    # C(x) = g(x) (x) Id gives vanishing edge forces and traction g(x) for every n
    rng = np.random.default_rng(4)
    gfield = random_field(rng, (3,), 2)
    C = field_einsum("i,jk->ijk", gfield, PolyField.constant(np.eye(3)))
    s = StressState(PolyField.zero((3, 3)), C)
    for _ in range(20):
        x = rng.uniform(-1, 1, size=3)
        n = unit(rng.normal(size=3))
        tau = unit(np.cross(n, rng.normal(size=3)))
        n2 = unit(np.cross(tau, rng.normal(size=3)))
        if np.linalg.norm(np.cross(n, n2)) < 1e-2:
            continue
        d = make_dihedral(n, n2, tau)
        assert np.linalg.norm(edge_force(s, x, d)) <= 1e-13
        assert np.allclose(normal_traction(s, x, n), gfield(x), atol=1e-13)


# ---------------------------------------------------------------------------
# surface divergence and surface force
# ---------------------------------------------------------------------------


def test_surface_divergence_constant_field():
    face = xy_face()
    W = PolyField.constant(np.diag([1.0, 1.0, 0.0]))
    assert surface_divergence(face, W).is_zero()


def test_surface_divergence_linear_example():
    face = xy_face()
    W = PolyField({(1, 0, 0): _single((0, 0))}, (3, 3), 3)  # W11 = x1
    res = surface_divergence(face, W)
    assert np.allclose(res((0.3, 0.4, 0.0)), [1, 0, 0])


def _single(idx):
    M = np.zeros((3, 3))
    M[idx] = 1.0
    return M


def test_surface_divergence_rejects_non_tangential():
    face = xy_face()
    W = PolyField.constant(np.eye(3))  # W.n = e3 on the third row... columns: W @ e3 = e3 != 0
    with pytest.raises(ContactError):
        surface_divergence(face, W)


def test_facewise_surface_divergence_theorem():
    # integral of div_s W over the face equals the conormal flux over its boundary
    rng = np.random.default_rng(5)
    from hyperstress.geometry import StraightEdge, build_cauchy_tetrahedron, random_convex_polyhedron

    faces = [xy_face()]
    faces.extend(build_cauchy_tetrahedron(unit([1.0, 2.0, 0.7]), 0.9).faces)
    faces.extend(random_convex_polyhedron(rng).faces[:3])
    for face in faces:
        Pi = projector(face.normal)
        for _ in range(3):
            A = random_field(rng, (3, 3), 3)
            W = A.contract("ij,jk->ik", Pi)
            lhs = face.integrate(surface_divergence(face, W))
            rhs = np.zeros(3)
            for p, q, nu in face.boundary_segments():
                seg = StraightEdge(p, q, unit(q - p), (0, 0), None)
                rhs = rhs + seg.integrate(W.contract("ij,j->i", nu))
            assert np.max(np.abs(lhs - rhs)) <= 1e-12 * (1 + np.max(np.abs(lhs)))


def test_surface_force_constant_hyperstress_reduces_to_Tn():
    rng = np.random.default_rng(6)
    T = rng.normal(size=(3, 3))
    C = rng.normal(size=(3, 3, 3))
    s = constant_state(T=T, C=C)
    face = xy_face()
    F = surface_force(s, face, np.array([0.3, 0.3, 0.0]))
    assert np.allclose(F, T @ face.normal, atol=1e-14)


def test_surface_force_identity_stress():
    s = constant_state(T=np.eye(3))
    face = xy_face()
    assert np.allclose(surface_force(s, face, np.zeros(3)), [0, 0, 1])


def test_surface_force_divergence_term():
    # C113 = x1 on the plane n = e3: F = -div_s((C.n).Pi) = (-1, 0, 0)
    C = PolyField({(1, 0, 0): _c113()}, (3, 3, 3), 3)
    s = StressState(PolyField.zero((3, 3)), C)
    face = xy_face()
    assert np.allclose(surface_force(s, face, np.array([0.5, 0.5, 0.0])), [-1, 0, 0], atol=1e-14)


def _c113():
    C = np.zeros((3, 3, 3))
    C[0, 0, 2] = 1.0
    return C


# ---------------------------------------------------------------------------
# power functionals
# ---------------------------------------------------------------------------


def test_contact_power_constant_velocity_closure():
    s = constant_state(T=np.eye(3))
    box = build_box((0, 0, 0), (1, 1, 1))
    u = VelocityField.constant((1.0, 2.0, 3.0))
    pb = contact_power(s, box, u)
    assert abs(pb.total) <= 1e-13
    assert pb.edge_power == 0.0 and pb.normal_power == 0.0


def test_contact_power_identity_stress_dilation():
    s = constant_state(T=np.eye(3))
    box = build_box((0, 0, 0), (1, 1, 1))
    u = VelocityField(
        PolyField(
            {(1, 0, 0): np.array([1.0, 0, 0]), (0, 1, 0): np.array([0, 1.0, 0]), (0, 0, 1): np.array([0, 0, 1.0])},
            (3,),
            3,
        )
    )
    pb = contact_power(s, box, u)
    assert pb.total == pytest.approx(3.0, abs=1e-12)
    assert bulk_power(s, box, u) == pytest.approx(3.0, abs=1e-12)


def test_power_consistency_random():
    rng = np.random.default_rng(7)
    for i in range(5):
        dom = build_box((0, 0, 0), (1, 1, 1)) if i % 2 == 0 else random_convex_polyhedron(rng)
        s = random_state(rng)
        u = VelocityField(random_field(rng, (3,), 2))
        cp = contact_power(s, dom, u).total
        bp = bulk_power(s, dom, u)
        assert abs(cp - bp) <= 1e-12 * (abs(cp) + abs(bp) + 1)


def test_quasi_balance_bound():
    rng = np.random.default_rng(8)
    for _ in range(5):
        dom = random_convex_polyhedron(rng)
        s = random_state(rng)
        u = VelocityField(random_field(rng, (3,), 2))
        K = quasi_balance_constant(s, u, dom)
        assert abs(contact_power(s, dom, u).total) <= K * dom.volume() + 1e-12


def test_power_breakdown_total_is_sum():
    rng = np.random.default_rng(9)
    s = random_state(rng)
    u = VelocityField(random_field(rng, (3,), 2))
    pb = contact_power(s, build_box((0, 0, 0), (1, 1, 1)), u)
    assert pb.total == pb.surface_force_power + pb.edge_power + pb.normal_power
    assert abs(sum(v for _, v in pb.per_edge) - pb.edge_power) <= 1e-13 * (1 + abs(pb.edge_power))


# ---------------------------------------------------------------------------
# interstitial flux and the normal/tangential split
# ---------------------------------------------------------------------------


def test_interstitial_flux_zero_cases():
    rng = np.random.default_rng(10)
    s = constant_state()
    u = VelocityField(random_field(rng, (3,), 2))
    assert np.all(interstitial_flux(s, u, (0.1, 0.2, 0.3)) == 0)
    s2 = random_state(rng)
    u0 = VelocityField.constant((1.0, 1.0, 1.0))
    assert np.all(interstitial_flux(s2, u0, (0.1, 0.2, 0.3)) == 0)


def test_interstitial_flux_normal_component():
    # q.n = gradU : (C.n) pointwise
    rng = np.random.default_rng(11)
    s = random_state(rng)
    u = VelocityField(random_field(rng, (3,), 2))
    gU = grad(u.field)
    for _ in range(100):
        x = rng.uniform(-1, 1, size=3)
        n = unit(rng.normal(size=3))
        q = interstitial_flux(s, u, x)
        Cn = np.einsum("ijk,k->ij", s.hyperstress(x), n)
        rhs = float(np.einsum("ij,ij->", gU(x), Cn))
        assert abs(float(np.dot(q, n)) - rhs) <= 1e-13 * (1 + abs(rhs))


def test_normal_tangential_split():
    rng = np.random.default_rng(12)
    g = np.array([1.0, -2.0, 0.5])
    spherical = constant_state(C=np.einsum("i,jk->ijk", g, np.eye(3)))
    n = unit(rng.normal(size=3))
    u0 = rng.normal(size=3)
    u = VelocityField.linear_along(n, u0)
    normal_part, tangential_part = normal_tangential_split(spherical, u, np.zeros(3), n)
    assert abs(tangential_part) <= 1e-13
    assert normal_part == pytest.approx(float(np.dot(u0, g)), abs=1e-13)
    const = VelocityField.constant((1.0, 2.0, 3.0))
    assert normal_tangential_split(spherical, const, np.zeros(3), n) == (0.0, 0.0)
    s = random_state(rng)
    u2 = VelocityField(random_field(rng, (3,), 2))
    for _ in range(100):
        x = rng.uniform(-1, 1, size=3)
        m = unit(rng.normal(size=3))
        np_part, tg_part = normal_tangential_split(s, u2, x, m)
        Cn = np.einsum("ijk,k->ij", s.hyperstress(x), m)
        full = float(np.einsum("ij,ij->", grad(u2.field)(x), Cn))
        assert abs(np_part + tg_part - full) <= 1e-13 * (1 + abs(full))


# ---------------------------------------------------------------------------
# raw densities and reduced forces
# ---------------------------------------------------------------------------


def test_reduced_forces_consistent_state():
    rng = np.random.default_rng(13)
    s = random_state(rng)
    box = build_box((0, 0, 0), (1, 1, 1))
    raw = RawContactAnsatz.from_state(s, box)
    for e in box.edges:
        x = e.midpoint()
        assert np.linalg.norm(reduced_edge_force(s, raw, e.shape, x)) <= 1e-13
    for f in box.faces:
        x = f.centroid
        assert np.allclose(reduced_surface_force(s, raw, f, x), s.stress(x) @ f.normal, atol=1e-12)


def test_reduced_edge_force_raw_constant():
    f0 = np.array([2.0, -1.0, 0.0])
    d = make_dihedral(E[2], E[0], E[1])
    raw = RawContactAnsatz(edge=[(d, PolyField.constant(f0))])
    s = constant_state()  # C = 0
    assert np.allclose(reduced_edge_force(s, raw, d, np.zeros(3)), f0)


def test_reduced_surface_force_planar_constant_hyperstress():
    rng = np.random.default_rng(14)
    T = rng.normal(size=(3, 3))
    C = rng.normal(size=(3, 3, 3))
    s = constant_state(T=T, C=C)
    face = xy_face()
    raw = RawContactAnsatz(surface=[(face.normal, surface_force_field(s, face))])
    # constant C on a plane: the div_s term vanishes, so F' = raw F = T.n
    assert np.allclose(reduced_surface_force(s, raw, face, np.zeros(3)), T @ face.normal, atol=1e-13)


def test_raw_power_zero_and_consistency():
    rng = np.random.default_rng(15)
    box = build_box((0, 0, 0), (1, 1, 1))
    u = VelocityField(random_field(rng, (3,), 2))
    assert raw_power(RawContactAnsatz(), box, u).total == 0.0
    s = random_state(rng)
    raw = RawContactAnsatz.from_state(s, box)
    pb_raw = raw_power(raw, box, u, include_normal=False)
    pb = contact_power(s, box, u)
    assert pb_raw.surface_force_power == pytest.approx(pb.surface_force_power, rel=1e-12, abs=1e-13)
    assert pb_raw.edge_power == pytest.approx(pb.edge_power, rel=1e-12, abs=1e-13)


def test_edge_force_field_matches_pointwise():
    rng = np.random.default_rng(16)
    s = random_state(rng)
    d = make_dihedral(E[2], E[0], E[1])
    field = edge_force_field(s, d)
    for _ in range(10):
        x = rng.uniform(-1, 1, size=3)
        assert np.allclose(field(x), edge_force(s, x, d), atol=1e-13)


def test_surface_divergence_flat_patch_matches_planar():
    from hyperstress.geometry import GraphPatchFace

    rng = np.random.default_rng(17)
    patch = GraphPatchFace(
        origin=(0.0, 0.0, 0.0),
        t1=E[0],
        t2=E[1],
        m=E[2],
        base=[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)],
        height=PolyField.zero((), 2),
    )
    face = PlanarFace([(-1, -1, 0), (1, -1, 0), (1, 1, 0), (-1, 1, 0)])
    A = random_field(rng, (3, 3), 2)
    W = A.contract("ij,jk->ik", projector(E[2]))
    planar = surface_divergence(face, W)
    curved = surface_divergence(patch, W)
    for _ in range(10):
        x = np.array([*rng.uniform(-0.9, 0.9, size=2), 0.0])
        assert np.allclose(curved(x), planar(x), atol=1e-12)


def test_contact_power_on_graph_patch_box():
    # closure on the curved-top box: constant velocity sees no net power from T = Id
    from hyperstress.geometry import build_graph_patch_box

    height = PolyField({(1, 1): 1.0, (2, 1): -1.0, (1, 2): -1.0, (2, 2): 1.0}, (), 2)
    dom = build_graph_patch_box((0, 0, 0), (1, 1, 1), height, order=10)
    s = constant_state(T=np.eye(3))
    pb = contact_power(s, dom, VelocityField.constant((1.0, -2.0, 0.5)))
    assert abs(pb.total) <= 1e-12
    assert pb.normal_power == 0.0  # C = 0
