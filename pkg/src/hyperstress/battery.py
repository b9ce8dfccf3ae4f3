"""The built-in verification battery.

Seeded end-to-end suites covering every identity, representation theorem
and limit construction the package implements.  The CLI ``verify``
subcommand runs exactly this battery; the acceptance tests call the same
functions, so the two cannot drift apart.
"""

from __future__ import annotations

import numpy as np

from .contact import (
    StressState,
    VelocityField,
    edge_force,
    normal_traction,
)
from .experiments import (
    DEFAULT_TEETH_GRID,
    RateReport,
    run_divergence_identity,
    run_groove_blowup,
    run_interstitial_decomposition,
    run_mollifier_limit,
    run_noll_check,
    run_power_consistency,
    run_tetrahedron_limit,
    run_wedge_limit,
)
from .fields import PolyField, random_field
from .geometry import (
    build_box,
    build_cauchy_tetrahedron,
    homothety,
    make_dihedral,
    random_convex_polyhedron,
)
from .reconstruction import build_left_symmetric, build_right_symmetric, probe, traction_from_probes
from .tensor import contract3_vv, unit

__all__ = ["run_battery", "BATTERY", "rng_for", "random_state", "random_velocity", "random_unit", "random_dihedral"]

# stable per-suite seed tags so subsets reproduce the full run
_SEED_TAGS = {
    "divergence_identity": 11,
    "power_consistency": 12,
    "traction_interpolation": 13,
    "tetrahedron_limit": 14,
    "edge_representation": 15,
    "groove_blowup": 16,
    "wedge_limit": 17,
    "noll_reconstruction": 18,
    "mollifier": 19,
    "interstitial": 20,
}


def rng_for(seed: int, tag: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), _SEED_TAGS[tag]])


def random_state(rng: np.random.Generator, degree: int = 2) -> StressState:
    return StressState(random_field(rng, (3, 3), degree), random_field(rng, (3, 3, 3), degree))


def random_velocity(rng: np.random.Generator, degree: int = 2) -> VelocityField:
    return VelocityField(random_field(rng, (3,), degree))


def random_unit(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.normal(size=3)
        if np.linalg.norm(v) > 1e-6:
            return unit(v)


def random_dihedral(rng: np.random.Generator):
    """Random valid dihedral shape with a well-separated angle."""
    while True:
        tau = random_unit(rng)
        a = random_unit(rng)
        n1 = unit(np.cross(tau, a)) if np.linalg.norm(np.cross(tau, a)) > 1e-6 else None
        if n1 is None:
            continue
        b = random_unit(rng)
        if np.linalg.norm(np.cross(tau, b)) < 1e-6:
            continue
        n2 = unit(np.cross(tau, b))
        if np.linalg.norm(np.cross(n1, n2)) < 1e-2:
            continue
        return make_dihedral(n1, n2, tau)


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------


def divergence_identity_suite(seed: int, tol: float = 1e-12) -> list[RateReport]:
    rng = rng_for(seed, "divergence_identity")
    cube = build_box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
    rows, labels = [], []
    notes_worst = 0.0
    for i in range(20):
        state = random_state(rng)
        vel = random_velocity(rng)
        rep = run_divergence_identity(state, vel, cube, tol=tol)
        rows.append(rep.measured[0])
        labels.append(f"cube_{i}")
    for i in range(5):
        dom = random_convex_polyhedron(rng, n_points=10, label=f"hull_{i}")
        state = random_state(rng)
        vel = random_velocity(rng)
        rep = run_divergence_identity(state, vel, dom, tol=tol)
        rows.append(rep.measured[0])
        labels.append(dom.label)
    notes_worst = max(rows)
    report = RateReport(
        name="divergence_identity",
        param_name="sample",
        params=labels,
        measured=rows,
        threshold=tol,
        passed=notes_worst <= tol,
        notes={"max_residual": notes_worst},
    )
    return [report]


def power_consistency_suite(seed: int, tol: float = 1e-12) -> list[RateReport]:
    rng = rng_for(seed, "power_consistency")
    domains = []
    for i in range(20):
        kind = i % 4
        if kind == 0:
            lo = rng.uniform(-1.0, 0.0, size=3)
            hi = lo + rng.uniform(0.5, 1.5, size=3)
            domains.append(build_box(lo, hi, label=f"box_{i}"))
        elif kind == 1:
            domains.append(random_convex_polyhedron(rng, n_points=9, label=f"hull_{i}"))
        elif kind == 2:
            n = unit(rng.uniform(0.2, 1.0, size=3))
            domains.append(build_cauchy_tetrahedron(n, float(rng.uniform(0.5, 1.5)), label=f"tetra_{i}"))
        else:
            cube = build_box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), label=f"cube_{i}")
            domains.append(homothety(cube, float(2.0 ** -(i % 7)), center=(0.0, 0.0, 0.0)))
    reports = []
    residuals, labels = [], []
    bound_ok = True
    for dom in domains:
        state = random_state(rng)
        vel = random_velocity(rng)
        rep = run_power_consistency(state, vel, [dom], tol=tol)
        residuals.append(rep.measured[0])
        labels.append(dom.label)
        bound_ok = bound_ok and rep.notes["bound_satisfied"]
    reports.append(
        RateReport(
            name="power_consistency",
            param_name="domain",
            params=labels,
            measured=residuals,
            threshold=tol,
            passed=max(residuals) <= tol and bound_ok,
            notes={"max_residual": max(residuals), "bound_satisfied": bound_ok},
        )
    )
    return reports


def traction_interpolation_suite(seed: int, tol: float = 1e-13) -> list[RateReport]:
    rng = rng_for(seed, "traction_interpolation")
    rows = []
    for _ in range(100):
        state = random_state(rng, degree=1)
        x0 = rng.uniform(-1.0, 1.0, size=3)
        n = random_unit(rng)
        p = probe(state, x0)
        rows.append(float(np.linalg.norm(traction_from_probes(p, n) - normal_traction(state, x0, n))))
    report = RateReport(
        name="traction_interpolation",
        param_name="sample",
        params=list(range(100)),
        measured=rows,
        threshold=tol,
        passed=max(rows) <= tol,
        notes={"max_residual": max(rows)},
    )
    return [report]


def tetrahedron_limit_suite(seed: int) -> list[RateReport]:
    rng = rng_for(seed, "tetrahedron_limit")
    n = unit(rng.uniform(0.3, 1.0, size=3))
    u0 = rng.uniform(-1.0, 1.0, size=3)
    lin = StressState(random_field(rng, (3, 3), 1), random_field(rng, (3, 3, 3), 1))
    rep_lin = run_tetrahedron_limit(lin, n, 1.0, u0=u0)
    rep_lin.name = "tetrahedron_limit_linear"
    const = StressState(random_field(rng, (3, 3), 0), random_field(rng, (3, 3, 3), 0))
    rep_const = run_tetrahedron_limit(const, n, 1.0, u0=u0)
    rep_const.name = "tetrahedron_limit_constant"
    rep_const.passed = rep_const.passed and rep_const.exact_zero()
    return [rep_lin, rep_const]


def edge_representation_suite(seed: int) -> list[RateReport]:
    rng = rng_for(seed, "edge_representation")
    gauge_worst = swap_worst = sym_worst = 0.0
    for _ in range(100):
        state = random_state(rng, degree=1)
        x0 = rng.uniform(-1.0, 1.0, size=3)
        d = random_dihedral(rng)
        # right-antisymmetric gauge term leaves G and the edge force unchanged
        A = rng.uniform(-1.0, 1.0, size=(3, 3, 3))
        A = 0.5 * (A - A.swapaxes(1, 2))
        gauged = StressState(state.stress, state.hyperstress + PolyField.constant(A))
        gauge_worst = max(
            gauge_worst,
            float(np.linalg.norm(edge_force(gauged, x0, d) - edge_force(state, x0, d))),
            float(np.linalg.norm(normal_traction(gauged, x0, d.n1) - normal_traction(state, x0, d.n1))),
        )
        swapped = make_dihedral(d.n2, d.n1, -d.tau)
        swap_worst = max(swap_worst, float(np.linalg.norm(edge_force(state, x0, swapped) - edge_force(state, x0, d))))
        M = np.outer(d.n1, d.nu1) + np.outer(d.n2, d.nu2)
        sym_worst = max(sym_worst, float(np.max(np.abs(M - M.T))))
    checks = [("gauge_invariance", gauge_worst, 1e-13), ("swap_invariance", swap_worst, 0.0), ("n_nu_symmetry", sym_worst, 1e-12)]
    return [
        RateReport(
            name="edge_representation",
            param_name="check",
            params=[c[0] for c in checks],
            measured=[c[1] for c in checks],
            reference=[c[2] for c in checks],
            passed=all(r <= t for _, r, t in checks),
            notes={k: v for k, v, _ in checks},
        )
    ]


def groove_suite(seed: int, teeth_grid=DEFAULT_TEETH_GRID) -> list[RateReport]:
    rng = rng_for(seed, "groove_blowup")
    d = random_dihedral(rng)
    f0 = np.array([1.0, 0.0, 0.0])
    paired = run_groove_blowup(f0, d, teeth_grid=teeth_grid, paired=True)
    unpaired = run_groove_blowup(f0, d, teeth_grid=teeth_grid, paired=False)
    zero = run_groove_blowup(np.zeros(3), d, teeth_grid=teeth_grid, paired=True, u0=f0)
    zero.name = "groove_zero_ansatz"
    return [paired, unpaired, zero]


def wedge_suite(seed: int) -> list[RateReport]:
    rng = rng_for(seed, "wedge_limit")
    d = random_dihedral(rng)
    state = random_state(rng, degree=2)
    f0 = rng.uniform(-1.0, 1.0, size=3)
    while float(np.linalg.norm(f0)) < 0.3:
        f0 = rng.uniform(-1.0, 1.0, size=3)
    _, _, _, s1, c = _wedge_frame(d)
    half_width = 1.5 * c / abs(s1)
    consistent = run_wedge_limit(d, half_width, 1.0, u0=f0, state=state)
    raw = run_wedge_limit(d, half_width, 1.0, u0=f0, edge_density=f0)
    return [consistent, raw]


def _wedge_frame(d):
    from .geometry import _dihedral_frame

    return _dihedral_frame(d)


def noll_reconstruction_suite(seed: int) -> list[RateReport]:
    rng = rng_for(seed, "noll_reconstruction")
    state = random_state(rng, degree=2)
    x0 = rng.uniform(-0.5, 0.5, size=3)
    n0 = random_unit(rng)
    height = PolyField({(2, 0): 0.5, (0, 2): 0.5, (1, 1): float(rng.uniform(-0.3, 0.3))}, (), 2)
    noll = run_noll_check(state, height, x0, n0)

    parity_worst = 0.0
    for _ in range(50):
        n = random_unit(rng)
        x = rng.uniform(-1.0, 1.0, size=3)
        parity_worst = max(parity_worst, float(np.linalg.norm(normal_traction(state, x, n) - normal_traction(state, x, -n))))

    C0 = rng.uniform(-1.0, 1.0, size=(3, 3, 3))
    C0 = 0.5 * (C0 + C0.swapaxes(1, 2))
    probes = probe(StressState.constant(np.zeros((3, 3)), C0), np.zeros(3))
    roundtrip = float(np.max(np.abs(build_right_symmetric(probes) - C0)))

    right = build_right_symmetric(probes)
    left = build_left_symmetric(probes)
    left_sym_err = float(np.max(np.abs(left - left.swapaxes(0, 1))))
    gauge_worst = 0.0
    for _ in range(50):
        dd = random_dihedral(rng)
        fr = contract3_vv(right, dd.n1, dd.nu1) + contract3_vv(right, dd.n2, dd.nu2)
        fl = contract3_vv(left, dd.n1, dd.nu1) + contract3_vv(left, dd.n2, dd.nu2)
        gauge_worst = max(gauge_worst, float(np.linalg.norm(fr - fl)))
        n = random_unit(rng)
        gauge_worst = max(gauge_worst, float(np.linalg.norm(contract3_vv(right, n, n) - contract3_vv(left, n, n))))
    checks = [
        ("traction_parity", parity_worst, 0.0),
        ("roundtrip_right_symmetric", roundtrip, 1e-13),
        ("left_is_left_symmetric", left_sym_err, 0.0),
        ("left_right_gauge_equivalence", gauge_worst, 1e-13),
    ]
    recon = RateReport(
        name="reconstruction",
        param_name="check",
        params=[c[0] for c in checks],
        measured=[c[1] for c in checks],
        reference=[c[2] for c in checks],
        passed=all(r <= t for _, r, t in checks),
        notes={k: v for k, v, _ in checks},
    )
    return [noll, recon]


def mollifier_suite(seed: int) -> list[RateReport]:
    rng = rng_for(seed, "mollifier")
    f0 = rng.uniform(-1.0, 1.0, size=3)
    vel = random_velocity(rng, degree=2)
    # dyadic grid past the preasymptotic knee of the gamma=1 remainder
    grid = tuple(2.0**-k for k in range(3, 9))
    g2 = run_mollifier_limit(2, f0, vel, eps_grid=grid)
    g1 = run_mollifier_limit(1, f0, vel, eps_grid=grid)
    const = run_mollifier_limit(2, f0, VelocityField.constant(rng.uniform(-1.0, 1.0, size=3)), eps_grid=grid)
    const.name = "mollifier_gamma2_constant_u"
    const.passed = const.passed and const.exact_zero()
    return [g2, g1, const]


def interstitial_suite(seed: int, tol: float = 1e-12) -> list[RateReport]:
    rng = rng_for(seed, "interstitial")
    rows, labels = [], []
    for i in range(10):
        state = random_state(rng)
        vel = random_velocity(rng)
        if i % 2 == 0:
            dom = build_box(rng.uniform(-1.0, 0.0, size=3), rng.uniform(0.5, 1.5, size=3), label=f"box_{i}")
        else:
            dom = random_convex_polyhedron(rng, n_points=9, label=f"hull_{i}")
        rep = run_interstitial_decomposition(state, vel, dom, tol=tol)
        rows.append(rep.measured[0])
        labels.append(dom.label)
    return [
        RateReport(
            name="interstitial_decomposition",
            param_name="domain",
            params=labels,
            measured=rows,
            threshold=tol,
            passed=max(rows) <= tol,
            notes={"max_residual": max(rows)},
        )
    ]


BATTERY = {
    "divergence_identity": divergence_identity_suite,
    "power_consistency": power_consistency_suite,
    "traction_interpolation": traction_interpolation_suite,
    "tetrahedron_limit": tetrahedron_limit_suite,
    "edge_representation": edge_representation_suite,
    "groove_blowup": groove_suite,
    "wedge_limit": wedge_suite,
    "noll_reconstruction": noll_reconstruction_suite,
    "mollifier": mollifier_suite,
    "interstitial": interstitial_suite,
}


def run_battery(seed: int = 0, suites: list[str] | None = None) -> list[RateReport]:
    """Run the named suites (all by default) and return their reports in order."""
    names = list(BATTERY) if suites is None else suites
    reports: list[RateReport] = []
    for name in names:
        if name not in BATTERY:
            raise KeyError(f"unknown suite {name!r}")
        reports.extend(BATTERY[name](seed))
    return reports
