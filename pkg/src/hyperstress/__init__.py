"""Contact-force calculus for second-gradient continua, verification-grade.

Exact polynomial test fields, exact polyhedral quadrature, derived contact
densities (surface force, edge force, normal double traction), hyperstress
reconstruction from coordinate probes, and numerical replicas of the
quasi-balance limit constructions.
"""

from .contact import (
    PowerBreakdown,
    RawContactAnsatz,
    StressState,
    VelocityField,
    bulk_power,
    contact_power,
    edge_force,
    interstitial_flux,
    normal_traction,
    normal_tangential_split,
    raw_power,
    reduced_edge_force,
    reduced_surface_force,
    surface_divergence,
    surface_force,
)
from .fields import PolyField, div, dot, field_einsum, grad, random_field
from .geometry import (
    AdmissibleDomain,
    DihedralShape,
    GeometryError,
    GraphPatchFace,
    PlanarFace,
    StraightEdge,
    build_box,
    build_cauchy_tetrahedron,
    build_graph_patch_box,
    build_grooved_slab,
    build_wedge,
    convex_hull_domain,
    dihedral_angle,
    homothety,
    integrate_edge,
    integrate_face,
    integrate_volume,
    make_dihedral,
    random_convex_polyhedron,
    shapes_match,
    ShapeFamily,
    grooved_slab_family,
    homothety_family,
    wedge_family,
)
from .reconstruction import (
    CoordinateProbes,
    build_left_symmetric,
    build_right_symmetric,
    probe,
    traction_from_probes,
)
from .tensor import contract3_t2, contract3_vv, projector, right_symmetrize
from .experiments import (
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
from .battery import run_battery

__version__ = "0.1.0"
