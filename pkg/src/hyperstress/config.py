"""Run configuration: a JSON key-value tree, fully validated before any run.

Polynomial fields are lists of term entries {indices, exponents,
coefficient}; domains and experiments are tagged records validated against
the module preconditions (every error is collected with its path, not just
the first).  ``materialize`` turns a validated config into live objects.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .contact import StressState, VelocityField
from .fields import PolyField
from .geometry import (
    GeometryError,
    build_box,
    build_cauchy_tetrahedron,
    build_grooved_slab,
    build_graph_patch_box,
    build_wedge,
    make_dihedral,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "serialize_config", "materialize", "default_dihedral_spec"]

DOMAIN_KINDS = ("box", "cauchy_tetrahedron", "grooved_slab", "wedge", "graph_patch_box")
EXPERIMENT_NAMES = (
    "divergence_identity",
    "power_consistency",
    "interstitial_decomposition",
    "groove_blowup",
    "wedge_limit",
    "noll_check",
    "tetrahedron_limit",
    "mollifier_limit",
)


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid configuration:\n" + "\n".join(f"  - {e}" for e in self.errors))


@dataclass(frozen=True)
class RunConfig:
    seed: int
    output: str
    tolerance_scale: float
    stress_terms: tuple  # (T terms, C terms), each a tuple of (indices, exponents, coefficient)
    velocity_terms: tuple
    domains: tuple  # normalized domain records
    experiments: tuple  # normalized experiment records

    def to_dict(self) -> dict:
        t_terms, c_terms = self.stress_terms
        return {
            "seed": self.seed,
            "output": self.output,
            "tolerance_scale": self.tolerance_scale,
            "stress_state": {"T": [_term_dict(t) for t in t_terms], "C": [_term_dict(t) for t in c_terms]},
            "velocity": [_term_dict(t) for t in self.velocity_terms],
            "domains": [dict(d) for d in self.domains],
            "experiments": [dict(e) for e in self.experiments],
        }


def _term_dict(term) -> dict:
    indices, exponents, coefficient = term
    return {"indices": list(indices), "exponents": list(exponents), "coefficient": coefficient}


def default_dihedral_spec() -> dict:
    s = 1.0 / math.sqrt(2.0)
    return {"n1": [s, 0.0, s], "n2": [-s, 0.0, s], "tau": [0.0, 1.0, 0.0]}


# ---------------------------------------------------------------------------
# validation helpers
# ---------------------------------------------------------------------------


def _as_number(value, path, errors, positive=False) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(float(value)):
        errors.append(f"{path}: expected a finite number, got {value!r}")
        return 1.0
    v = float(value)
    if positive and v <= 0:
        errors.append(f"{path}: must be positive")
    return v


def _as_vec(value, path, errors, length=3) -> list[float]:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        errors.append(f"{path}: expected a list of {length} numbers")
        return [0.0] * length
    return [_as_number(v, f"{path}[{i}]", errors) for i, v in enumerate(value)]


def _as_unit(value, path, errors) -> list[float]:
    v = _as_vec(value, path, errors)
    if abs(float(np.linalg.norm(v)) - 1.0) > 1e-12:
        errors.append(f"{path}: must be a unit vector (|v| = 1 within 1e-12)")
    return v


def _check_keys(record, path, errors, allowed, required=()):
    if not isinstance(record, dict):
        errors.append(f"{path}: expected an object")
        return False
    for key in record:
        if key not in allowed:
            errors.append(f"{path}.{key}: unknown key (allowed: {', '.join(sorted(allowed))})")
    ok = True
    for key in required:
        if key not in record:
            errors.append(f"{path}.{key}: required key missing")
            ok = False
    return ok


def _parse_terms(raw, path, errors, rank: int, nvars: int = 3) -> tuple:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        errors.append(f"{path}: expected a list of term records")
        return ()
    terms = []
    for i, entry in enumerate(raw):
        p = f"{path}[{i}]"
        if not _check_keys(entry, p, errors, {"indices", "exponents", "coefficient"}, ("indices", "exponents", "coefficient")):
            continue
        idx = entry["indices"]
        if not isinstance(idx, (list, tuple)) or len(idx) != rank or any(not isinstance(k, int) or not 0 <= k <= 2 for k in idx):
            errors.append(f"{p}.indices: expected {rank} integers in 0..2")
            continue
        exp = entry["exponents"]
        if not isinstance(exp, (list, tuple)) or len(exp) != nvars or any(not isinstance(k, int) or k < 0 for k in exp):
            errors.append(f"{p}.exponents: expected {nvars} nonnegative integers")
            continue
        coeff = _as_number(entry["coefficient"], f"{p}.coefficient", errors)
        terms.append((tuple(idx), tuple(exp), coeff))
    return tuple(terms)


def _terms_to_field(terms, rank: int, nvars: int = 3) -> PolyField:
    shape = (3,) * rank
    acc: dict = {}
    for indices, exponents, coefficient in terms:
        arr = acc.setdefault(exponents, np.zeros(shape))
        arr[indices] += coefficient
    return PolyField(acc, shape, nvars)


def _parse_dihedral(raw, path, errors):
    if raw is None:
        raw = default_dihedral_spec()
    if not _check_keys(raw, path, errors, {"n1", "n2", "tau"}, ("n1", "n2", "tau")):
        return raw
    n1 = _as_unit(raw["n1"], f"{path}.n1", errors)
    n2 = _as_unit(raw["n2"], f"{path}.n2", errors)
    tau = _as_unit(raw["tau"], f"{path}.tau", errors)
    spec = {"n1": n1, "n2": n2, "tau": tau}
    try:
        make_dihedral(n1, n2, tau)
    except (GeometryError, ValueError) as exc:
        errors.append(f"{path}: {exc}")
    return spec


_DOMAIN_SCHEMAS = {
    "box": ({"kind", "min", "max"}, ("min", "max")),
    "cauchy_tetrahedron": ({"kind", "normal", "height"}, ("normal", "height")),
    "grooved_slab": ({"kind", "teeth", "dihedral"}, ("teeth",)),
    "wedge": ({"kind", "dihedral", "half_width", "length", "epsilon"}, ("half_width", "length", "epsilon")),
    "graph_patch_box": ({"kind", "min", "max", "height_terms", "order"}, ("min", "max", "height_terms")),
}


def _parse_domain(raw, path, errors) -> dict:
    if not isinstance(raw, dict) or "kind" not in raw:
        errors.append(f"{path}: expected an object with a 'kind'")
        return {"kind": "box", "min": [0, 0, 0], "max": [1, 1, 1]}
    kind = raw["kind"]
    if kind not in DOMAIN_KINDS:
        errors.append(f"{path}.kind: unknown domain kind {kind!r} (allowed: {', '.join(DOMAIN_KINDS)})")
        return {"kind": "box", "min": [0, 0, 0], "max": [1, 1, 1]}
    allowed, required = _DOMAIN_SCHEMAS[kind]
    _check_keys(raw, path, errors, allowed, required)
    out = {"kind": kind}
    if kind == "box":
        out["min"] = _as_vec(raw.get("min"), f"{path}.min", errors)
        out["max"] = _as_vec(raw.get("max"), f"{path}.max", errors)
        if not all(b > a for a, b in zip(out["min"], out["max"])):
            errors.append(f"{path}: requires componentwise min < max")
    elif kind == "cauchy_tetrahedron":
        out["normal"] = _as_unit(raw.get("normal"), f"{path}.normal", errors)
        if not all(c > 0 for c in out["normal"]):
            errors.append(f"{path}.normal: all components must be positive")
        out["height"] = _as_number(raw.get("height"), f"{path}.height", errors, positive=True)
    elif kind == "grooved_slab":
        teeth = raw.get("teeth")
        if not isinstance(teeth, int) or teeth < 2:
            errors.append(f"{path}.teeth: expected an integer >= 2")
            teeth = 2
        out["teeth"] = teeth
        out["dihedral"] = _parse_dihedral(raw.get("dihedral"), f"{path}.dihedral", errors)
    elif kind == "wedge":
        out["dihedral"] = _parse_dihedral(raw.get("dihedral"), f"{path}.dihedral", errors)
        out["half_width"] = _as_number(raw.get("half_width"), f"{path}.half_width", errors, positive=True)
        out["length"] = _as_number(raw.get("length"), f"{path}.length", errors, positive=True)
        out["epsilon"] = _as_number(raw.get("epsilon"), f"{path}.epsilon", errors, positive=True)
    elif kind == "graph_patch_box":
        out["min"] = _as_vec(raw.get("min"), f"{path}.min", errors)
        out["max"] = _as_vec(raw.get("max"), f"{path}.max", errors)
        terms = _parse_terms(raw.get("height_terms"), f"{path}.height_terms", errors, rank=0, nvars=2)
        out["height_terms"] = [_term_dict(t) for t in terms]
        out["order"] = raw.get("order", 8)
        if not isinstance(out["order"], int) or out["order"] < 1:
            errors.append(f"{path}.order: expected a positive integer")
        else:
            height_degree = max((sum(exp) for _, exp, _c in terms), default=0)
            if out["order"] < height_degree:
                errors.append(f"{path}.order: quadrature order {out['order']} below the height degree {height_degree}")
    return out


_EXPERIMENT_SCHEMAS = {
    "divergence_identity": {"name", "domain"},
    "power_consistency": {"name", "domains"},
    "interstitial_decomposition": {"name", "domain"},
    "groove_blowup": {"name", "edge_force", "dihedral", "teeth_grid", "paired", "expect"},
    "wedge_limit": {"name", "dihedral", "half_width", "length", "eps_grid", "velocity_direction", "edge_force", "mode"},
    "noll_check": {"name", "height_terms", "point", "normal"},
    "tetrahedron_limit": {"name", "normal", "height", "eps_grid"},
    "mollifier_limit": {"name", "gamma", "force", "eps_grid"},
}


def _parse_experiment(raw, path, errors, n_domains: int) -> dict:
    if not isinstance(raw, dict) or "name" not in raw:
        errors.append(f"{path}: expected an object with a 'name'")
        return {"name": "divergence_identity", "domain": 0}
    name = raw["name"]
    if name not in EXPERIMENT_NAMES:
        errors.append(f"{path}.name: unknown experiment {name!r} (allowed: {', '.join(EXPERIMENT_NAMES)})")
        return {"name": "divergence_identity", "domain": 0}
    _check_keys(raw, path, errors, _EXPERIMENT_SCHEMAS[name])
    out = {"name": name}

    def need_domain(key="domain", default=0):
        idx = raw.get(key, default)
        if not isinstance(idx, int) or not 0 <= idx < max(n_domains, 1):
            errors.append(f"{path}.{key}: domain index out of range (have {n_domains} domains)")
            idx = 0
        if n_domains == 0:
            errors.append(f"{path}: experiment needs a domain but none are defined")
        return idx

    if name in ("divergence_identity", "interstitial_decomposition"):
        out["domain"] = need_domain()
    elif name == "power_consistency":
        idxs = raw.get("domains", list(range(n_domains)))
        if not isinstance(idxs, list) or not idxs or any(not isinstance(i, int) or not 0 <= i < max(n_domains, 1) for i in idxs):
            errors.append(f"{path}.domains: expected a nonempty list of valid domain indices")
            idxs = [0]
        if n_domains == 0:
            errors.append(f"{path}: experiment needs domains but none are defined")
        out["domains"] = list(idxs)
    elif name == "groove_blowup":
        out["edge_force"] = _as_vec(raw.get("edge_force", [1.0, 0.0, 0.0]), f"{path}.edge_force", errors)
        out["dihedral"] = _parse_dihedral(raw.get("dihedral"), f"{path}.dihedral", errors)
        out["teeth_grid"] = _grid(raw.get("teeth_grid", [4, 8, 16, 32, 64]), f"{path}.teeth_grid", errors, integer=True)
        out["paired"] = _as_bool(raw.get("paired", True), f"{path}.paired", errors)
        out["expect"] = raw.get("expect", "blowup")
        if out["expect"] not in ("blowup", "bounded"):
            errors.append(f"{path}.expect: must be 'blowup' or 'bounded'")
    elif name == "wedge_limit":
        out["dihedral"] = _parse_dihedral(raw.get("dihedral"), f"{path}.dihedral", errors)
        out["half_width"] = _as_number(raw.get("half_width", 2.0), f"{path}.half_width", errors, positive=True)
        out["length"] = _as_number(raw.get("length", 1.0), f"{path}.length", errors, positive=True)
        out["eps_grid"] = _grid(raw.get("eps_grid", [2.0**-k for k in range(1, 7)]), f"{path}.eps_grid", errors)
        out["velocity_direction"] = _as_vec(raw.get("velocity_direction", [1.0, 0.0, 0.0]), f"{path}.velocity_direction", errors)
        out["mode"] = raw.get("mode", "consistent")
        if out["mode"] not in ("consistent", "raw"):
            errors.append(f"{path}.mode: must be 'consistent' or 'raw'")
        if out["mode"] == "raw":
            out["edge_force"] = _as_vec(raw.get("edge_force", [1.0, 0.0, 0.0]), f"{path}.edge_force", errors)
    elif name == "noll_check":
        terms = raw.get("height_terms", [{"indices": [], "exponents": [2, 0], "coefficient": 0.5}, {"indices": [], "exponents": [0, 2], "coefficient": 0.5}])
        out["height_terms"] = [_term_dict(t) for t in _parse_terms(terms, f"{path}.height_terms", errors, rank=0, nvars=2)]
        for _, exp, _c in _parse_terms(terms, f"{path}.height_terms", [], rank=0, nvars=2):
            if sum(exp) < 2:
                errors.append(f"{path}.height_terms: the patch must be tangent (no constant or linear terms)")
                break
        out["point"] = _as_vec(raw.get("point", [0.0, 0.0, 0.0]), f"{path}.point", errors)
        out["normal"] = _as_unit(raw.get("normal", [0.0, 0.0, 1.0]), f"{path}.normal", errors)
    elif name == "tetrahedron_limit":
        default_n = [1.0 / math.sqrt(3.0)] * 3
        out["normal"] = _as_unit(raw.get("normal", default_n), f"{path}.normal", errors)
        if not all(c > 0 for c in out["normal"]):
            errors.append(f"{path}.normal: all components must be positive")
        out["height"] = _as_number(raw.get("height", 1.0), f"{path}.height", errors, positive=True)
        out["eps_grid"] = _grid(raw.get("eps_grid", [2.0**-k for k in range(1, 7)]), f"{path}.eps_grid", errors)
    elif name == "mollifier_limit":
        gamma = raw.get("gamma", 2)
        if gamma not in (1, 2):
            errors.append(f"{path}.gamma: must be 1 or 2")
            gamma = 2
        out["gamma"] = gamma
        out["force"] = _as_vec(raw.get("force", [1.0, 0.0, 0.0]), f"{path}.force", errors)
        out["eps_grid"] = _grid(raw.get("eps_grid", [2.0**-k for k in range(1, 7)]), f"{path}.eps_grid", errors)
        if any(e > 1.0 for e in out["eps_grid"]):
            errors.append(f"{path}.eps_grid: mollifier support must stay inside the unit box (eps <= 1)")
    return out


def _grid(raw, path, errors, integer=False):
    if not isinstance(raw, list) or len(raw) < 2:
        errors.append(f"{path}: expected a list of at least two grid values")
        return [1, 2] if integer else [0.5, 0.25]
    out = []
    for i, v in enumerate(raw):
        if integer:
            if not isinstance(v, int) or v < 2:
                errors.append(f"{path}[{i}]: expected an integer >= 2")
                v = 2
        else:
            v = _as_number(v, f"{path}[{i}]", errors, positive=True)
        out.append(v)
    return out


def _as_bool(v, path, errors) -> bool:
    if not isinstance(v, bool):
        errors.append(f"{path}: expected true or false")
        return True
    return v


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate; raises ConfigError carrying every problem found."""
    errors: list[str] = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top level: expected an object"])
    _check_keys(raw, "config", errors, {"seed", "output", "tolerance_scale", "stress_state", "velocity", "domains", "experiments"})
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        errors.append("config.seed: expected a nonnegative integer")
        seed = 0
    output = raw.get("output", "out")
    if not isinstance(output, str):
        errors.append("config.output: expected a string path")
        output = "out"
    tolerance_scale = _as_number(raw.get("tolerance_scale", 1.0), "config.tolerance_scale", errors, positive=True)
    stress_raw = raw.get("stress_state", {})
    if not isinstance(stress_raw, dict):
        errors.append("config.stress_state: expected an object with T and C")
        stress_raw = {}
    t_terms = _parse_terms(stress_raw.get("T", []), "config.stress_state.T", errors, rank=2)
    c_terms = _parse_terms(stress_raw.get("C", []), "config.stress_state.C", errors, rank=3)
    velocity_terms = _parse_terms(raw.get("velocity", []), "config.velocity", errors, rank=1)
    domains_raw = raw.get("domains", [])
    if not isinstance(domains_raw, list):
        errors.append("config.domains: expected a list")
        domains_raw = []
    domains = tuple(_parse_domain(d, f"config.domains[{i}]", errors) for i, d in enumerate(domains_raw))
    experiments_raw = raw.get("experiments", [])
    if not isinstance(experiments_raw, list):
        errors.append("config.experiments: expected a list")
        experiments_raw = []
    experiments = tuple(
        _parse_experiment(e, f"config.experiments[{i}]", errors, len(domains)) for i, e in enumerate(experiments_raw)
    )
    config = RunConfig(seed, output, tolerance_scale, (t_terms, c_terms), velocity_terms, domains, experiments)
    if not errors:
        # materialize everything so module preconditions are enforced up front
        try:
            materialize(config)
        except (GeometryError, ValueError) as exc:
            errors.append(f"config: {exc}")
    if errors:
        raise ConfigError(errors)
    return config


def serialize_config(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), indent=2, sort_keys=True)


def build_domain(record: dict):
    kind = record["kind"]
    if kind == "box":
        return build_box(record["min"], record["max"])
    if kind == "cauchy_tetrahedron":
        return build_cauchy_tetrahedron(record["normal"], record["height"])
    if kind == "grooved_slab":
        d = record["dihedral"]
        return build_grooved_slab(record["teeth"], make_dihedral(d["n1"], d["n2"], d["tau"]))
    if kind == "wedge":
        d = record["dihedral"]
        return build_wedge(make_dihedral(d["n1"], d["n2"], d["tau"]), record["half_width"], record["length"], record["epsilon"])
    if kind == "graph_patch_box":
        terms = tuple((tuple(t["indices"]), tuple(t["exponents"]), t["coefficient"]) for t in record["height_terms"])
        height = _terms_to_field(terms, rank=0, nvars=2)
        return build_graph_patch_box(record["min"], record["max"], height, order=record.get("order", 8))
    raise ConfigError([f"unknown domain kind {kind!r}"])


def materialize(config: RunConfig):
    """Build the live objects a run needs: state, velocity and all domains."""
    t_terms, c_terms = config.stress_terms
    state = StressState(_terms_to_field(t_terms, rank=2), _terms_to_field(c_terms, rank=3))
    velocity = VelocityField(_terms_to_field(config.velocity_terms, rank=1))
    domains = [build_domain(rec) for rec in config.domains]
    return state, velocity, domains
