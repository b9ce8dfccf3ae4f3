import hashlib
import json
import os

import pytest

from hyperstress.cli import main
from hyperstress.config import ConfigError, materialize, parse_config, serialize_config


def base_config(**overrides):
    cfg = {
        "seed": 7,
        "output": "out",
        "stress_state": {
            "T": [{"indices": [0, 0], "exponents": [0, 0, 0], "coefficient": 1.0}],
            "C": [{"indices": [0, 1, 2], "exponents": [1, 0, 0], "coefficient": 0.5}],
        },
        "velocity": [{"indices": [0], "exponents": [0, 0, 1], "coefficient": 1.0}],
        "domains": [{"kind": "box", "min": [0.0, 0.0, 0.0], "max": [1.0, 1.0, 1.0]}],
        "experiments": [{"name": "divergence_identity", "domain": 0}],
    }
    cfg.update(overrides)
    return cfg


def test_empty_experiment_list_is_valid():
    cfg = base_config(experiments=[])
    parsed = parse_config(json.dumps(cfg))
    assert parsed.experiments == ()
    state, velocity, domains = materialize(parsed)
    assert len(domains) == 1


def test_degenerate_wedge_dihedral_rejected():
    cfg = base_config(
        domains=[
            {
                "kind": "wedge",
                "dihedral": {"n1": [0, 0, 1], "n2": [0, 0, 1], "tau": [0, 1, 0]},
                "half_width": 2.0,
                "length": 1.0,
                "epsilon": 0.5,
            }
        ],
        experiments=[],
    )
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(cfg))
    assert any("flat or folded" in e for e in err.value.errors)
    assert any("domains[0].dihedral" in e for e in err.value.errors)


def test_all_errors_collected():
    cfg = base_config(
        seed=-1,
        domains=[{"kind": "box", "min": [0, 0, 0], "max": [1, 1]}, {"kind": "nope"}],
        experiments=[{"name": "unknown_experiment"}],
    )
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(cfg))
    msgs = err.value.errors
    assert len(msgs) >= 3
    assert any("seed" in m for m in msgs)
    assert any("domains[0].max" in m for m in msgs)
    assert any("domains[1].kind" in m for m in msgs)
    assert any("experiments[0].name" in m for m in msgs)


def test_unknown_key_rejected():
    cfg = base_config()
    cfg["domains"][0]["wat"] = 1
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(cfg))
    assert any("unknown key" in e for e in err.value.errors)


def test_non_unit_normal_rejected():
    cfg = base_config(domains=[{"kind": "cauchy_tetrahedron", "normal": [1.0, 1.0, 1.0], "height": 1.0}], experiments=[])
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(cfg))
    assert any("unit vector" in e for e in err.value.errors)


def test_round_trip():
    text = json.dumps(base_config())
    parsed = parse_config(text)
    again = parse_config(serialize_config(parsed))
    assert parsed == again


def test_not_json():
    with pytest.raises(ConfigError):
        parse_config("this is not json")


# ---------------------------------------------------------------------------
# CLI
# ---------------------------------------------------------------------------


def write_config(tmp_path, cfg):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_cli_run_identities_exit_zero(tmp_path, capsys):
    cfg = base_config(
        experiments=[
            {"name": "divergence_identity", "domain": 0},
            {"name": "power_consistency", "domains": [0]},
            {"name": "interstitial_decomposition", "domain": 0},
            {"name": "wedge_limit", "mode": "consistent"},
            {"name": "tetrahedron_limit"},
            {"name": "mollifier_limit", "gamma": 2},
        ]
    )
    path = write_config(tmp_path, cfg)
    code = main(["run", path, "--out", str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert (tmp_path / "out" / "summary.csv").exists()


def test_cli_run_bounded_expectation_fails(tmp_path):
    cfg = base_config(
        experiments=[
            {
                "name": "groove_blowup",
                "edge_force": [1.0, 0.0, 0.0],
                "teeth_grid": [4, 8, 16],
                "expect": "bounded",
            }
        ]
    )
    path = write_config(tmp_path, cfg)
    code = main(["run", path, "--out", str(tmp_path / "out")])
    assert code == 1  # the blow-up violates the bounded expectation


def test_cli_run_malformed_config(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{ not json")
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 2
    assert main(["run", str(tmp_path / "missing.json")]) == 2


def test_cli_probe(tmp_path, capsys):
    path = write_config(tmp_path, base_config(experiments=[]))
    assert main(["probe", path, "--point", "0.1", "0.2", "0.3"]) == 0
    out = capsys.readouterr().out
    assert "edge force on coordinate shape" in out


def test_cli_report_determinism(tmp_path):
    cfg = base_config(
        experiments=[
            {"name": "divergence_identity", "domain": 0},
            {"name": "groove_blowup", "teeth_grid": [4, 8, 16]},
        ]
    )
    path = write_config(tmp_path, cfg)

    def run_and_hash(subdir):
        out = tmp_path / subdir
        assert main(["run", path, "--out", str(out)]) == 0
        hashes = {}
        for name in sorted(os.listdir(out)):
            with open(out / name, "rb") as fh:
                hashes[name] = hashlib.sha256(fh.read()).hexdigest()
        return hashes

    assert run_and_hash("a") == run_and_hash("b")


def test_emit_reports_empty_is_header_only(tmp_path):
    from hyperstress.report import emit_reports

    emit_reports([], str(tmp_path), seed=0)
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0].startswith("# seed=0")
    assert lines[1].startswith("experiment,")
    assert len(lines) == 2


def test_patch_box_order_below_degree_rejected():
    cfg = base_config(
        domains=[
            {
                "kind": "graph_patch_box",
                "min": [0, 0, 0],
                "max": [1, 1, 1],
                "height_terms": [{"indices": [], "exponents": [2, 2], "coefficient": 1.0}],
                "order": 2,
            }
        ],
        experiments=[],
    )
    with pytest.raises(ConfigError) as err:
        parse_config(json.dumps(cfg))
    assert any("quadrature order" in e for e in err.value.errors)
