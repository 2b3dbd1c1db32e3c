import json
import subprocess
import sys
from pathlib import Path

import pytest

from linchaos.cli import main
from linchaos.operators import orbit
from linchaos.orbitstats import verify_certificate
from linchaos.seqspace import SparseVector

from linchaos.cli.config import parse_operator

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

EXPECTED_EXIT = {
    "analyze_backward_shift_geometric": 0,
    "analyze_backward_shift_unweighted": 0,
    "analyze_contraction_matrix": 0,
    "analyze_doubling_shift": 0,
    "analyze_oscillating_forward_shift": 0,
    "certify_di_design": 0,
    "certify_doubling_basis": 3,
    "construct_bounded_oscillation": 0,
    "construct_dcc_fast_growth": 0,
    "construct_dcc_powers_of_four": 3,
    "construct_di_design": 0,
    "construct_existence": 3,
    "construct_manifold": 0,
    "construct_wbs_seed": 0,
}


def _write(tmp_path: Path, cfg: dict, name: str = "cfg.json") -> Path:
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def _tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_every_shipped_config_is_listed():
    assert sorted(p.stem for p in CONFIGS.glob("*.json")) == sorted(EXPECTED_EXIT)


@pytest.mark.parametrize("name", sorted(EXPECTED_EXIT))
def test_shipped_config_exit_code(name, tmp_path):
    assert main(["--config", str(CONFIGS / f"{name}.json"), "--out", str(tmp_path)]) == EXPECTED_EXIT[name]
    assert not list(tmp_path.rglob("*.tmp"))


def test_analyze_report_contents(tmp_path):
    assert main(["--config", str(CONFIGS / "analyze_doubling_shift.json"), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["supremum"]["verdict"] == "infinite"
    assert rep["li_yorke"]["accepted"] and rep["spectral_consistency"]["ok"]
    assert rep["spectral_radius"]["exact"] and rep["spectral_radius"]["upper"]["value"] == "2"
    for cert in (tmp_path / "certificates").glob("*.json"):
        assert verify_certificate(json.loads(cert.read_text())).ok


def test_orbit_csv_matches_orbit(tmp_path):
    assert main(["--config", str(CONFIGS / "analyze_doubling_shift.json"), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "orbits" / "seed2.csv").read_text().splitlines()
    assert rows[0] == "n,log_norm,norm"
    T = parse_operator({"kind": "WeightedBackwardShift", "w": {"constant": 2}})
    rec = orbit(T, SparseVector.basis(2), 4096)
    for line in rows[1:6]:
        n, lv, lin = line.split(",")
        assert float(lv) == rec.lognorm_at(int(n))
    assert rows[4] == "3,-inf,0" and rows[3].endswith(",4")  # T^3 e_2 = 0, ||T^2 e_2|| = 4


@pytest.mark.parametrize("workers", [1, 3])
def test_byte_identical_outputs(tmp_path, workers):
    cfg = CONFIGS / "analyze_backward_shift_geometric.json"
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["--config", str(cfg), "--out", str(a)]) == 0
    assert main(["--config", str(cfg), "--out", str(b), "--workers", str(workers)]) == 0
    assert _tree(a) == _tree(b)


def test_environment_and_flag_overrides(tmp_path, monkeypatch):
    # matrix orbits are iterated, so the budget is charged per step
    cfg = _write(tmp_path, {"task": "analyze", "operator": {"kind": "FiniteMatrix", "matrix": [[0.5]]}})
    monkeypatch.setenv("LINCHAOS_HORIZON", "123")
    assert main(["--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert json.loads((tmp_path / "o" / "report.json").read_text())["horizon"] == "123"
    monkeypatch.setenv("LINCHAOS_BUDGET", "3")
    assert main(["--config", str(cfg), "--out", str(tmp_path / "p")]) == 4
    assert main(["--config", str(cfg), "--out", str(tmp_path / "p"), "--budget", "100000"]) == 0


@pytest.mark.parametrize(
    "cfg",
    [
        {"task": "analyze"},
        {"task": "nope"},
        {"task": "analyze", "operator": {"kind": "WeightedBackwardShift", "w": {"constant": 2}}, "bogus": 1},
        {"task": "analyze", "operator": {"kind": "Nope"}},
        {"task": "analyze", "operator": {"kind": "WeightedBackwardShift", "w": {"constant": 2, "geometric": 1}}},
        {"task": "certify", "operator": {"kind": "WeightedBackwardShift", "w": {"constant": 2}}, "detector": "irregular_test"},
        {"task": "construct", "construct": {"name": "dirregular_from_dcc", "params": {"bogus": 1}}},
        {"task": "analyze", "operator": {"kind": "BackwardShift"}, "thresholds": {"eps": 2}},
    ],
)
def test_schema_errors_exit_2(tmp_path, cfg, capsys):
    assert main(["--config", str(_write(tmp_path, cfg)), "--out", str(tmp_path / "o")]) == 2
    assert "schema error" in capsys.readouterr().err


def test_unreadable_config_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["--config", str(p)]) == 2
    assert main(["--config", str(tmp_path / "missing.json")]) == 2


def test_precondition_violation_exit_3(tmp_path, capsys):
    assert main(["--config", str(CONFIGS / "construct_dcc_powers_of_four.json"), "--out", str(tmp_path)]) == 3
    err = capsys.readouterr().err
    assert "decay fails at m=2" in err and "0.4375" in err


def test_verify_certificate_round_trip(tmp_path, capsys):
    out = tmp_path / "cert"
    assert main(["--config", str(CONFIGS / "certify_di_design.json"), "--out", str(out)]) == 0
    cert = json.loads((out / "certificate.json").read_text())
    (tmp_path / "good.json").write_text(json.dumps(cert))
    v = _write(tmp_path, {"task": "verify-certificate", "certificate": "good.json"}, "v.json")
    assert main(["--config", str(v), "--out", str(tmp_path / "v")]) == 0
    for key, tampered in (("params", {**cert["params"], "density_floor": "0.99"}), ("witnesses", {"x": [["1", 1, "0"]]})):
        (tmp_path / "bad.json").write_text(json.dumps({**cert, key: tampered}))
        v = _write(tmp_path, {"task": "verify-certificate", "certificate": "bad.json"}, "w.json")
        capsys.readouterr()
        assert main(["--config", str(v), "--out", str(tmp_path / "w")]) == 3
        assert "mismatch" in capsys.readouterr().err
    v = _write(tmp_path, {"task": "verify-certificate", "certificate": "absent.json"}, "x.json")
    assert main(["--config", str(v), "--out", str(tmp_path / "x")]) == 2


def test_rejection_diagnostics_on_stderr(tmp_path, capsys):
    assert main(["--config", str(CONFIGS / "certify_doubling_basis.json"), "--out", str(tmp_path)]) == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[0])
    assert err["verdict"] == "rejected" and err["reason"]
    assert not (tmp_path / "certificate.json").exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "linchaos.cli", "--config", str(CONFIGS / "construct_di_design.json"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert r.returncode == 0 and "design_di_forward_weights: ok" in r.stdout
