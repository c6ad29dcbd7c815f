import csv
import io
import json

import pytest
import yaml

from qlattice import ConfigError
from qlattice.cli import main
from qlattice.config import DEFAULT_CONFIG, load_config, parse_config, resolve
from qlattice.verifier import run_suite


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, raw, name="suite.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(raw))
    return path


SMALL = {
    "seed": 11,
    "n_max": 3,
    "q": [0.5],
    "checks": ["pearson", "sode", "sode_lambda"],
    "families": [{"name": "al_salam_carlitz_1", "params": {"a": 0.3}}],
}


# -- config --------------------------------------------------------------------


def test_default_config_loads():
    cfg = load_config(DEFAULT_CONFIG)
    assert cfg.n_max == 8 and cfg.q == [0.3, 0.5, 0.7]
    assert len(resolve(cfg)) == 3 * len(cfg.families)


@pytest.mark.parametrize(
    "raw",
    [
        {"n_max": 3},
        {"seed": -1},
        {"seed": 1, "n_max": 13},
        {"seed": 1, "families": [{"name": "hahn"}]},
        {"seed": 1, "surprise": True},
        {"seed": 1, "checks": ["pearson", "nope"]},
        {"seed": 1, "grid": {"count": 5}},
        {"seed": 1, "families": [{"name": "q_meixner", "params": {"b": "x"}}]},
    ],
)
def test_config_rejected(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_config_complex_params_and_overrides():
    cfg = parse_config(
        {"seed": 1, "families": [{"name": "al_salam_carlitz_1", "params": {"a": "0.3+0.1j"}}]},
        {"tol": 1e-6, "n_max": 4, "seed": None},
    )
    assert cfg.families[0].params["a"] == 0.3 + 0.1j
    assert cfg.tolerances.algebraic == 1e-6 and cfg.n_max == 4 and cfg.seed == 1


def test_env_tolerance(monkeypatch):
    monkeypatch.setenv("QLATTICE_TOL", "3e-7")
    assert parse_config({"seed": 1}).tolerances.algebraic == 3e-7
    assert parse_config({"seed": 1}, {"tol": 1e-5}).tolerances.algebraic == 1e-5


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("seed: [1, 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    bad.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_empty_suite():
    assert run_suite({"seed": 0}) == []


# -- eval ------------------------------------------------------------------------


def test_eval_degree_zero(capsys):
    code, out, _ = run(capsys, "eval", "--family", "q_meixner", "--n", "0", "--grid", "0.5:4")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4 and all(float(r["p"]) == 1.0 for r in rows)


def test_eval_first_degree_asc(capsys):
    code, out, _ = run(capsys, "eval", "--family", "al_salam_carlitz_1", "--params", "a=0.25",
                       "--n", "1", "--x", "0.5,1.5,3")
    assert code == 0
    for row in csv.DictReader(io.StringIO(out)):
        assert float(row["p"]) == pytest.approx(float(row["x"]) - 1.25, abs=1e-12)


def test_eval_csv_json_roundtrip(capsys):
    args = ["eval", "--family", "askey_wilson", "--n", "3", "--s", "0.7,1.7,2.7"]
    _, text_csv, _ = run(capsys, *args)
    _, text_json, _ = run(capsys, *args, "--format", "json")
    rows = list(csv.DictReader(io.StringIO(text_csv)))
    data = json.loads(text_json)
    for r, d in zip(rows, data):
        assert complex(r["p"]) == complex(d["p"]["re"], d["p"]["im"])
        assert d["error"] is None


def test_eval_out_file(tmp_path, capsys):
    target = tmp_path / "p.json"
    code, out, _ = run(capsys, "eval", "--family", "q_racah", "--n", "2", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    assert len(json.loads(target.read_text())) == 20


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--family", "nope", "--n", "1"],
        ["eval", "--family", "q_meixner", "--n", "1", "--params", "b=0.6"],
        ["eval", "--family", "q_meixner", "--n", "1", "--params", "b=0.6,c"],
        ["eval", "--family", "q_meixner", "--n", "1", "--s", "1", "--x", "2"],
        ["eval", "--family", "q_meixner", "--n", "1", "--q", "1.5"],
        ["eval", "--family", "q_meixner", "--n", "1", "--grid", "abc"],
        ["frobnicate"],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err


# -- coeffs ----------------------------------------------------------------------


def test_coeffs_ttrr_monic(capsys):
    code, out, _ = run(capsys, "coeffs", "--family", "al_salam_carlitz_1", "--kind", "ttrr", "--n", "0..6")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["n"]) for r in rows] == list(range(7))
    for r in rows:
        assert float(r["alpha"]) == pytest.approx(1, rel=1e-10)
    assert rows[0]["gamma"] == ""


def test_coeffs_structure(capsys):
    code, out, _ = run(capsys, "coeffs", "--family", "q_meixner", "--kind", "structure", "--n", "0..3",
                       "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data[0]["f"] is None and data[0]["g"] is None
    for row in data[1:]:
        assert row["closed_e"] is not None
        assert row["match"] in (True, False)
        assert row["residual"] < 1e-7


def test_coeffs_single_degenerate_row(capsys):
    code, out, _ = run(capsys, "coeffs", "--family", "askey_wilson", "--n", "0..0")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1 and rows[0]["gamma"] == ""


# -- verify ----------------------------------------------------------------------


def test_verify_pass_and_determinism(tmp_path, capsys):
    path = write_config(tmp_path, SMALL)
    outs = []
    for k in range(2):
        target = tmp_path / f"r{k}.json"
        code, _, err = run(capsys, "verify", str(path), "--out", str(target))
        assert code == 0, err
        outs.append(target.read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert all(d["passed"] for d in data)
    assert all(set(d) >= {"check_id", "family", "params", "max_residual", "tolerance", "notes"} for d in data)


def test_verify_perturbed_fails(tmp_path, capsys):
    raw = dict(SMALL, families=[dict(SMALL["families"][0], perturb={"target": "sigma", "eps": 1e-3})])
    code, out, err = run(capsys, "verify", str(write_config(tmp_path, raw)), "--format", "csv")
    assert code == 1
    assert "FAIL pearson al_salam_carlitz_1" in err
    assert "sigma:0.001" in out


def test_verify_overrides(tmp_path, capsys):
    path = write_config(tmp_path, SMALL)
    code, out, _ = run(capsys, "verify", str(path), "--n-max", "1", "--grid=-16.5:15", "--tol", "1e-9")
    assert code == 0
    data = json.loads(out)
    assert max(d["n"] for d in data if d["n"] is not None) == 1
    assert {d["tolerance"] for d in data if d["check_id"] == "pearson"} == {1e-9}


def test_verify_config_errors(tmp_path, capsys):
    assert run(capsys, "verify", str(tmp_path / "missing.yaml"))[0] == 2
    assert run(capsys, "verify", str(write_config(tmp_path, {"n_max": 2})))[0] == 2
    assert run(capsys, "verify", str(write_config(tmp_path, SMALL)), "--grid", "7")[0] == 2


def test_output_is_finite(tmp_path, capsys):
    raw = dict(SMALL, families=[{"name": "q_racah", "params": {"alpha": 0.2, "beta": 0.1, "a": 0, "b": 7.5}}])
    code, out, _ = run(capsys, "verify", str(write_config(tmp_path, raw)))
    assert code == 1
    assert "NaN" not in out and "Infinity" not in out
    json.loads(out)
