"""End-to-end checks of the hlphase executable: exit codes, output files,
schemas, golden fixtures and reproducibility."""

import csv
import json
import os
import pathlib
import subprocess

import jsonschema
import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
BIN = os.environ.get("HLPHASE_BIN", str(ROOT / "build" / "hlphase"))
SCHEMAS = ROOT / "schemas" / "v1"
FIXTURES = ROOT / "tests" / "fixtures" / "v1"


def run(args, out, env=None, check_code=0):
    e = dict(os.environ)
    e.pop("HLPHASE_SEED", None)
    e.update(env or {})
    p = subprocess.run([BIN, *args, "-o", str(out)], capture_output=True, text=True, env=e)
    if check_code is not None:
        assert p.returncode == check_code, p.stderr
    return p


def load(out, name):
    return json.loads((out / name).read_text())


def validate(doc, schema_name):
    schema = json.loads((SCHEMAS / f"{schema_name}.schema.json").read_text())
    jsonschema.validate(doc, schema)


def write_state(path, real, imag=None):
    n = len(real)
    imag = imag or [[0.0] * n for _ in range(n)]
    doc = {"num_qubits": n.bit_length() - 1, "real": real, "imag": imag}
    validate(doc, "density")
    path.write_text(json.dumps(doc))
    return path


def bell_phi_plus(tmp_path):
    h = 0.5
    return write_state(tmp_path / "phi_plus.json", [[h, 0, 0, h], [0, 0, 0, 0], [0, 0, 0, 0], [h, 0, 0, h]])


# ---- exit codes ----

@pytest.mark.parametrize(
    "args,code",
    [
        (["snl", "-N", "13"], 2),
        (["snl", "-N", "0"], 2),
        (["optimize", "--symmetric", "--passes", "3", "--adaptive"], 2),
        (["optimize", "--symmetric", "--single-pass"], 2),
        (["hpea-sweep", "--grid", "4"], 2),
        (["hpea-sweep", "--state", "/nonexistent/rho.json"], 2),
        (["optimize", "--general", "--single-pass", "--non-adaptive", "--restarts", "2", "--max-evaluations", "10"], 3),
        ([], 2),
    ],
)
def test_exit_codes(tmp_path, args, code):
    p = run(args, tmp_path, check_code=None)
    assert p.returncode == code, p.stderr
    if code:
        assert p.stderr.strip()


def test_non_psd_state_names_invariant(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"num_qubits": 1, "real": [[1.5, 0], [0, -0.5]], "imag": [[0, 0], [0, 0]]}))
    p = run(["fidelity", "--state", str(bad)], tmp_path, check_code=2)
    assert "positivity" in p.stderr


def test_nonconvergence_still_writes_result(tmp_path):
    run(["optimize", "--general", "--single-pass", "--non-adaptive", "--restarts", "2", "--max-evaluations", "10"],
        tmp_path, check_code=3)
    doc = load(tmp_path, "optimize.json")
    validate(doc, "optimize")
    assert doc["converged"] is False


# ---- numerical examples ----

def test_hpea_sweep_default(tmp_path):
    run(["hpea-sweep"], tmp_path)
    doc = load(tmp_path, "hpea-sweep.json")
    validate(doc, "hpea-summary")
    assert doc["V_H"] == pytest.approx(0.5278640450004206, abs=1e-9)
    assert doc["experimental_reference"]["V_H"] == 0.5497
    rows = list(csv.DictReader((tmp_path / "hpea-sweep.csv").open()))
    assert len(rows) == 64
    for r in rows:
        total = sum(float(r[k]) for k in ("P_dd", "P_ad", "P_da", "P_aa"))
        assert total == pytest.approx(1.0, abs=1e-12)


def test_maximally_mixed_is_null(tmp_path):
    q = 0.25
    state = write_state(tmp_path / "mm.json", [[q if i == j else 0 for j in range(4)] for i in range(4)])
    run(["hpea-sweep", "--state", str(state)], tmp_path)
    doc = load(tmp_path, "hpea-sweep.json")
    validate(doc, "hpea-summary")
    assert doc["V_H"] is None and doc["V_H_infinite"] is True


def test_fidelity_of_bell_state(tmp_path):
    run(["fidelity", "--state", str(bell_phi_plus(tmp_path))], tmp_path)
    doc = load(tmp_path, "fidelity.json")
    validate(doc, "fidelity")
    assert doc["fidelity"] == pytest.approx(0.2763932022500210, abs=1e-12)
    assert round(doc["fidelity"], 4) == 0.2764
    assert doc["purity"] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n,expected", [(1, 3.0), (3, 7.0 / 9.0)])
def test_snl_exact(tmp_path, n, expected):
    run(["snl", "-N", str(n)], tmp_path)
    doc = load(tmp_path, "snl.json")
    validate(doc, "snl-summary")
    assert doc["V_H"] == pytest.approx(expected, abs=1e-12)
    assert doc["n_outcomes"] == 2 ** n


def test_hpea_shot_counts(tmp_path):
    run(["hpea-shot", "--phi", "0.5", "--shots", "1000", "--records"], tmp_path)
    doc = load(tmp_path, "hpea-shot.json")
    validate(doc, "hpea-shot")
    assert sum(doc["counts"].values()) == 1000
    rows = list(csv.DictReader((tmp_path / "hpea-shot.csv").open()))
    assert len(rows) == 1000
    assert {r["outcome"] for r in rows} <= {"dd", "ad", "da", "aa"}


def test_calibrate(tmp_path):
    run(["calibrate", "--points", "8"], tmp_path)
    doc = load(tmp_path, "calibrate.json")
    validate(doc, "calibrate")
    assert doc["equivalence_max_abs_diff"] < 1e-10
    assert doc["double_pass_max_error"] < 1e-10
    rows = list(csv.DictReader((tmp_path / "calibrate.csv").open()))
    assert len(rows) == 16
    assert all(abs(float(r["error"])) < 1e-10 for r in rows)


def test_table2(tmp_path):
    run(["table2", "--restarts", "20", "--seed", "1"], tmp_path)
    doc = load(tmp_path, "table2.json")
    validate(doc, "table2")
    experimental = [r for r in doc["rows"] if r["computed"] is None]
    assert sorted(r["reference"] for r in experimental) == [0.5497, 0.787]
    for r in doc["rows"]:
        if r["computed"] is not None:
            assert r["abs_error"] < 1e-4, r
    rows = list(csv.reader((tmp_path / "table2.csv").open()))
    assert all(len(r) == len(rows[0]) for r in rows)


# ---- golden fixtures ----

FIXTURE_FILES = sorted(FIXTURES.glob("*/*.json"))


@pytest.mark.parametrize("fixture", FIXTURE_FILES, ids=[f.stem for f in FIXTURE_FILES])
def test_golden_fixture(tmp_path, fixture):
    fx = json.loads(fixture.read_text())
    run(fx["arguments"], tmp_path)
    command = fx["arguments"][0]
    doc = load(tmp_path, f"{command}.json")
    assert doc[fx["field"]] == pytest.approx(fx["expected"], abs=fx["tolerance"])
    if command == "optimize":
        validate(doc, "optimize")
        assert doc["reference"] == pytest.approx(fx["expected"], abs=1e-15)
        assert doc["restarts"] >= 200


# ---- reproducibility ----

def outputs(out, command):
    return {p.name: p.read_bytes() for p in sorted(out.glob(f"{command}.*")) if not p.name.endswith("manifest.json")}


def test_worker_count_does_not_change_results(tmp_path):
    args = ["hpea-sweep", "--mode", "mc", "--trials", "3000", "--grid", "16", "--seed", "9"]
    a, b = tmp_path / "a", tmp_path / "b"
    run(args + ["--workers", "1"], a)
    run(args + ["--workers", "4"], b)
    assert outputs(a, "hpea-sweep") == outputs(b, "hpea-sweep")

    opt = ["optimize", "--general", "--single-pass", "--adaptive", "--restarts", "6", "--seed", "3"]
    run(opt + ["--workers", "1"], a)
    run(opt + ["--workers", "3"], b)
    assert outputs(a, "optimize") == outputs(b, "optimize")


def test_seed_from_environment(tmp_path):
    args = ["snl", "--mode", "mc", "--trials", "2000", "--grid", "8"]
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    run(args + ["--seed", "17"], a)
    run(args, b, env={"HLPHASE_SEED": "17"})
    run(args, c)
    assert outputs(a, "snl") == outputs(b, "snl")
    assert outputs(a, "snl") != outputs(c, "snl")
    assert load(b, "snl.manifest.json")["seed"] == 17


@pytest.mark.parametrize(
    "args",
    [
        ["hpea-sweep", "--mode", "mc", "--trials", "2000", "--grid", "16", "--bootstrap", "200"],
        ["optimize", "--symmetric", "--single-pass", "--adaptive", "--restarts", "4"],
        ["hpea-shot", "--phi", "1.1", "--shots", "500", "--records"],
    ],
)
def test_replay_is_byte_identical(tmp_path, args):
    first, second = tmp_path / "first", tmp_path / "second"
    run(args + ["--seed", "21"], first)
    command = args[0]
    manifest = load(first, f"{command}.manifest.json")
    validate(manifest, "manifest")
    assert manifest["command"] == command
    subprocess.run([BIN, "replay", str(first / f"{command}.manifest.json"), "-o", str(second)], check=True,
                   capture_output=True)
    assert outputs(first, command) == outputs(second, command)


def test_every_manifest_validates(tmp_path):
    for args in (["hpea-sweep"], ["snl"], ["calibrate"], ["hpea-shot", "--phi", "0.2", "--shots", "10"]):
        run(args, tmp_path)
        validate(load(tmp_path, f"{args[0]}.manifest.json"), "manifest")


def test_csv_numbers_round_trip(tmp_path):
    run(["hpea-sweep", "--grid", "8"], tmp_path)
    rows = list(csv.DictReader((tmp_path / "hpea-sweep.csv").open()))
    for r in rows:
        for v in r.values():
            assert v == f"{float(v):.17g}"
    assert float(rows[1]["phi"]) == 2 * 3.141592653589793 / 8
