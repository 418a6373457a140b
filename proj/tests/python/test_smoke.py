import json
import os
import pathlib
import subprocess

import pytest

import kava

FIXTURES = pathlib.Path(os.environ.get("KAVA_FIXTURE_DIR", pathlib.Path(__file__).parents[1] / "fixtures"))


def fixture(name):
    return (FIXTURES / name).read_text()


def test_listing_round_trip():
    ttl = fixture("listing3.ttl")
    jsonld = kava.convert(ttl, "turtle", "jsonld")
    assert kava.isomorphic(ttl, "turtle", jsonld, "jsonld")
    assert len(kava.triples(ttl)) == 7


def test_errors_carry_codes():
    with pytest.raises(kava.KavaError) as info:
        kava.triples("foo:a foo:b foo:c .")
    assert info.value.code == "UnknownPrefix"


def test_validate_reports_cycle():
    findings = kava.validate(fixture("listing2.jsonld"), "jsonld")
    cycles = [f for f in findings if f["code"] == "BroaderCycle"]
    assert cycles and cycles[0]["severity"] == "error"


def test_hyperglycemia_ids():
    rows = kava.evaluate(fixture("listing4.ttl"), fixture("blood_sugar.csv"))
    assert len(rows) == 1
    assert rows[0]["concept"].endswith("R73")
    assert rows[0]["ids"]


def test_threshold_fragment_matches_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema_path = os.environ.get("KAVA_SCHEMA")
    if not schema_path:
        schema_path = pathlib.Path(__file__).parents[2] / "docs" / "vis-fragment.schema.json"
    schema = json.loads(pathlib.Path(schema_path).read_text())
    (doc,) = kava.threshold_regions(fixture("listing4.ttl"), "bloodSugar")
    parsed = json.loads(doc)
    jsonschema.validate(parsed, schema)
    assert parsed["region"]["lower"] == 200
    assert kava.validate_fragment(doc) == []


def test_square_wave_gait():
    trial = kava.synthesize_trial()
    p = kava.compute_params(**trial)
    assert set(p) == set(kava.parameter_names())
    assert p["stanceTimeLeft"] == pytest.approx(0.6, abs=1e-3)
    assert p["stepTimeRight"] == pytest.approx(0.5, abs=1e-3)
    assert p["cadence"] == pytest.approx(120, abs=0.5)


def test_cli_binary_validates():
    cli = os.environ.get("KAVA_CLI")
    if not cli:
        pytest.skip("KAVA_CLI not set")
    done = subprocess.run([cli, "validate", str(FIXTURES / "listing1.ttl")], capture_output=True, text=True)
    assert done.returncode == 0
    code, out, _ = kava.run_cli(["validate", str(FIXTURES / "listing1.ttl")])
    assert code == 0
