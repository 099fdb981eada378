"""CLI subcommands: exit codes, JSON round-trips, byte-identical reruns."""

import json
import subprocess
import sys

import pytest

from conftest import p2_style_doc
from fglcorr.cli import main
from fglcorr.correction import CorrectionSeries
from fglcorr.divisor import JDecomposition
from fglcorr.fgl import FormalGroupLaw, honda_law, multiplicative_law
from fglcorr.gw import NovikovSeries
from fglcorr.series import TruncatedSeries


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_law_table_text(capsys):
    code, out, _ = run_cli(capsys, "law", "--kind", "honda", "--p", "2",
                           "--n", "1", "--bound", "6")
    assert code == 0
    assert "a[1,1] = v" in out


def test_law_json_round_trip(capsys):
    code, out, _ = run_cli(capsys, "law", "--kind", "honda", "--p", "2",
                           "--n", "1", "--bound", "6", "--format", "json")
    assert code == 0
    law = FormalGroupLaw.from_json(json.loads(out))
    assert law == honda_law(2, 1, 6)


def test_nseries_round_trip(capsys):
    code, out, _ = run_cli(capsys, "nseries", "--law", "honda:2,1",
                           "--multiple", "2", "--var", "x", "--trunc", "4",
                           "--format", "json")
    assert code == 0
    series = TruncatedSeries.from_json(json.loads(out))
    assert series.render() == "v*x^2"


def test_multisum_text(capsys):
    code, out, _ = run_cli(capsys, "multisum", "--law", "multiplicative",
                           "--vars", "u,v", "--multiplicities", "1,1",
                           "--trunc", "4")
    assert code == 0
    assert out.strip() == "u + v - u*v"


def test_decompose_json_round_trip(capsys):
    code, out, _ = run_cli(capsys, "decompose", "--law", "multiplicative",
                           "--vars", "u,v", "--multiplicities", "1,1",
                           "--trunc", "4", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert set(doc["components"]) == {"00", "01", "10", "11"}
    dec = JDecomposition.from_json(doc)
    assert dec.component((1, 1)).render() == "-1"


def test_correction_json_round_trip_and_rerun(capsys):
    args = ("correction", "--law", "multiplicative", "--N", "3",
            "--trunc", "6", "--format", "json")
    code, out1, _ = run_cli(capsys, *args)
    assert code == 0
    corr = CorrectionSeries.from_json(json.loads(out1))
    stage = corr.per_stage[2]
    ctx, ring = stage.context, stage.ring
    one = TruncatedSeries.one(ctx, ring, stage.truncation)
    d0 = TruncatedSeries.variable(ctx, ring, stage.truncation, "D0")
    d1 = TruncatedSeries.variable(ctx, ring, stage.truncation, "D1")
    assert stage == (one - d0) * (one - d1)
    code, out2, _ = run_cli(capsys, *args)
    assert out1 == out2  # byte-identical rerun


def test_verify_round_trip(tmp_path, capsys):
    code, out, _ = run_cli(capsys, "correction", "--law", "honda:2,1",
                           "--N", "2", "--trunc", "5", "--format", "json")
    assert code == 0
    path = tmp_path / "dump.json"
    path.write_text(out)
    code, out2, _ = run_cli(capsys, "verify", "--file", str(path))
    assert code == 0
    assert "verified" in out2

    doc = json.loads(out)
    doc["f"]["terms"][1][1] = "0"
    bad = tmp_path / "tampered.json"
    bad.write_text(json.dumps(doc))
    code, out3, _ = run_cli(capsys, "verify", "--file", str(bad))
    assert code == 1
    assert "FAILS at monomial" in out3


def test_qprod_json_round_trip(tmp_path, capsys):
    datum = tmp_path / "datum.json"
    datum.write_text(json.dumps(p2_style_doc()))
    args = ("qprod", "--datum", str(datum), "--law", "multiplicative",
            "--cutoff", "5", "--truncation", "5", "--a", "h2", "--b", "h2",
            "--format", "json")
    code, out, _ = run_cli(capsys, *args)
    assert code == 0
    series = NovikovSeries.from_json(json.loads(out))
    assert series.terms[0][0] == 1
    code, out2, _ = run_cli(capsys, *args)
    assert out == out2


def test_qprod_assoc_exit_codes(tmp_path, capsys):
    doc = p2_style_doc()
    datum = tmp_path / "datum.json"
    datum.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, "qprod", "--datum", str(datum), "--law",
                           "multiplicative", "--cutoff", "5", "--truncation",
                           "5", "--check-assoc")
    assert code == 0
    assert "associative" in out

    doc["classes"][1]["correlator"][2][2][1] = 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, "qprod", "--datum", str(bad), "--law",
                           "multiplicative", "--cutoff", "5", "--truncation",
                           "5", "--check-assoc", "--format", "json")
    assert code == 1
    report = json.loads(out)
    assert report["associative"] is False
    assert report["residuals"][0][0] == "1"


def test_subdivide_round_trip(tmp_path, capsys):
    infile = tmp_path / "tri.json"
    infile.write_text(json.dumps({"faces": [["a", "b", "c"]]}))
    code, out, _ = run_cli(capsys, "subdivide", "--file", str(infile))
    assert code == 0
    doc = json.loads(out)
    assert len(doc["vertices"]) == 7
    assert sum(1 for f in doc["faces"] if len(f) == 3) == 6
    code, out2, _ = run_cli(capsys, "subdivide", "--file", str(infile))
    assert out == out2


def test_usage_error_exit_2(capsys):
    code = main(["law", "--kind", "nonsense", "--bound", "4"])
    capsys.readouterr()
    assert code == 2
    code = main(["nseries", "--law", "honda:2", "--multiple", "2",
                 "--trunc", "4"])
    captured = capsys.readouterr()
    assert code == 2
    assert "error" in captured.err


def test_missing_file_exit_2(capsys):
    code, _, err = run_cli(capsys, "verify", "--file", "/nonexistent.json")
    assert code == 2
    assert "error" in err


def test_console_entry_point_smoke():
    result = subprocess.run(
        [sys.executable, "-m", "fglcorr.cli", "multisum", "--law", "additive",
         "--vars", "a,b", "--multiplicities", "2,3", "--trunc", "3"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    assert result.stdout.strip() == "2*a + 3*b"
