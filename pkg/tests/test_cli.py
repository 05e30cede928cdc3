import json

from divlab.census import moment_divisor_sieve
from divlab.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_UNCERTIFIED, EXIT_VALIDATION, RunManifest, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_analyze_m2k2(capsys):
    code, out, _ = run(capsys, "analyze", "m2k2", "--json", "--prime-cutoff", "100000")
    assert code == 0
    doc = json.loads(out)
    assert doc["kappa"] == 1 and doc["verdict"] == "certified"
    lo, hi = float(doc["leading_coefficient"]["lo"]), float(doc["leading_coefficient"]["hi"])
    assert abs((lo + hi) / 2 - 1.21585) < 1e-4 and hi - lo < 1e-4
    assert len(doc["slice"]) == 4


def test_analyze_downgraded_and_strict(capsys):
    code, out, _ = run(capsys, "analyze", "m2k2", "--a", "1,1/2,1/2,1/2", "--no-volume",
                       "--prime-cutoff", "1000", "--strict")
    assert code == EXIT_UNCERTIFIED
    assert "downgraded" in out and "counterexample" in out


def test_analyze_malformed(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"parts": [{"gamma": [1, "x"]}]}')
    code, _, err = run(capsys, "analyze", str(bad))
    assert code == EXIT_VALIDATION and "$.parts[0].gamma[1]" in err
    bad.write_text("{oops")
    assert run(capsys, "analyze", str(bad))[0] == EXIT_VALIDATION


def test_count_csv(capsys, tmp_path):
    out_csv = tmp_path / "c.csv"
    code, out, _ = run(capsys, "count", "m2k2", "--grid", "2,4", "--csv", str(out_csv))
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "H,count,method,seconds"
    assert [l.split(",")[:2] for l in lines[1:]] == [["2", "6"], ["4", "32"]]
    code, out, _ = run(capsys, "count", "y-square", "--grid", "4")
    assert out.splitlines()[1].startswith("4,6,")


def test_count_budget(capsys):
    assert run(capsys, "count", "m2k2", "--grid", "100000", "--budget", "1e5")[0] == EXIT_BUDGET


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--m", "2", "--k", "2", "--ell", "2", "--grid", "4")
    assert code == 0 and out.splitlines()[1].startswith("4,12,")
    code, out, _ = run(capsys, "moments", "--coprime", "2", "--grid", "10", "--json")
    assert json.loads(out)["rows"][0]["method"] == "restricted"


def test_volume_command(capsys):
    code, out, _ = run(capsys, "volume", "y-square", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["operational_exact"] == "1" and doc["fiber"] == "1/2*sqrt(6)"


def test_constants_command(capsys):
    code, out, _ = run(capsys, "constants", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["A"]["lo"].startswith("-0.51131744")


def test_verify_known(capsys):
    code, out, _ = run(capsys, "verify-known", "singular")
    assert code == 0 and "PASS" in out
    assert run(capsys, "verify-known", "egyptian")[0] == 0
    assert run(capsys, "verify-known", "bogus-name")[0] == 2


def test_manifest_replay(capsys, tmp_path):
    man = tmp_path / "run.json"
    assert run(capsys, "count", "m2k2", "--grid", "3,9", "--manifest", str(man), "--threads", "2")[0] == 0
    m = RunManifest.from_json(man.read_text())
    assert m.fingerprint and m.command == "count"
    assert m.result["rows"][1]["count"] == str(moment_divisor_sieve(2, 2, 9))
    assert m.parameters["threads"] == 2 and m.version
    code, out, _ = run(capsys, "replay", str(man))
    assert code == 0 and "identical" in out
    doc = json.loads(man.read_text())
    doc["result"]["rows"][0]["count"] = "0"
    man.write_text(json.dumps(doc))
    assert run(capsys, "replay", str(man))[0] == EXIT_FAIL


def test_json_round_trip_of_counts(capsys):
    code, out, _ = run(capsys, "count", "m2k2", "--grid", "50", "--json")
    doc = json.loads(out)
    assert int(doc["rows"][0]["count"]) == moment_divisor_sieve(2, 2, 50)
