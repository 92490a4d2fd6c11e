import json
import subprocess
import sys

import pytest

from infosize.cli import main

from conftest import DATA

TTC_FILE = str(DATA / "example2_ttc.json")
DA_FILE = str(DATA / "example2_da.json")


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_prints_matching(capsys):
    code, out, _ = _run(capsys, "run", "--mech", "ttc", TTC_FILE)
    assert code == 0
    assert out.strip() == "1→a, 2→c, 3→b"


def test_run_trace(capsys):
    code, out, _ = _run(capsys, "run", "--mech", "da", "--trace", DA_FILE)
    assert code == 0
    assert "DA step 1: school b receives {2, 3}" in out


def test_sd_without_moving_sequence_is_usage_error(capsys):
    code, _, err = _run(capsys, "run", "--mech", "sd", TTC_FILE)
    assert code == 1
    assert "moving sequence" in err


def test_malformed_problem_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"students": ["1", "2", "3"], "schools": ["a"]}))
    code, _, err = _run(capsys, "run", "--mech", "da", str(bad))
    assert code == 1
    assert "invalid problem file" in err
    code, _, _ = _run(capsys, "run", "--mech", "da", str(tmp_path / "missing.json"))
    assert code == 1


def test_unknown_option_exits_one(capsys):
    with pytest.raises(SystemExit) as stop:
        main(["run", "--mech", "boston", TTC_FILE])
    assert stop.value.code == 1


def test_secure_reports_nu_witness_and_statistics(capsys):
    code, out, _ = _run(capsys, "secure", "--mech", "da", "--pair", "1:a", DA_FILE)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("ν = ")
    assert lines[1].startswith("witness: ")
    assert "candidates checked" in lines[2]


def test_secure_outside_support_exits_two(capsys):
    code, _, err = _run(capsys, "secure", "--mech", "ttc", "--pair", "2:a", TTC_FILE)
    assert code == 2
    assert "outside support" in err


def test_secure_needs_pair(capsys):
    code, _, _ = _run(capsys, "secure", "--mech", "ttc", TTC_FILE)
    assert code == 1


def test_verify_scale_guard(capsys):
    code, _, err = _run(capsys, "verify", "--n", "5")
    assert code == 1
    assert "--force" in err


def test_exhaustive_scale_guard(capsys):
    code, _, _ = _run(capsys, "is", "--mech", "ia", "--n", "4")
    assert code == 1
    code, _, _ = _run(capsys, "table", "--m", "4")
    assert code == 1


def test_formula(capsys):
    code, out, _ = _run(capsys, "formula", "--mech", "ttc", "--n", "5")
    assert code == 0 and ": 24 (closed form)" in out
    code, out, _ = _run(capsys, "formula", "--mech", "ia", "--support", "full", "--rank", "2")
    assert "6 (recursion); explicit count gives 7" in out
    code, _, _ = _run(capsys, "formula", "--mech", "sd", "--support", "full", "--rank", "2")
    assert code == 1


def test_is_top(capsys):
    code, out, _ = _run(capsys, "is", "--mech", "sd", "--pair", "2:c")
    assert code == 0
    assert out.startswith("IS(SD; 2:c) on top support = ")
    assert "exact, exhaustive" in out


def test_is_construct(capsys):
    code, out, _ = _run(capsys, "is", "--mech", "ttc", "--n", "4", "--policy", "construct")
    assert "I = 15" in out and "[construction]" in out


def test_compare_gates_sd(capsys):
    code, _, err = _run(capsys, "compare", "--mech", "ia", "--mech", "sd", "--support", "full")
    assert code == 1 and "override" in err


def test_compare_prints_both_wordings(capsys):
    code, out, _ = _run(capsys, "compare", "--mech", "ia", "--mech", "da", "--support", "top", "--format", "csv")
    assert code == 0
    assert out.splitlines()[0] == "student,school,IS(IA),IS(DA)"
    assert "relation: " in out


def test_auction_single_profile(capsys):
    code, out, _ = _run(capsys, "auction", "--rule", "spa", "--bids", "5,3")
    assert code == 0
    assert "pays 3" in out and "needed: 10" in out


def test_auction_table(capsys, tmp_path):
    code, out, err = _run(capsys, "table", "auction", "--format", "csv")
    assert code == 0
    rows = out.strip().splitlines()
    assert rows[0] == "bid1,bid2,fpa,spa,descending,ascending"
    assert len(rows) == 122
    for row in rows[1:]:
        _, _, fpa, spa, desc, asc = map(int, row.split(","))
        assert spa >= fpa and asc >= desc
    target = tmp_path / "t.json"
    code, _, _ = _run(capsys, "table", "auction", "--format", "json", "--out", str(target))
    assert len(json.loads(target.read_text())) == 121


def test_unwritable_output(capsys, tmp_path):
    code, _, _ = _run(capsys, "table", "auction", "--out", str(tmp_path / "no" / "such" / "dir.csv"))
    assert code == 1


def test_table_bytes_identical_with_and_without_cache(capsys, tmp_path):
    cache = str(tmp_path / "c.bin")
    outs = []
    for extra in ([], ["--cache", cache], ["--cache", cache], ["--jobs", "2"]):
        code, out, _ = _run(capsys, "table", "--support", "common", "--format", "csv", *extra)
        assert code == 0
        outs.append(out)
    assert len(set(outs)) == 1
    header = outs[0].splitlines()[0]
    assert header == "mechanism,support,pair,rank,IS,provenance,witness"


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "infosize.cli", "run", "--mech", "ia", TTC_FILE], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.strip() == "1→a, 2→c, 3→b"
