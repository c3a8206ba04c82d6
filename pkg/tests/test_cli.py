import json
import subprocess
import sys

import pytest

from maskprop import cli, oracle
from maskprop.gadget import fixture_path

from conftest import netlist

ENCODER_TEXT = "\n".join(" ".join("1" if j == k else "0" for j in range(8))
                         for k in [0, 1, 2, 3, 7, 6, 5, 4]) + "\n"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_matrix_encoder(capsys):
    code, out, _ = run(capsys, "matrix", fixture_path("encoder3"))
    assert code == 0 and out == ENCODER_TEXT


def test_matrix_identity(capsys):
    code, out, _ = run(capsys, "matrix", fixture_path("identity2"))
    assert out == "1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n"


def test_matrix_observed_row_matches_oracle(capsys):
    code, out, _ = run(capsys, "matrix", fixture_path("dom2"), "--observe", "c0")
    rows = [line.split() for line in out.splitlines()]
    assert code == 0 and len(rows) == 2
    full = oracle.oracle_matrix(netlist("dom2")).rows_as_str()
    # observed c0 is output parity 0b10; a random enters as |0>, so keep the
    # columns whose random bit is zero
    assert rows == [[r[j] for j in range(0, 32, 2)] for r in (full[0], full[2])]


def test_matrix_uses_dyadic_notation(capsys, tmp_path):
    p = tmp_path / "and.gdl"
    p.write_text("gadget a\ninput x\ninput y\nz = and x y\noutput z\n")
    _, out, _ = run(capsys, "matrix", str(p))
    assert "1/2^1" in out and "." not in out


def test_check_dom2_pini_fails(capsys):
    code, out, _ = run(capsys, "check", fixture_path("dom2"), "--prop", "pini", "-t", "2",
                       "--probes", "1")
    assert code == 1 and out.startswith("pini t=2: FAIL")


def test_check_refresh_sim_passes(capsys):
    code, out, _ = run(capsys, "check", fixture_path("refresh2"), "--prop", "sim",
                       "--observe", "c0", "--d", "0", "--oracle")
    assert code == 0 and "PASS" in out


def test_check_empty_observation(capsys):
    code, _, _ = run(capsys, "check", fixture_path("dom2"), "--prop", "sim", "--observe",
                     "--d", "0")
    assert code == 0


def test_check_ni_sni(capsys):
    assert run(capsys, "check", fixture_path("refresh2"), "--prop", "sni", "--d", "1")[0] == 0
    assert run(capsys, "check", fixture_path("identity2"), "--prop", "sni", "--d", "1")[0] == 1


def test_inconsistent_flags_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["check", fixture_path("dom2"), "--prop", "pini"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["check", fixture_path("dom2"), "--prop", "sim"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["--cap", "0", "matrix", fixture_path("dom2")])
    assert exc.value.code == 2


def test_parse_error_exit_2(capsys, tmp_path):
    p = tmp_path / "bad.gdl"
    p.write_text("gadget bad\ninput a\nc = xor a zz\noutput c\n")
    code, _, err = run(capsys, "matrix", str(p))
    assert code == 2 and "line 3" in err
    assert run(capsys, "matrix", str(tmp_path / "missing.gdl"))[0] == 2


def test_cap_exit_3(capsys, monkeypatch):
    assert run(capsys, "--cap", "2", "matrix", fixture_path("dom2"))[0] == 3
    assert run(capsys, "--cap", "2", "check", fixture_path("dom2"), "--prop", "ni",
               "--d", "1")[0] == 3
    monkeypatch.setenv("MASKPROP_BIT_CAP", "2")
    code, out, _ = run(capsys, "check", fixture_path("encoder3"), "--prop", "sim", "--d", "0")
    assert code == 3 and "Skipped" in out


def test_no_oracle_not_shown_is_failure(capsys):
    code, out, _ = run(capsys, "check", fixture_path("encoder3"), "--prop", "sim", "--d", "0",
                       "--no-oracle")
    assert code == 1 and "UNDECIDED" in out


def test_json_report_and_determinism(capsys, tmp_path):
    rep = tmp_path / "r.json"
    args = ["check", fixture_path("dom2"), "--prop", "pini", "-t", "2", "--format", "json",
            "--report", str(rep)]
    assert run(capsys, *args)[0] == 1
    first = rep.read_bytes()
    run(capsys, *args)
    assert rep.read_bytes() == first
    assert json.loads(first)["passed"] is False


def test_render(capsys):
    code, out, _ = run(capsys, "render", fixture_path("encoder3"))
    assert code == 0 and out.count('label="xor"') == 2 and out.count('label="dup"') == 2
    assert "swap" not in out
    _, out, _ = run(capsys, "render", fixture_path("refresh2"), "--observe", "c0",
                    "--after-rewrite")
    assert out.count('label="random"') == 1 and out.count('label="erase"') == 2
    assert 'label="xor"' not in out
    _, out, _ = run(capsys, "render", fixture_path("refresh2"), "--observe")
    assert "out0" not in out and 'label="erase"' in out


@pytest.fixture
def trace_file(capsys, tmp_path):
    t = tmp_path / "t.trace"
    code, _, _ = run(capsys, "check", fixture_path("refresh2"), "--prop", "sim", "--observe",
                     "c0", "--d", "0", "--trace", str(t))
    assert code == 0
    return t


def test_replay_fresh(capsys, trace_file):
    text = trace_file.read_text()
    assert "# observe c0" in text
    code, out, _ = run(capsys, "replay", fixture_path("refresh2"), str(trace_file))
    assert code == 0 and "replayed 3 step(s)" in out


def test_replay_corrupted_rule(capsys, trace_file):
    lines = trace_file.read_text().splitlines()
    k = next(i for i, line in enumerate(lines) if not line.startswith("#"))
    lines[k] = "R42" + lines[k][lines[k].index("@"):]
    trace_file.write_text("\n".join(lines) + "\n")
    code, _, err = run(capsys, "replay", fixture_path("refresh2"), str(trace_file))
    assert code == 1 and "step 1" in err and "R42" in err


def test_replay_edited_gadget(capsys, trace_file, tmp_path):
    src = open(fixture_path("refresh2")).read()
    edited = tmp_path / "refresh2.gdl"
    edited.write_text(src.replace("random r", "random q\nrandom r"))
    code, _, err = run(capsys, "replay", str(edited), str(trace_file))
    assert code == 1 and "site mismatch" in err


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "maskprop.cli", "matrix",
                          fixture_path("encoder3")], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout == ENCODER_TEXT
