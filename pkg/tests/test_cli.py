import json
import subprocess
import sys

import pytest

from ordinalvm.cli import main

from conftest import PROGRAMS

WAITER = str(PROGRAMS / "waiter.ovm")


def cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_waiter(capsys):
    assert cli(capsys, "run", WAITER, "--input", "y=w") == (0, "HALTED t=w+1 x=w y=w\n", "")


def test_run_without_acceleration(capsys):
    code, out, _ = cli(capsys, "run", WAITER, "--input", "y=w", "--max-jumps", "0", "--fuel", "10000")
    assert code == 0 and out.startswith("OUT_OF_FUEL t=10000 ")


def test_assemble_listing(capsys):
    code, out, _ = cli(capsys, "assemble", WAITER)
    assert out.splitlines() == ["0: BEQ x y 3", "1: INC x", "2: BEQ x x 0", "3: HALT"]


def test_trace(capsys):
    code, out, _ = cli(capsys, "trace", WAITER, "--input", "y=w")
    lines = out.splitlines()
    assert lines[0] == "t=0 ip=0 x=0 y=w"
    assert lines[1].startswith("# limit jump")
    assert lines[-2:] == ["t=w+1 ip=3 x=w y=w", "HALTED t=w+1 x=w y=w"]


@pytest.mark.parametrize("fmt, suffix", [("text", ".txt"), ("bits", ".bits"), ("packed", ".bin")])
def test_certify_then_verify(capsys, tmp_path, fmt, suffix):
    cert = tmp_path / f"c{suffix}"
    assert cli(capsys, "certify", "--program", WAITER, "--input", "y=w", "--prefix", "1000", "--format", fmt, "--out", str(cert))[0] == 0
    assert cli(capsys, "verify", "--program", WAITER, "--cert", str(cert), "--max-records", "1000") == (0, "ACCEPT 1000\n", "")


def test_mutate_then_verify(capsys, tmp_path):
    cert = tmp_path / "m.txt"
    cli(capsys, "mutate", "--program", WAITER, "--input", "y=w", "--prefix", "500", "--kind", "BreakInverse", "--out", str(cert))
    code, out, _ = cli(capsys, "verify", "--program", WAITER, "--cert", str(cert))
    assert code == 1 and out.split()[:3] == ["REJECT", "6", "R10"]


def test_verify_bad_text_is_frame_reject(capsys, tmp_path):
    cert = tmp_path / "c.txt"
    cert.write_text("Z FINAL 0\nZ NONSENSE\n")
    code, out, _ = cli(capsys, "verify", "--program", WAITER, "--cert", str(cert))
    assert code == 1 and out.startswith("REJECT 1 FRAME")


def test_dioph(capsys, tmp_path):
    assert cli(capsys, "dioph", "stretch", "11", "2")[1] == "69\n"
    assert cli(capsys, "dioph", "dominate", "5", "7")[1] == "true\n"
    assert cli(capsys, "dioph", "trunc", "1/3", "4")[1] == "5\n"
    code, _, err = cli(capsys, "dioph", "trunc", "1/2", "1")
    assert code == 1 and "integer" in err
    system = {"atoms": [{"type": "poly_eq", "poly": [{"coef": "1", "vars": {"a": 1}}, {"coef": "-3", "vars": {}}]}]}
    (tmp_path / "s.json").write_text(json.dumps(system))
    (tmp_path / "w.json").write_text('{"a": 3}')
    args = ("dioph", "eval", "--system", str(tmp_path / "s.json"), "--witness", str(tmp_path / "w.json"))
    assert cli(capsys, *args)[:2] == (0, "SATISFIED\n")
    (tmp_path / "w.json").write_text('{"b": 3}')
    assert cli(capsys, *args)[0] == 1


def test_usage_errors_exit_2(capsys):
    assert cli(capsys, "run", "/nonexistent.ovm")[0] == 2
    assert cli(capsys, "run", WAITER, "--input", "y=banana")[0] == 2
    assert cli(capsys, "run", WAITER, "--fuel", "-3")[0] == 2
    assert cli(capsys, "frobnicate")[0] == 2
    assert cli(capsys, "mutate", "--program", WAITER, "--input", "y=w", "--kind", "Nope")[0] == 2


def test_domain_errors_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.ovm"
    bad.write_text("JUMP 3\n")
    assert cli(capsys, "run", str(bad))[0] == 1
    code, _, err = cli(capsys, "certify", "--program", WAITER, "--input", "y=w^2")
    assert code == 1 and "did not halt" in err


def test_soundness(capsys):
    code, out, _ = cli(capsys, "soundness", "--seed", "5", "--count", "20")
    assert code == 0 and out.strip() == "SOUNDNESS seed=5 trials=20 mismatches=0"


def test_demo_small_prefix(capsys):
    code, out, _ = cli(capsys, "demo", "--prefix", "2000")
    assert code == 0 and "DEMO OK" in out and out.count("REJECT") == 9


def test_module_entry_point():
    out = subprocess.run(
        [sys.executable, "-m", "ordinalvm", "dioph", "stretch", "11", "2"], capture_output=True, text=True
    )
    assert out.returncode == 0 and out.stdout == "69\n"
