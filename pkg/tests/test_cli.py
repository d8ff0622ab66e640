import subprocess
import sys

import pytest

from semialloc.bitstream import pack_bits, unpack_bits
from semialloc.cli import main
from semialloc.semimeasure import parse_table


@pytest.fixture
def uniform_alloc(tmp_path):
    path = tmp_path / "alloc.txt"
    assert main(["allocate", "--model", "uniform", "--depth", "2", "--out", str(path)]) == 0
    return path


def test_round(tmp_path, capsys):
    out = tmp_path / "r.tab"
    assert main(["round", "--model", "uniform", "--depth", "2", "--schedule", "d=n",
                 "--out", str(out)]) == 0
    assert str(parse_table(out.read_text())["0"]) == "3/2^3"


def test_encode_decode(uniform_alloc, capsys):
    assert main(["encode", "--alloc", str(uniform_alloc), "--target", "0"]) == 0
    assert "code 000" in capsys.readouterr().out
    assert main(["encode", "--alloc", str(uniform_alloc), "--target", "01", "--stream"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "prefix - emitted -"
    assert out[-1].startswith("code ")
    code = out[-1].split()[1]
    assert main(["decode", "--alloc", str(uniform_alloc), "--code", code, "--len", "2"]) == 0
    assert capsys.readouterr().out == "output 01\n"
    assert main(["decode", "--alloc", str(uniform_alloc), "--code", "11111", "--len", "2"]) == 1
    assert "underdetermined" in capsys.readouterr().out


def test_code_files(uniform_alloc, tmp_path, capsys):
    f = tmp_path / "code.bin"
    assert main(["encode", "--alloc", str(uniform_alloc), "--target", "10", "--out", str(f)]) == 0
    capsys.readouterr()
    assert main(["decode", "--alloc", str(uniform_alloc), "--code-file", str(f), "--len", "2"]) == 0
    assert capsys.readouterr().out == "output 10\n"


def test_verify(uniform_alloc, capsys):
    assert main(["verify", "--alloc", str(uniform_alloc), "--level", "exhaustive"]) == 0
    out = capsys.readouterr().out
    assert "bit_budget true" in out and "round_trip true" in out


def test_witness(uniform_alloc, tmp_path, capsys):
    test = tmp_path / "t.txt"
    test.write_text("depth 5\n00000 1\n11111 1/2^1\n")
    assert main(["witness", "--alloc", str(uniform_alloc), "--alpha", "01",
                 "--test", str(test), "--bound", "1/2^0"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 4 and lines[0].startswith("prefix - leaf 00001 test 0/2^")
    limit = lines[-1].split()[1]
    assert main(["decode", "--alloc", str(uniform_alloc), "--code", limit, "--len", "2"]) == 0
    assert capsys.readouterr().out == "output 01\n"


def test_pipeline_and_errors(tmp_path, capsys):
    assert main(["pipeline", "--model", "bernoulli 3/2^2", "--depth", "6",
                 "--schedule", "budget=2", "--out", str(tmp_path / "o")]) == 0
    assert "status ok" in capsys.readouterr().out
    assert main(["pipeline", "--model", "uniform", "--depth", "2", "--schedule", "d=9,1,1"]) == 2
    assert "stage allocate: ScheduleNotMonotone" in capsys.readouterr().err
    assert main(["round", "--model", "kind bogus", "--depth", "2"]) == 2


def test_compress_decompress(tmp_path, capsys):
    alloc = tmp_path / "a.txt"
    assert main(["allocate", "--model", "bernoulli 7/2^3", "--depth", "8",
                 "--schedule", "budget=2", "--out", str(alloc)]) == 0
    src = tmp_path / "in.bin"
    src.write_bytes(b"\xf7")
    code = tmp_path / "c.bin"
    assert main(["compress", "--alloc", str(alloc), "--input", str(src), "--out", str(code),
                 "--report", str(tmp_path / "rep.txt")]) == 0
    assert "status ok" in (tmp_path / "rep.txt").read_text()
    back = tmp_path / "back.bin"
    assert main(["decompress", "--alloc", str(alloc), "--code", str(code), "--len", "8",
                 "--out", str(back)]) == 0
    assert back.read_bytes() == b"\xf7"
    assert main(["compress", "--alloc", str(alloc), "--bits", "011", "--out", str(code)]) == 0
    capsys.readouterr()
    assert main(["decompress", "--alloc", str(alloc), "--code", str(code), "--len", "3"]) == 0
    assert capsys.readouterr().out == "output 011\n"


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "semialloc", "--help"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "pipeline" in r.stdout
