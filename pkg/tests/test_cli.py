import subprocess
import sys

import pytest

from spinlat.cli import main, parse_block, parse_grid, read_manifest
from spinlat.errors import InvalidArgument
from spinlat.lattice import ladder_on_circle
from spinlat.sweep import SweepTable


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enum_count(capsys):
    assert run(capsys, "enum", "--n", "6", "--planar", "--count-only")[:2] == (0, "1\n")
    assert run(capsys, "enum", "--n", "6", "--count-only")[:2] == (0, "2\n")


def test_frustration(capsys):
    code, out, _ = run(capsys, "frustration", "--graph", "ladder:18")
    assert code == 0 and "min_violations=2" in out.splitlines()
    code, out, _ = run(capsys, "frustration", "--graph", "ladder:16")
    assert "min_violations=0" in out and "classical_degeneracy=2" in out


def test_gen_forms(capsys):
    a = run(capsys, "gen", "ladder", "--n", "8")[1]
    b = run(capsys, "gen", "--graph", "ladder:8")[1]
    assert a == b and a.startswith("graph ladder8\nn=8\n")


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", "--graph", "ladder:8", "--gamma", "1.5", "--k", "3")
    kv = dict(line.split("=", 1) for line in out.splitlines())
    assert code == 0 and len(kv["eigenvalues"].split()) == 3
    assert kv["block"] == "0 1 2 3" and float(kv["delta13"]) > 0


def test_sweep_rows_and_manifest(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "sweep", "--graph", "ladder:8", "--b", "1", "--gamma", "3:0:0.05", "--k", "4",
                     "--block", "ring:inner", "-o", str(out), "--workers", "1")
    assert code == 0
    t = SweepTable.from_csv(out.read_text())
    assert len(t) == 61
    man = (tmp_path / "s.csv.manifest").read_text()
    assert "command=sweep" in man and "config.seed=0" in man and "wall_time_s=" in man
    assert read_manifest(tmp_path / "s.csv.manifest").gamma == "3:0:0.05"


def test_replay_is_byte_identical(tmp_path, capsys):
    out = tmp_path / "a.csv"
    run(capsys, "ensemble", "--graph", "enum:8:planar", "--gamma", "2:0.5:0.5", "--seed", "3", "-o", str(out),
        "--workers", "1")
    again = tmp_path / "b.csv"
    assert run(capsys, "replay", str(tmp_path / "a.csv.manifest"), "-o", str(again))[0] == 0
    assert out.read_bytes() == again.read_bytes()


def test_exit_codes(capsys):
    assert run(capsys, "sweep", "--graph", "nope:3")[0] == 2
    assert run(capsys, "solve", "--graph", "ladder:8", "--gamma", "1", "--block", "0,9")[0] == 2
    assert run(capsys, "sweep", "--graph", "ladder:8", "--gamma", "1:0:0.3")[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["solve", "--graph", "ladder:8"])
    assert e.value.code == 1
    assert "--gamma" in capsys.readouterr().err
    with pytest.raises(SystemExit) as e:
        main(["bogus"])
    assert e.value.code == 1
    assert len(capsys.readouterr().err.strip().splitlines()) == 1
    code, _, err = run(capsys, "solve", "--graph", "ladder:12", "--gamma", "1.0", "--tol", "1e-30")
    assert code == 3 and len(err.strip().splitlines()) == 1


def test_budget_exit_code(capsys, monkeypatch):
    monkeypatch.delenv("SPINLAT_BUDGET_OVERRIDE", raising=False)
    assert run(capsys, "enum", "--n", "16", "--count-only")[0] == 3


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "spinlat.cli", "enum", "--n", "4", "--count-only"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "1\n"


def test_parsers():
    assert list(parse_grid("0:1:0.5")) == [0, 0.5, 1]
    assert list(parse_grid("1.5, 1.0")) == [1.5, 1.0]
    with pytest.raises(InvalidArgument):
        parse_grid("a:b:c")
    g = ladder_on_circle(8)
    assert parse_block("ring:outer", g) == (4, 5, 6, 7)
    assert parse_block("2,0", g) == (0, 2)
    assert len(parse_block("random:3", g)) == 4


def test_figure_flag(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    fig = tmp_path / "f.png"
    code, _, _ = run(capsys, "sweep", "--graph", "ladder:8", "--gamma", "2:0.5:0.5", "-o", str(tmp_path / "s.csv"),
                     "--figure", str(fig))
    assert code == 0 and fig.read_bytes()[:4] == b"\x89PNG"
