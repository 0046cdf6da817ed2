from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from margulis.cli import main
from margulis.errors import MalformedGroupFile
from margulis.serialize import (
    dumps_group,
    dumps_spectrum,
    loads_group,
    loads_spectrum,
    read_group,
)
from margulis.spectrum import marked_spectrum

from conftest import schottky_deformation


def run(*args):
    return main([str(a) for a in args])


@pytest.fixture
def group_a(tmp_path):
    path = tmp_path / "a.json"
    assert run("generate", "--rank", 2, "--seed", 42, "--out", path) == 0
    return path


def test_group_round_trip_exact():
    p = schottky_deformation(13, 3)
    q, meta = loads_group(dumps_group(p, seed=13, description="x"))
    for a, b in zip(p.gens, q.gens):
        np.testing.assert_array_equal(a.linear.m, b.linear.m)
        np.testing.assert_array_equal(a.trans, b.trans)
    assert meta == {"seed": 13, "description": "x"}


def test_generate_round_trip(group_a, tmp_path):
    p, meta = read_group(group_a)
    assert meta["seed"] == 42
    assert dumps_group(p, seed=42, description=meta["description"]) == group_a.read_text()


def test_generate_deterministic(tmp_path, group_a):
    other = tmp_path / "again.json"
    run("generate", "--rank", 2, "--seed", 42, "--out", other)
    assert other.read_bytes() == group_a.read_bytes()


def test_generate_zero_cocycle_warns(tmp_path, capsys):
    path = tmp_path / "z.json"
    assert run("generate", "--cocycle-scale", 0, "--out", path) == 0
    assert "radiant" in capsys.readouterr().err
    p, _ = read_group(path)
    assert all(np.all(g.trans == 0) for g in p.gens)


def test_spectrum_zero_cocycle(tmp_path):
    z = tmp_path / "z.json"
    run("generate", "--cocycle-scale", 0, "--out", z)
    out = tmp_path / "s.tsv"
    assert run("spectrum", z, "--max-len", 2, "--out", out) == 0
    rows = loads_spectrum(out.read_text())
    assert all(a == 0 for _, a, _ in rows)


def test_spectrum_rows(group_a, tmp_path):
    out = tmp_path / "s.tsv"
    run("spectrum", group_a, "--max-len", 1, "--out", out)
    lines = out.read_text().splitlines()
    assert lines[0] == "word\talpha\tskipped"
    assert len(lines) == 5


def test_spectrum_of_conjugate(group_a, tmp_path):
    b = tmp_path / "b.json"
    run("conjugate", group_a, "--seed", 3, "--out", b)
    sa, sb = tmp_path / "a.tsv", tmp_path / "b.tsv"
    run("spectrum", group_a, "--out", sa)
    run("spectrum", b, "--out", sb)
    ra, rb = loads_spectrum(sa.read_text()), loads_spectrum(sb.read_text())
    assert [w for w, _, _ in ra] == [w for w, _, _ in rb]
    np.testing.assert_allclose([a for _, a, _ in ra], [a for _, a, _ in rb], atol=1e-8)


def test_spectrum_tsv_round_trip():
    s = marked_spectrum(schottky_deformation(2), 2)
    rows = loads_spectrum(dumps_spectrum(s))
    assert [a for _, a, _ in rows] == list(s.alphas())


@pytest.mark.parametrize("text", [
    "not json",
    "{}",
    json.dumps({"schema_version": 1, "generators": []}),
    json.dumps({"schema_version": 1, "generators": [{"linear": [1] * 9, "trans": [0, 0, 0]}],
                "orders": [None]}),
    json.dumps({"schema_version": 1, "generators": [{"linear": [1, 0, 0, 0, 1, 0, 0, 0, 1],
                                                     "trans": [0, 0]}], "orders": [None]}),
])
def test_malformed_group_files(text, tmp_path):
    with pytest.raises(MalformedGroupFile):
        loads_group(text)
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert run("spectrum", path) == 2


def test_reconstruct_exit_codes(group_a, tmp_path, capsys):
    b = tmp_path / "b.json"
    c = tmp_path / "c.json"
    run("conjugate", group_a, "--seed", 1, "--orientation-reversing", "--out", b)
    run("conjugate", group_a, "--seed", 2, "--perturb", "translation", "--out", c)
    assert run("reconstruct", group_a, b) == 0
    assert "verdict: conjugate" in capsys.readouterr().out
    assert run("reconstruct", group_a, c, "--format", "json") == 1
    cert = json.loads(capsys.readouterr().out)
    assert cert["verdict"] == "mismatch" and cert["witness"]
    assert run("reconstruct", group_a, group_a, "--format", "json") == 0
    cert = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(cert["f"], np.eye(3).ravel(), atol=1e-10)
    np.testing.assert_allclose(cert["tau"], 0, atol=1e-10)


def test_reconstruct_radiant_exit(tmp_path, capsys):
    z = tmp_path / "z.json"
    run("generate", "--cocycle-scale", 0, "--out", z)
    assert run("reconstruct", z, z) == 2
    assert "RadiantInput" in capsys.readouterr().err


def test_rank_command(group_a, capsys):
    assert run("rank", group_a, "--format", "json") == 0
    d = json.loads(capsys.readouterr().out)
    assert d["rank"] == d["expected"] == 3


def test_converge_command(tmp_path):
    out = tmp_path / "c.tsv"
    run("converge", "--lam", 0.5, "--n-max", 5, "--out", out)
    rows = [l.split("\t") for l in out.read_text().splitlines()[1:]]
    assert len(rows) == 6
    for r in rows:
        assert float(r[2]) == pytest.approx(float(r[3]), abs=1e-12)
    out2 = tmp_path / "f.tsv"
    run("converge", "--kind", "frames", "--delta", 0.001, "--out", out2)
    _, d_pm, d_0, c_pm, c_0 = map(float, out2.read_text().splitlines()[1].split("\t"))
    assert d_pm == pytest.approx(c_pm, abs=1e-10) and d_0 == pytest.approx(c_0, abs=1e-10)


def test_module_entry_point(group_a):
    r = subprocess.run([sys.executable, "-m", "margulis", "rank", str(group_a)],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "rank: 3" in r.stdout
