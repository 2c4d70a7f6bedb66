"""Command line driver: exit codes, reports, determinism."""

import json
import re
from fractions import Fraction

import pytest

from regulab.cli import parse_rational, run
from regulab.report import load_report, validate_report


@pytest.fixture()
def cone_file(tmp_path):
    path = tmp_path / "cone.h3"
    rc = run(
        [
            "generate", "--kind", "bipartite", "--parts", "6,6", "--p", "1/2",
            "--seed", "3", "--out", str(tmp_path / "base.mg"),
        ]
    )
    assert rc == 0
    rc = run(
        [
            "generate", "--kind", "cone", "--base", str(tmp_path / "base.mg"),
            "--apex", "6", "--out", str(path),
        ]
    )
    assert rc == 0
    return path


def test_parse_rational_forms():
    assert parse_rational("1/4") == Fraction(1, 4)
    assert parse_rational("0.25") == Fraction(1, 4)
    assert parse_rational("2**-3") == Fraction(1, 8)
    assert parse_rational("-2") == Fraction(-2)
    from regulab.cli import _ArgError

    with pytest.raises(_ArgError):
        parse_rational("three halves")


def test_usage_errors_exit_one(tmp_path, capsys):
    assert run(["analyze", "--input", str(tmp_path / "missing.h3")]) == 1
    bad = tmp_path / "bad.g"
    bad.write_text("part A 2\ne 0 9\n")
    assert run(["analyze", "--input", str(bad)]) == 1
    assert run(["decompose", "--input", str(bad), "--eta", "x"]) == 1
    capsys.readouterr()


def test_analyze_chain_report(tmp_path, capsys):
    rc = run(["generate", "--kind", "chain", "--parts", "4,4,4", "--seed", "9",
              "--out", str(tmp_path / "c.chain")])
    assert rc == 0
    out = tmp_path / "r.json"
    rc = run(["analyze", "--input", str(tmp_path / "c.chain"), "--mode", "both",
              "--output", str(out)])
    assert rc == 0
    data = load_report(out.read_text())
    validate_report(data)
    assert data["audit"]["fast"]["value"] == data["audit"]["naive"]["value"]
    capsys.readouterr()


def test_analyze_beta_gate(tmp_path, capsys):
    rc = run(["generate", "--kind", "chain", "--parts", "4,4,4", "--seed", "9",
              "--out", str(tmp_path / "c.chain")])
    assert rc == 0
    assert run(["analyze", "--input", str(tmp_path / "c.chain"), "--beta", "1"]) == 0
    assert run(["analyze", "--input", str(tmp_path / "c.chain"),
                "--beta", "1/1000000000"]) == 2
    capsys.readouterr()


def test_decompose_cone_passes(cone_file, tmp_path, capsys):
    out = tmp_path / "dec.json"
    rc = run(["decompose", "--input", str(cone_file), "--eta", "1/4",
              "--psi", "1,1", "--t", "9", "--seed", "42", "--output", str(out)])
    assert rc == 0
    data = load_report(out.read_text())
    validate_report(data)
    assert data["audit"]["passes"] is True
    assert data["profile"]["name"] == "desk"
    assert data["audit"]["convention"] == "ordered-triples"
    capsys.readouterr()


def test_decompose_reports_are_stable(cone_file, tmp_path, capsys):
    args = ["decompose", "--input", str(cone_file), "--eta", "1/4",
            "--psi", "1,1", "--t", "9", "--seed", "42"]
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    assert run(args + ["--output", str(p1)]) == 0
    assert run(args + ["--output", str(p2)]) == 0
    scrub = lambda p: re.sub(r'"runtime_ms": \d+', '"runtime_ms": 0', p.read_text())
    assert scrub(p1) == scrub(p2)
    capsys.readouterr()


def test_paper_profile_refusal_exits_three(cone_file, capsys):
    rc = run(["decompose", "--input", str(cone_file), "--eta", "1/4",
              "--psi", "2**-100,28", "--profile", "paper"])
    assert rc == 3
    err = capsys.readouterr().err
    assert "refus" in err


def test_paper_profile_rejects_overrides(cone_file, capsys):
    rc = run(["decompose", "--input", str(cone_file), "--eta", "1/4",
              "--psi", "1,1", "--profile", "paper", "--max-steps", "5"])
    assert rc == 1
    capsys.readouterr()


def test_graph_decompose(tmp_path, capsys):
    rc = run(["generate", "--kind", "graph", "--n", "20", "--p", "1/10",
              "--seed", "8", "--out", str(tmp_path / "g.g")])
    assert rc == 0
    out = tmp_path / "d.json"
    rc = run(["decompose", "--input", str(tmp_path / "g.g"), "--eps", "1/4",
              "--output", str(out)])
    assert rc == 0
    data = load_report(out.read_text())
    assert data["audit"]["convention"] == "ordered-pairs"
    capsys.readouterr()


def test_cylinder_subcommand(cone_file, tmp_path, capsys):
    out = tmp_path / "cyl.json"
    rc = run(["cylinder", "--input", str(cone_file), "--eta", "1/4",
              "--psi", "1,1", "--output", str(out)])
    assert rc == 0
    data = load_report(out.read_text())
    validate_report(data)
    assert data["audit"]["passes"] is True
    capsys.readouterr()


def test_vc2_subcommand(cone_file, tmp_path, capsys):
    out = tmp_path / "vc2.json"
    rc = run(["vc2", "--input", str(cone_file), "--output", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["vc2"] <= 1
    capsys.readouterr()


def test_vc2_vd_two(tmp_path, capsys):
    rc = run(["generate", "--kind", "vd", "--d", "2", "--out", str(tmp_path / "vd.h3")])
    assert rc == 0
    out = tmp_path / "vc2.json"
    rc = run(["vc2", "--input", str(tmp_path / "vd.h3"), "--output", str(out)])
    assert rc == 0
    data = json.loads(out.read_text())
    assert data["vc2"] == 2 and data["witness"] is not None
    capsys.readouterr()


def test_subset_subcommand(tmp_path, capsys):
    rc = run(["generate", "--kind", "tournament", "--n", "10", "--seed", "5",
              "--out", str(tmp_path / "t.h3")])
    assert rc == 0
    out = tmp_path / "s.json"
    rc = run(["subset", "--input", str(tmp_path / "t.h3"), "--eta", "1/4",
              "--psi", "1,1", "--cylinder-eta", "1/100", "--seed", "2",
              "--output", str(out)])
    assert rc == 0
    data = load_report(out.read_text())
    validate_report(data)
    assert "bucket" in data["audit"]
    assert data["extra"]["vertices"]
    capsys.readouterr()


def test_oracle_check_subcommand(tmp_path, capsys):
    out = tmp_path / "oc.json"
    rc = run(["oracle-check", "--sizes", "3..6", "--cases", "20", "--seed", "7",
              "--output", str(out)])
    assert rc == 0
    data = load_report(out.read_text())
    assert data["audit"]["all_equal"] is True
    assert data["audit"]["mismatches"] == 0
    capsys.readouterr()


def test_threads_env(tmp_path, capsys, monkeypatch):
    rc = run(["generate", "--kind", "graph", "--n", "8", "--seed", "1",
              "--out", str(tmp_path / "g.g")])
    assert rc == 0
    monkeypatch.setenv("REGULAB_THREADS", "4")
    out = tmp_path / "r.json"
    assert run(["analyze", "--input", str(tmp_path / "g.g"), "--output", str(out)]) == 0
    assert load_report(out.read_text())["threads"] == 4
    capsys.readouterr()


def test_generate_kinds_load_back(tmp_path, capsys):
    from regulab.core import (
        load_chain,
        load_graph,
        load_multipartite,
        load_partite_3graph,
        load_three_graph,
    )

    cases = [
        (["--kind", "vd", "--d", "2"], load_partite_3graph),
        (["--kind", "fd", "--d", "2"], load_multipartite),
        (["--kind", "link", "--parts", "4,4,4", "--seed", "1"], load_partite_3graph),
        (["--kind", "tournament", "--n", "8", "--seed", "1"], load_three_graph),
        (["--kind", "partite3", "--parts", "3,3,3", "--seed", "1"], load_partite_3graph),
        (["--kind", "bipartite", "--parts", "4,4", "--seed", "1"], load_multipartite),
        (["--kind", "graph", "--n", "8", "--seed", "1"], load_graph),
        (["--kind", "half", "--n", "6"], load_multipartite),
        (["--kind", "multipartite", "--parts", "3,3,3", "--seed", "1"], load_multipartite),
        (["--kind", "chain", "--parts", "3,3,3", "--seed", "1"], load_chain),
    ]
    for i, (flags, loader) in enumerate(cases):
        path = tmp_path / f"out{i}.txt"
        assert run(["generate"] + flags + ["--out", str(path)]) == 0
        loader(path.read_text())
    capsys.readouterr()
