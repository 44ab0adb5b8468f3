from __future__ import annotations

import json
import subprocess
import sys

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempcomb import __version__
from tempcomb.cli import main, run
from tempcomb.dsl import parse_manifest, parse_relation_ref
from tempcomb.errors import LookupFailure, ParseError
from tempcomb.library import builtin
from tempcomb.solvers import CombinedInstance, Instance

MANIFEST = """\
# two structures and two instances
structure A {
  rel Lt/2 := x1 < x2;
  rel Mix := @Rmix;
  rel Neg := @-Rmix;
}
structure B { rel Lt/2 := x1 < x2; rel Le/2 := x1 <= x2 }
instance I over A { Mix(x, y, z); Lt(x, y); x = z; }
instance J over A, B { A.Lt(x, y); B.Lt(y, x); B.x = y; }
instance K over A { Mix(x, y, z); Lt(x, y); }
instance U over A { Lt(x, y); Lt(y, x); }
"""


@pytest.fixture
def manifest_file(tmp_path):
    path = tmp_path / "m.tc"
    path.write_text(MANIFEST, encoding="utf-8")
    return str(path)


def test_parse_structures():
    m = parse_manifest(MANIFEST)
    a = m.structure("A")
    assert a["Lt"].orbits == {(0, 1)}
    assert a["Mix"].orbits == builtin("Rmix").orbits
    assert a["Neg"].orbits == builtin("Rmix").dual().orbits
    cnf = parse_manifest("structure C { rel R/3 := (x1>=x2 | x1>x3) & (x2>=x1 | x2>x3) }")
    assert cnf.structure("C")["R"].orbits == builtin("Rmix").orbits


def test_parse_instances():
    m = parse_manifest(MANIFEST)
    single = m.instance("I")
    assert isinstance(single, Instance) and single.variables == ("x", "y", "z")
    combined = m.instance("J")
    assert isinstance(combined, CombinedInstance) and combined.variables == ("x", "y")
    assert combined.side2 == (("Lt", ("y", "x")), ("=", ("x", "y")))
    two = parse_manifest("structure A { rel Lt/2 := x1 < x2 } structure B { rel Lt/2 := x1 < x2 }"
                         "instance I over A,B { A.Lt(x,y); B.Lt(y,x); }")
    assert len(two.instance("I").variables) == 2


def test_roundtrip():
    m = parse_manifest(MANIFEST)
    text = m.serialize()
    again = parse_manifest(text)
    assert again == m
    assert again.serialize() == text


rel_bodies = st.sampled_from(["x1 < x2", "x1 <= x2 | x2 != x1", "(x1 < x2 | x2 = x1) & x1 != x2", "false", "true"])


@given(st.lists(rel_bodies, min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_roundtrip_generated(bodies):
    rels = "".join(f"rel R{i}/2 := {b}; " for i, b in enumerate(bodies))
    m = parse_manifest(f"structure S {{ {rels}}}\ninstance I over S {{ R0(a, b); a = b; }}")
    assert parse_manifest(m.serialize()) == m


@pytest.mark.parametrize("text, line, col", [
    ("structure A { rel Lt/2 := x1 < x3 }", 1, 32),
    ("structure A {\n  rel Lt/2 := x1 <\n}", 3, 1),
    ("structure A { rel Lt := x1 < x2 }", 1, 19),
    ("structure A { rel M/2 := @Rmix }", 1, 27),
    ("structure A { rel M := @Nope }", 1, 25),
    ("structure A { rel Lt/2 := x1 < x2 }\ninstance I over A { Lt(x, y, z); }", 2, 21),
    ("structure A { rel Lt/2 := x1 < x2 }\ninstance I over A { Gt(x, y); }", 2, 21),
    ("structure A { rel Lt/2 := x1 < x2 }\ninstance I over A, A { Lt(x, y); }", 2, 10),
    ("structure A { rel Lt/2 := x1 < x2 }\nstructure B { rel Lt/2 := x1 < x2 }\n"
     "instance I over A, B { Lt(x, y); }", 3, 24),
    ("thing A {}", 1, 1),
])
def test_error_positions(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_manifest(text)
    assert (info.value.line, info.value.column) == (line, col)


def test_relation_refs():
    m = parse_manifest(MANIFEST)
    assert parse_relation_ref("@Rmix") == builtin("Rmix")
    assert parse_relation_ref("A.Lt", m).orbits == {(0, 1)}
    assert parse_relation_ref("3: x1 = x2 | x3 < x1").arity == 3
    with pytest.raises(LookupFailure):
        parse_relation_ref("A.Nope", m)
    with pytest.raises(ParseError):
        parse_relation_ref("garbage")


# ------------------------------------------------------------------ commands

def test_report_header():
    status, report = run(["poly-check", "--op", "mix", "--rel", "@Rmix", "--seed", "7"])
    assert status == 0
    assert report["tool"] == "tempcomb" and report["version"] == __version__
    assert report["seed"] == 7 and report["caps"]["arity"] == 6 and report["caps"]["oracle"] == 8
    assert report["result"]["preserved"] is True


def test_classify_betweenness():
    status, report = run(["classify", "--structure", "@Betw"])
    assert status == 0
    verdict = report["result"]["verdict"]
    assert verdict["label"] == "NP-complete"
    assert len(verdict["witnesses"]) == 9


def test_negative_poly_check():
    status, report = run(["poly-check", "--op", "lex", "--rel", "@Rmix"])
    assert status == 1
    assert report["result"]["violation"]["image"] == [0, 1, 2]


def test_extract_rmix_command():
    status, report = run(["extract-rmix", "--structure", "@X"])
    assert status == 0
    assert report["result"]["formula"] == "∃h (X(z,z,h) ∧ X(x,y,h))"
    assert report["result"]["validated"] is True


def test_solve_commands(manifest_file):
    status, report = run(["solve", manifest_file, "--instance", "K"])
    assert status == 0 and report["result"]["witness"] == [1, 2, 0]
    status, report = run(["solve", manifest_file, "--instance", "U"])
    assert status == 1 and report["result"]["sat"] is False
    status, report = run(["solve", manifest_file, "--instance", "I"])
    assert status == 1
    status, report = run(["solve-comb", manifest_file, "--instance", "J"])
    assert status == 1


def test_combine_command(tmp_path):
    text = ("structure A { rel Lt/2 := x1 < x2; rel Le/2 := x1 <= x2 }\n"
            "structure B { rel Lt/2 := x1 < x2; rel Le/2 := x1 <= x2 }\n"
            "instance N over A, B { A.Le(x, y); A.Le(y, x); B.Lt(x, z); B.Lt(z, y); }\n")
    path = tmp_path / "n.tc"
    path.write_text(text, encoding="utf-8")
    status, report = run(["combine", str(path), "--instance", "N"])
    assert status == 1
    result = report["result"]
    assert result["sat"] is False
    assert result["merges"][0] == ["x", "y"]
    assert result["solver_calls"] <= 2 * 3 ** 3


def test_misc_commands():
    assert run(["ppdef-search", "--structure", "@T3", "--target", "@<="])[1]["result"]["formula"] == "∃z. T3(x,y,z)"
    assert run(["ppdef-search", "--structure", "@!=", "--target", "@<"])[0] == 1
    status, report = run(["normal-form", "--form", "min", "--rel", "@Rmix"])
    assert status == 0 and report["result"]["cnf"]
    assert run(["normal-form", "--form", "min", "--rel", "@Betw"])[0] == 1
    status, report = run(["cross-prevention", "--structure", "@<", "--formula", "u < x & y < v"])
    assert status == 0 and report["result"]["prevents_crosses"] is True
    assert run(["cross-prevention", "--structure", "@<=", "--formula", "u <= x & y <= v"])[0] == 1


def test_classify_comb_command(manifest_file):
    status, report = run(["classify-comb", manifest_file, "--structures", "A", "B"])
    assert status == 0
    assert report["result"]["verdict"]["label"] == "NP-complete"


def test_errors_carry_module(manifest_file, tmp_path):
    status, report = run(["solve", manifest_file, "--instance", "Missing"])
    assert status == 2 and report["error"]["module"] == "order-core"
    bad = tmp_path / "bad.tc"
    bad.write_text("structure A { rel Lt/2 := x1 < }", encoding="utf-8")
    status, report = run(["classify", str(bad), "--structure", "A"])
    assert status == 2
    assert report["error"]["module"] == "cli" and report["error"]["type"] == "ParseError"
    status, report = run(["poly-check", "--op", "nope", "--rel", "@Rmix"])
    assert status == 2
    status, report = run(["classify", str(tmp_path / "absent.tc"), "--structure", "A"])
    assert status == 2


def test_reports_are_byte_stable(manifest_file, tmp_path, capsys):
    outs = []
    for i in range(2):
        out = tmp_path / f"r{i}.json"
        main(["combine", manifest_file, "--instance", "J", "--seed", "3", "--out", str(out)])
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    json.loads(outs[0])


def test_console_entry_point(manifest_file):
    proc = subprocess.run([sys.executable, "-m", "tempcomb.cli", "solve", manifest_file, "--instance", "K"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["sat"] is True


def test_time_budget():
    status, report = run(["ppdef-search", "--structure", "@!=", "--target", "@<",
                          "--max-bound", "3", "--max-atoms", "6", "--time-budget", "0.01"])
    assert status in (1, 2)
    if status == 2:
        assert report["error"]["type"] == "ResourceError"
