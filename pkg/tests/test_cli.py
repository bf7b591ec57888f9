"""CLI behaviour: reports are deterministic and exit codes conform.

For every command there is a passing example document under
docs/cli_examples; failing variants are built here by perturbing one
structure function (where a mathematically failing input exists: the
Cartan identities and the bracket extraction round trip are theorems, so
those commands only get pass + malformed cases)."""

import copy
import json
import subprocess
import sys
from pathlib import Path

import pytest

from zgraded.cli import main

EXAMPLES = Path(__file__).resolve().parent.parent / "docs" / "cli_examples"

PASS_CASES = [
    (["check", "q2"], "so3_q2.json"),
    (["check", "linfty"], "so3_linfty.json"),
    (["build", "q"], "tm1_build_q.json"),
    (["extract", "brackets"], "so3_extract.json"),
    (["check", "lie2"], "abelian2_lie2.json"),
    (["build", "adjoint"], "tm1_adjoint.json"),
    (["check", "rep3"], "so3_rep3.json"),
    (["check", "morphism"], "so3_morphism.json"),
    (["check", "poisson"], "darboux_poisson.json"),
    (["check", "pq"], "kk_pq.json"),
    (["check", "poisson-weil"], "kk_pq.json"),
    (["classify", "homotopy"], "classify_pq.json"),
    (["check", "deformation"], "deformation.json"),
    (["check", "courant"], "so3_courant.json"),
    (["realize", "courant-point"], "so3_courant.json"),
    (["build", "split-symplectic"], "tm_courant_split.json"),
    (["suite", "cartan"], "cartan_suite.json"),
    (["suite", "bicomplex"], "so3_bicomplex.json"),
    (["tangent-prolong"], "tm1_prolong.json"),
    (["is-exact"], "so3_exact.json"),
]


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out + captured.err


def mutate_fail(cmd, doc):
    """Turn a passing document into one with a nonzero residual; returns
    None when no valid failing input exists for the command."""
    doc = copy.deepcopy(doc)
    key = tuple(cmd)
    if key in {("check", "q2"), ("suite", "bicomplex")}:
        doc["q"]["e1"] = "-e2*e3 + e1*e2"
        return doc
    if key == ("check", "linfty"):
        doc["brackets"][0]["value"] = {"e3": "1", "e2": "1"}
        return doc
    if key == ("build", "q"):
        doc["bundles"] = [{"name": "g", "degree": 1, "frame": ["e1", "e2", "e3"]}]
        doc["base_vars"] = []
        doc["anchor"] = {}
        doc["brackets"] = [{"args": ["e1", "e2"], "value": {"e3": "1", "e2": "1"}},
                           {"args": ["e2", "e3"], "value": {"e1": "1"}},
                           {"args": ["e3", "e1"], "value": {"e2": "1"}}]
        return doc
    if key == ("check", "lie2"):
        doc["lie2"]["q_frame"] = ["q1", "q2", "q3"]
        doc["lie2"]["bracket"] = [
            {"args": ["q1", "q2"], "value": {"q3": "1", "q2": "1"}},
            {"args": ["q2", "q3"], "value": {"q1": "1"}},
            {"args": ["q3", "q1"], "value": {"q2": "1"}},
        ]
        return doc
    if key == ("build", "adjoint"):
        doc["lie2"]["bracket"] = [{"args": ["al", "al"], "value": {}}]
        doc["lie2"]["q_frame"] = ["al", "al2"]
        doc["lie2"]["bracket"] = [{"args": ["al", "al2"], "value": {"al": "x"}}]
        doc["conn_q"] = {"x": {"al": ["x", "0"], "al2": ["0", "0"]}}
        return doc
    if key == ("check", "rep3"):
        doc["rep"]["conn"] = [{"level": 2, "q": "e1", "src": 0, "value": ["1"]}]
        return doc
    if key == ("check", "morphism"):
        doc["rep_b"]["conn"] = [{"level": 2, "q": "e1", "src": 0, "value": ["1"]}]
        return doc
    if key == ("check", "poisson"):
        # {x,y} = z, {y,z} = y fails Jacobi: {x,{y,z}} = z != 0 residual
        doc["base_vars"] = ["x", "y", "z"]
        doc["pi"] = "-z*p_x*p_y - y*p_y*p_z"
        return doc
    if key in {("check", "pq"), ("check", "poisson-weil")}:
        doc["pi"] = doc["pi"] + " + x1*p_th1*p_x2"
        return doc
    if key == ("classify", "homotopy"):
        doc["base_vars"] = []
        doc["bundles"] = [{"name": "g", "degree": 1, "frame": ["e1", "e2", "e3"]}]
        doc["k"] = -1
        doc["theta"] = "-e2*e3*p_e1 - e3*e1*p_e2 - e1*e2*p_e3 + e1*e2*p_e2"
        return doc
    if key == ("check", "deformation"):
        # a non-Poisson bivector deformation of the zero pair: the
        # Maurer-Cartan bivector slot picks up [Lambda,Lambda]/2 != 0
        doc["base_vars"] = ["x", "y", "z"]
        doc["q"] = {}
        doc["pi"] = "0"
        doc["theta_prime"] = "-z*p_x*p_y - y*p_y*p_z"
        doc["mode"] = "full"
        return doc
    if key in {("check", "courant"), ("realize", "courant-point"),
               ("build", "split-symplectic")}:
        block = doc["courant"]
        if not block["bracket"]:
            block["bracket"] = [{"args": ["X", "W"], "value": {"X": "1"}}]
        else:
            block["bracket"][0]["value"] = {"e3": "1", "e2": "1"}
        return doc
    if key == ("is-exact",):
        doc["eta"] = "e1*e2*e3"
        return doc
    return None


@pytest.mark.parametrize("cmd,fname", PASS_CASES, ids=lambda v: v if isinstance(v, str) else " ".join(v))
def test_pass_fail_malformed(cmd, fname, tmp_path, capsys):
    src = EXAMPLES / fname
    doc = json.loads(src.read_text())

    code, out1 = run_cli(cmd + [str(src), "--json"], capsys)
    assert code == 0, out1
    code, out2 = run_cli(cmd + [str(src), "--json"], capsys)
    assert code == 0
    assert out1 == out2  # byte-identical reports

    fail_doc = mutate_fail(cmd, doc)
    if fail_doc is not None:
        bad = tmp_path / f"fail_{fname}"
        bad.write_text(json.dumps(fail_doc))
        code, out = run_cli(cmd + [str(bad), "--json"], capsys)
        assert code == 1, f"expected failing exit, got {code}: {out[-400:]}"

    broken = tmp_path / f"broken_{fname}"
    broken.write_text("{ not json")
    assert run_cli(cmd + [str(broken)], capsys)[0] == 2
    # structurally invalid: base_vars must be a list of names, and the
    # commands with required sections miss them entirely
    mangled = tmp_path / f"mangled_{fname}"
    mangled.write_text(json.dumps({"format": 1, "base_vars": 17}))
    assert run_cli(cmd + [str(mangled)], capsys)[0] == 2


@pytest.mark.parametrize("cmd,fname", PASS_CASES[:5],
                         ids=lambda v: v if isinstance(v, str) else " ".join(v))
def test_subprocess_determinism(cmd, fname):
    src = EXAMPLES / fname
    runs = []
    for _ in range(2):
        proc = subprocess.run(
            [sys.executable, "-m", "zgraded.cli"] + cmd + [str(src), "--json"],
            capture_output=True, text=True, cwd=str(EXAMPLES.parent.parent),
        )
        assert proc.returncode == 0, proc.stderr
        runs.append(proc.stdout)
    assert runs[0] == runs[1]


def test_wrong_format_version(tmp_path, capsys):
    doc = tmp_path / "v2.json"
    doc.write_text(json.dumps({"format": 2}))
    assert run_cli(["check", "q2", str(doc)], capsys)[0] == 2


def test_parse_error_offset_reported(tmp_path, capsys):
    doc = tmp_path / "bad_expr.json"
    doc.write_text(json.dumps({
        "format": 1,
        "base_vars": [],
        "bundles": [{"name": "g", "degree": 1, "frame": ["e1"]}],
        "q": {"e1": "e1 * "},
    }))
    code = main(["check", "q2", str(doc)])
    captured = capsys.readouterr()
    assert code == 2
    assert "offset" in captured.err
