import io as stdio
import json
import subprocess
import sys

import pytest

from foldkit.cli import run


def call(*argv):
    out = stdio.StringIO()
    code = run(list(argv) + ["--json"], stdout=out)
    return code, json.loads(out.getvalue())


def test_fold_check_sphere():
    code, rep = call("fold", "check", "--map", "sphere_chart.json")
    assert code == 0 and rep["verdict"] == "IsFold"
    assert all(abs(p[1]) < 1e-8 for p in rep["fold_points"])


def test_template_validate_failure_exit_code():
    code, rep = call("template", "validate", "--template", "halfplane_bad.json")
    assert code == 1 and not rep["checks"]["c"]


def test_compare_identical_bundles():
    code, rep = call("classify", "compare", "bundle_a.json", "bundle_a.json")
    assert code == 0 and rep["verdict"] == "isomorphic"


def test_compare_two_connections_and_different_invariants():
    assert call("classify", "compare", "bundle_a", "bundle_a2")[0] == 0
    assert call("classify", "compare", "bundle_a", "bundle_b")[1]["verdict"] == "not isomorphic"
    assert call("classify", "compare", "bundle_a", "bundle_c")[0] == 1


def test_input_errors_exit_two():
    code, rep = call("template", "validate", "--template", "missing-file.json")
    assert code == 2 and rep["error"]["type"] == "InputError"
    code, rep = call("expr", "eval", "x +* 2")
    assert code == 2 and rep["error"]["type"] == "ExprSyntaxError"
    code, rep = call("template", "render", "--template", "cube.json")
    assert code == 2 and rep["error"]["type"] == "DimensionUnsupported"


def test_geometric_failures_exit_one():
    assert call("form", "verify", "--form", "degenerate_square")[0] == 1
    code, rep = call("form", "solve", "--form", "fold_plane", "--beta", "1;0", "--point", "0,0.3")
    assert code == 1 and rep["error"]["kernel_vector"] == [1.0, 0.0]
    assert call("reduce", "classify", "--form", "counter_form", "--action", "counter_action",
                "--moment", "counter_moment", "--seeds", "counter_seeds")[0] == 1


@pytest.mark.parametrize(
    "argv",
    [
        ["expr", "eval", "x^2 + sin(y)", "--at", "x=3,y=0"],
        ["fold", "factor", "--map", "plane_fold"],
        ["morse", "check", "--f", "s^2/2"],
        ["form", "verify", "--form", "fs3_2"],
        ["form", "verify", "--form", "cylinder"],
        ["form", "solve", "--form", "fold_plane", "--beta", "x1;0", "--point", "0.5,0.3"],
        ["moment", "verify", "--form", "r4_form", "--action", "r4_action", "--moment", "r4_moment"],
        ["reduce", "classify", "--form", "sphere_form", "--action", "sphere_action", "--moment", "sphere_moment",
         "--seeds", "sphere_seeds"],
        ["lattice", "check", "--basis", "[[1,1],[1,2]]"],
        ["template", "validate", "--template", "folded_strip"],
        ["cohom", "h2", "--complex", "octahedron", "--k", "2"],
        ["classify", "c1", "--cocycle", "cocycle_octa"],
        ["classify", "chor", "--bundle", "bundle_a"],
        ["model", "build", "--kind", "canonical", "--bundle", "canonical_bundle"],
        ["model", "build", "--kind", "cotangent", "--n", "2"],
        ["model", "build", "--kind", "coupling", "--form", "fold_plane"],
        ["cut", "check", "--template", "quadrant", "--points", "quadrant_cut"],
        ["cut", "check", "--template", "folded_strip", "--points", "strip_cut"],
    ],
)
def test_commands_pass_on_fixtures(argv):
    code, rep = call(*argv)
    assert code == 0, rep
    assert rep["passed"]


def test_lattice_check_reports_extension():
    code, rep = call("lattice", "check", "--basis", "[[1,1]]")
    assert code == 0 and rep["extension"][0] == [1, 1]
    assert call("lattice", "check", "--basis", "[[2,0],[0,1]]")[0] == 1


def test_reports_are_deterministic():
    a = call("template", "validate", "--template", "inconsistent", "--seed", "3")
    b = call("template", "validate", "--template", "inconsistent", "--seed", "3")
    assert a == b


def test_render_writes_svg(tmp_path):
    out = tmp_path / "strip.svg"
    code = run(["template", "render", "--template", "folded_strip", "--out", str(out)], stdout=stdio.StringIO())
    assert code == 0
    svg = out.read_text()
    assert svg.startswith("<svg") and "stroke-dasharray" in svg
    again = tmp_path / "again.svg"
    run(["template", "render", "--template", "folded_strip", "--out", str(again)], stdout=stdio.StringIO())
    assert again.read_text() == svg


def test_render_quadrant_facets():
    out = stdio.StringIO()
    assert run(["template", "render", "--template", "quadrant"], stdout=out) == 0
    svg = out.getvalue()
    assert svg.count('class="facet"') == 2 and svg.count('class="normal"') == 2
    assert "fold-wall" not in svg


def test_out_file_holds_report(tmp_path):
    out = tmp_path / "r.json"
    run(["cohom", "h2", "--complex", "rp2", "--out", str(out)], stdout=stdio.StringIO())
    assert json.loads(out.read_text())["torsion"] == [2]


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "foldkit.cli", "fold", "check", "--map", "plane_cusp.json"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 1
    assert proc.stdout.startswith("FAIL fold check")
