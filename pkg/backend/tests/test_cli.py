import json

import pytest

from app.cli import main
from app.models.structeq import parse_manifold


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_validate_human(capsys):
    code, out, _ = run(capsys, "validate", "builtin:iwasawa")
    assert code == 0
    assert out.startswith("valid: n=3")
    assert "parallelisable" in out
    assert "d phi3 = - phi1 ^ phi2" in out


def test_validate_json(capsys):
    code, out, _ = run(capsys, "validate", "builtin:iwasawa", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == 1
    assert data["invariant_level"] is True
    assert data["flags"]["parallelisable"] is True


def test_validate_file(capsys, examples_dir):
    code, out, _ = run(capsys, "validate", str(examples_dir / "kodaira_thurston.nil"))
    assert code == 0
    assert "parallelisable" not in out


def test_invalid_input_exit_code(capsys, examples_dir):
    code, out, err = run(capsys, "validate", str(examples_dir / "not_integrable.nil"))
    assert code == 1
    assert out == ""
    assert "error [NOT_INTEGRABLE]" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "cohomology", str(tmp_path / "nothing.nil"))
    assert code == 1
    assert "NOT_FOUND" in err


def test_parse_error_is_positioned(capsys, tmp_path):
    path = tmp_path / "bad.nil"
    path.write_text("dim 2\nd phi1 = 0\nd phi2 = phi1 $ phi2\n")
    code, _, err = run(capsys, "validate", str(path))
    assert code == 1
    assert "line 3, column 15" in err


def test_cohomology_derham(capsys):
    code, out, _ = run(capsys, "cohomology", "builtin:iwasawa", "--theory", "derham")
    assert code == 0
    assert "derham: b = (1, 4, 8, 10, 8, 4, 1)" in out


def test_cohomology_json_lists_every_theory(capsys):
    code, out, _ = run(capsys, "cohomology", "builtin:torus2", "--json")
    assert code == 0
    assert out.count('"schema": 1') == 3


def test_frolicher_json(capsys):
    code, out, _ = run(capsys, "frolicher", "builtin:iwasawa", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["degeneration_page"] == 2
    assert data["degenerates_at_e1"] is False


def test_ddbar(capsys):
    code, out, _ = run(capsys, "ddbar", "builtin:iwasawa")
    assert code == 0
    assert out.startswith("ddbar-lemma: fails")


def test_metrics_subset(capsys):
    code, out, _ = run(capsys, "metrics", "builtin:torus2", "--which", "kahler", "--budget", "2000", "--json")
    assert code == 0
    data = json.loads(out)
    assert [r["kind"] for r in data["reports"]] == ["kahler"]
    assert data["reports"][0]["verdict"] == "witness"
    assert data["reports"][0]["search_stats"]["seed"] == 42


def test_kuranishi_json(capsys):
    code, out, _ = run(capsys, "kuranishi", "builtin:iwasawa", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["r"] == 2
    assert data["tangent_h01_dim"] == 6
    assert data["degree"] == 2
    assert data["obstructed"] is False


def test_deform_emits_structure(capsys, tmp_path, examples_dir):
    target = tmp_path / "fibre.nil"
    code, out, _ = run(capsys, "deform", "builtin:iwasawa", "--psi", "builtin:iwasawa",
                       "--at", "t12=1/10", "--emit", str(target))
    assert code == 0
    expected = parse_manifold((examples_dir / "ab_fiber_0.1.nil").read_text())
    assert parse_manifold(target.read_text()).d_table == expected.d_table
    assert "d phi3 =" in out


def test_deform_broken_integrability_exit_code(capsys, tmp_path):
    psi = tmp_path / "first_order.vf"
    psi.write_text("dim 3\nparams t11 t22\ntheta1 = t11 * conj(phi1)\ntheta2 = t22 * conj(phi2)\n")
    code, _, err = run(capsys, "deform", "builtin:iwasawa", "--psi", str(psi), "--at", "t11=1/2,t22=1/2")
    assert code == 2
    assert "INTEGRABILITY_BROKEN" in err


def test_family(capsys):
    code, out, _ = run(capsys, "family", "builtin:iwasawa", "--psi", "builtin:iwasawa",
                       "--points", "t12=1/10;t11=1", "--budget", "2000", "--json")
    assert code == 0
    data = json.loads(out)
    assert [p["ok"] for p in data["points"]] == [True, False]
    assert data["points"][1]["error_code"] == "NOT_INVERTIBLE"


def test_example_list(capsys):
    code, out, _ = run(capsys, "example", "--list")
    assert code == 0
    assert "iwasawa: " in out
    assert "iwasawa_ab(<t>): " in out


def test_example_unknown(capsys):
    code, _, err = run(capsys, "example", "klein_bottle")
    assert code == 1
    assert "UNKNOWN_BUILTIN" in err


def test_missing_required_option():
    with pytest.raises(SystemExit):
        main(["deform", "builtin:iwasawa"])


def test_report_summary_line(capsys):
    code, out, _ = run(capsys, "report", "builtin:torus2", "--budget", "2000")
    assert code == 0
    assert "b = (1, 4, 6, 4, 1)" in out
    assert "∂∂̄: YES | E1-degeneration: YES" in out


def test_report_json(capsys):
    code, out, _ = run(capsys, "report", "builtin:iwasawa", "--budget", "2000", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == 1
    assert data["euler_characteristic"] == 0
    assert data["kuranishi"]["r"] == 2
    assert set(data["timings"]) >= {"validate", "derham", "metrics"}


def test_frolicher_max_page(capsys):
    code, out, _ = run(capsys, "frolicher", "builtin:iwasawa", "--max-page", "3", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["degeneration_page"] == 2

    code, out, _ = run(capsys, "frolicher", "builtin:iwasawa", "--max-page", "1", "--json")
    assert code == 0
    data = json.loads(out)
    assert len(data["pages"]) == 1
    assert data["degeneration_page"] is None


def test_kuranishi_reports_dolbeault_h01(capsys):
    code, out, _ = run(capsys, "kuranishi", "builtin:iwasawa")
    assert code == 0
    assert "r = 2" in out
    assert "h01 = 2" in out
