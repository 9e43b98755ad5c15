import pytest

from app.core.exceptions import FormException, ParseException, StructureException
from app.core.scalars import ParamPoly
from app.models.exterior import Form, phi, phibar
from app.services import cohomology
from app.services.kuranishi import (
    VectorForm, bianchi_check, count_closed_oneforms, first_order_psi, kodaira_h01, kuranishi_bracket,
    nakamura_psi, parameter_name, parse_vector_form, print_vector_form, solve_maurer_cartan,
    tangent_cohomology_dims, tangent_h01_basis, verify_integrability,
)
from app.services.report import kuranishi_summary


def _t(name: str) -> ParamPoly:
    return ParamPoly.var(name)


def test_iwasawa_closed_forms_and_h01(iwasawa):
    assert count_closed_oneforms(iwasawa) == 2
    r, forms = kodaira_h01(iwasawa)
    assert r == 2
    assert forms == [phibar(3, 1), phibar(3, 2)]
    assert len(tangent_h01_basis(iwasawa)) == 6
    assert tangent_cohomology_dims(iwasawa) == (6, 6)


def test_torus_tangent_dims(torus3):
    assert tangent_cohomology_dims(torus3) == (9, 9)


def test_parameter_names():
    assert parameter_name(1, 2) == "t12"
    assert parameter_name(10, 1) == "t10_1"


def test_bracket_of_first_order_term(iwasawa):
    psi1, names = first_order_psi(iwasawa)
    assert names == ("t11", "t12", "t21", "t22", "t31", "t32")
    bracket = kuranishi_bracket(iwasawa, psi1, psi1)
    det = _t("t11") * _t("t22") - _t("t12") * _t("t21")
    assert bracket.components[0].is_zero() and bracket.components[1].is_zero()
    assert bracket.components[2] == phibar(3, 1).wedge(phibar(3, 2)).scale(det * 2)


def test_first_order_alone_is_not_integrable(iwasawa):
    psi1, _ = first_order_psi(iwasawa)
    assert bianchi_check(iwasawa, psi1)
    assert not verify_integrability(iwasawa, psi1)


def test_solver_recovers_closed_formula(iwasawa):
    solution = solve_maurer_cartan(iwasawa)
    assert not solution.obstructed
    assert solution.degree == 2
    assert solution.psi == nakamura_psi()
    assert verify_integrability(iwasawa, solution.psi)
    assert solution.pieces[1].degree() == 2


def test_torus_is_unobstructed_at_first_order(torus3):
    solution = solve_maurer_cartan(torus3)
    assert solution.degree == 1
    assert len(solution.parameters) == 9
    assert verify_integrability(torus3, solution.psi)


def test_step3_solution_is_integrable_when_found(heisenberg_step3):
    solution = solve_maurer_cartan(heisenberg_step3)
    if solution.obstructed:
        assert not solution.obstruction.is_zero()
    else:
        assert verify_integrability(heisenberg_step3, solution.psi)


def test_solver_rejects_bad_degree(iwasawa):
    with pytest.raises(ValueError):
        solve_maurer_cartan(iwasawa, max_degree=0)


def test_not_parallelisable(kodaira_thurston):
    with pytest.raises(StructureException) as exc:
        solve_maurer_cartan(kodaira_thurston)
    assert exc.value.error_code == "NOT_PARALLELISABLE"


def test_vector_form_file_round_trip():
    psi = nakamura_psi()
    assert parse_vector_form(print_vector_form(psi)) == psi


def test_bundled_psi_file(examples_dir, iwasawa):
    psi = parse_vector_form((examples_dir / "iwasawa_psi.vf").read_text())
    assert psi == nakamura_psi()
    assert verify_integrability(iwasawa, psi)


def test_vector_form_missing_lines_are_zero():
    psi = parse_vector_form("dim 3\nparams t\ntheta3 = t * conj(phi1)")
    assert psi.components[0].is_zero() and psi.components[1].is_zero()
    assert psi.variables == ("t",)


@pytest.mark.parametrize("text,code", [
    ("theta1 = 0", "MISSING_DIM"),
    ("dim 2\ntheta3 = 0", "INDEX_RANGE"),
    ("dim 2\ntheta1 = 0\ntheta1 = 0", "DUPLICATE_EQUATION"),
])
def test_vector_form_parse_errors(text, code):
    with pytest.raises(ParseException) as exc:
        parse_vector_form(text)
    assert exc.value.error_code == code


def test_vector_form_needs_one_type():
    with pytest.raises(FormException) as exc:
        VectorForm(3, [phibar(3, 1), phi(3, 1), Form.zero(3)])
    assert exc.value.error_code == "WRONG_BIDEGREE"


def test_zero_vector_form_is_integrable(iwasawa, torus3):
    assert verify_integrability(iwasawa, VectorForm.zero(3))
    assert verify_integrability(torus3, VectorForm.zero(3))


def test_summary_h01_comes_from_dolbeault(torus3, iwasawa):
    summary = kuranishi_summary(torus3)
    assert summary.h01 == cohomology.dolbeault(torus3).dims[(0, 1)] == 3
    assert summary.r == 3
    assert kuranishi_summary(iwasawa).h01 == 2
