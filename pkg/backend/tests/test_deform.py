from fractions import Fraction

import pytest

from app.core.exceptions import DeformationException, ParseException
from app.core.scalars import GaussRational
from app.models.structeq import parse_manifold, print_manifold
from app.services import cohomology, metrics
from app.services.builtins import load_builtin
from app.services.deform import (
    ab_structure, deformed_structure, format_point, parse_point, scan_family, transfer_witness,
)
from app.services.kuranishi import first_order_psi, nakamura_psi

TENTH = Fraction(1, 10)


def test_ab_fibre_matches_bundled_file(examples_dir):
    structure = ab_structure(TENTH)
    expected = parse_manifold((examples_dir / "ab_fiber_0.1.nil").read_text())
    assert structure.new_eqs.d_table == expected.d_table
    assert structure.manifold.name == "iwasawa_ab(1/10)"


def test_zero_point_is_identity(iwasawa):
    structure = deformed_structure(iwasawa, nakamura_psi(), {})
    assert structure.is_trivial
    assert structure.new_eqs == iwasawa.eqs


def test_betti_numbers_are_deformation_invariant(iwasawa, ab_tenth):
    assert cohomology.derham(ab_tenth).betti == cohomology.derham(iwasawa).betti


def test_point_values_are_recorded(iwasawa):
    structure = deformed_structure(iwasawa, nakamura_psi(), {"t12": TENTH})
    point = dict(structure.point)
    assert point["t12"] == TENTH
    assert point["t11"] == 0
    assert len(point) == 6


def test_first_order_term_breaks_integrability(iwasawa):
    psi1, _ = first_order_psi(iwasawa)
    half = Fraction(1, 2)
    with pytest.raises(DeformationException) as exc:
        deformed_structure(iwasawa, psi1, {"t11": half, "t22": half})
    assert exc.value.error_code == "INTEGRABILITY_BROKEN"
    assert exc.value.exit_code == 2


def test_singular_graph_coframe(iwasawa):
    with pytest.raises(DeformationException) as exc:
        deformed_structure(iwasawa, nakamura_psi(), {"t11": 1})
    assert exc.value.error_code == "NOT_INVERTIBLE"
    assert exc.value.exit_code == 1


def test_zero_parameter_is_rejected():
    with pytest.raises(DeformationException) as exc:
        ab_structure(0)
    assert exc.value.error_code == "ZERO_PARAMETER"


def test_unknown_parameter(iwasawa):
    with pytest.raises(DeformationException) as exc:
        deformed_structure(iwasawa, nakamura_psi(), {"s": 1})
    assert exc.value.error_code == "UNKNOWN_PARAMETER"


def test_dimension_mismatch():
    with pytest.raises(DeformationException) as exc:
        deformed_structure(load_builtin("torus2"), nakamura_psi(), {})
    assert exc.value.error_code == "DIMENSION_MISMATCH"


def test_parse_point():
    point = parse_point("t12=1/10, t11 = 0,t21=(1/2+i)")
    assert point == {"t12": TENTH, "t11": 0, "t21": GaussRational(Fraction(1, 2), 1)}
    assert format_point(point) == "t11=0,t12=1/10,t21=(1/2+i)"
    assert parse_point("") == {}


@pytest.mark.parametrize("text,code", [
    ("t12", "SYNTAX"),
    ("1t=1", "SYNTAX"),
    ("t12=1,t12=2", "DUPLICATE_PARAMETER"),
])
def test_parse_point_errors(text, code):
    with pytest.raises(ParseException) as exc:
        parse_point(text)
    assert exc.value.error_code == code


def test_balanced_witness_transfers_to_sg(iwasawa):
    structure = ab_structure(TENTH)
    omega = metrics.parallelisable_balanced_witness(iwasawa)
    moved = transfer_witness(structure, omega)
    assert structure.manifold.algebra.d(moved).is_zero()
    assert metrics.verify_witness(structure.manifold, "sg", moved)


def test_transfer_is_identity_at_base(iwasawa):
    structure = deformed_structure(iwasawa, nakamura_psi(), {})
    omega = metrics.parallelisable_balanced_witness(iwasawa)
    assert transfer_witness(structure, omega) == omega


def test_scan_family_records_failures(iwasawa):
    rows = scan_family(iwasawa, nakamura_psi(), [{"t12": TENTH}, {"t11": 1}],
                       budget=2_000, seed=42, kinds=["sg"])
    good, bad = rows
    assert good.ok
    assert good.betti == (1, 4, 8, 10, 8, 4, 1)
    assert good.ddbar is False
    assert set(good.verdicts) == {"sg"}
    assert not bad.ok
    assert bad.error_code == "NOT_INVERTIBLE"
    assert bad.betti == ()


def test_ab_structure_at_other_rational():
    structure = ab_structure(Fraction(1, 3))
    expected = parse_manifold("dim 3\nd phi1 = 0\nd phi2 = 0\nd phi3 = - phi1 ^ phi2 - 1/3 * phi2 ^ conj(phi2)")
    assert structure.new_eqs.d_table == expected.d_table
    assert structure.manifold.name == "iwasawa_ab(1/3)"


def test_ab_fibre_at_one_half_end_to_end():
    fibre = load_builtin("iwasawa_ab(1/2)")
    assert fibre.flags.integrable and fibre.flags.nilpotent
    assert not fibre.flags.parallelisable
    assert "1/2 * phi2 ^ conj(phi2)" in print_manifold(fibre.eqs)
    assert cohomology.derham(fibre).betti == (1, 4, 8, 10, 8, 4, 1)
    assert cohomology.euler_characteristic(fibre) == 0


def test_zero_parameter_through_builtin_loader():
    with pytest.raises(DeformationException) as exc:
        load_builtin("iwasawa_ab(0)")
    assert exc.value.error_code == "ZERO_PARAMETER"
