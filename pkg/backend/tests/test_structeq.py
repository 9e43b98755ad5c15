import random
from fractions import Fraction

import pytest

from app.core.exceptions import ParseException, StructureException, ValidationException
from app.core.scalars import GaussRational, ONE, ZERO
from app.models.exterior import phi
from app.models.structeq import (
    change_of_coframe, chevalley_flag, holomorphic_change, instantiate, parse_form, parse_manifold,
    parse_scalar, print_manifold, structure_constants, validate,
)
from app.services.builtins import builtin

IWASAWA = """
# Iwasawa manifold
dim 3
d phi1 = 0
d phi2 = 0
d phi3 = -1 * phi1 ^ phi2
"""


def test_parse_iwasawa():
    eqs = parse_manifold(IWASAWA)
    assert eqs.n == 3
    assert eqs.equation(1).is_zero() and eqs.equation(2).is_zero()
    assert eqs.equation(3) == -phi(3, 1).wedge(phi(3, 2))


def test_parse_is_order_insensitive():
    reordered = "dim 3\nd phi3 = phi2 ^ phi1\nd phi2 = 0\nd phi1 = 0\n"
    assert parse_manifold(reordered) == parse_manifold(IWASAWA)


def test_torus_has_zero_differentials():
    eqs = parse_manifold("dim 2\nd phi1 = 0\nd phi2 = 0")
    assert all(form.is_zero() for form in eqs.d_table)


@pytest.mark.parametrize("text,code", [
    ("dim 2\nd phi1 = phi1 ^ phi1\nd phi2 = 0", "MALFORMED_TERM"),
    ("dim 2\nd phi1 = 0\nd phi3 = 0", "INDEX_RANGE"),
    ("dim 2\nd phi1 = 0\nd phi1 = 0\nd phi2 = 0", "DUPLICATE_EQUATION"),
    ("dim 2\nd phi1 = 0\nd phi2 = t * phi1 ^ conj(phi1)", "UNDECLARED_PARAMETER"),
    ("d phi1 = 0", "MISSING_DIM"),
    ("dim 2\nd phi1 = 0", "MISSING_EQUATION"),
    ("dim 2\nd phi1 = 0\nd phi2 = phi1", "WRONG_DEGREE"),
    ("dim 2\nparams i\nd phi1 = 0\nd phi2 = 0", "RESERVED_NAME"),
])
def test_parse_errors(text, code):
    with pytest.raises(ParseException) as exc:
        parse_manifold(text)
    assert exc.value.error_code == code


def test_parse_error_position():
    with pytest.raises(ParseException) as exc:
        parse_manifold("dim 2\nd phi1 = 0\nd phi2 = phi1 $ phi2")
    assert (exc.value.line, exc.value.column) == (3, 15)


def test_parse_scalar():
    assert parse_scalar("1/10") == Fraction(1, 10)
    assert parse_scalar("(1/2 - 3/4*i)") == GaussRational(Fraction(1, 2), Fraction(-3, 4))
    assert parse_scalar("-2") == -2
    with pytest.raises(ParseException):
        parse_scalar("phi1")


def test_validate_iwasawa(iwasawa):
    flags = iwasawa.flags
    assert flags.integrable and flags.d_squared_zero
    assert flags.parallelisable and flags.nilpotent and flags.unimodular
    assert flags.nilpotency_steps[-1] == 6


def test_validate_torus(torus3):
    flags = torus3.flags
    assert flags.parallelisable and flags.nilpotent and flags.unimodular
    assert flags.nilpotency_steps == (6,)


def test_kodaira_thurston_is_not_parallelisable(kodaira_thurston):
    assert not kodaira_thurston.flags.parallelisable
    assert kodaira_thurston.flags.nilpotent


def test_validate_rejects_non_integrable():
    eqs = parse_manifold("dim 3\nd phi1 = 0\nd phi2 = 0\nd phi3 = conj(phi1) ^ conj(phi2)")
    with pytest.raises(ValidationException) as exc:
        validate(eqs)
    assert exc.value.error_code == "NOT_INTEGRABLE"
    assert "conj(phi1) ^ conj(phi2)" in exc.value.message


def test_validate_rejects_d_squared_nonzero():
    eqs = parse_manifold("dim 4\nd phi1 = 0\nd phi2 = 0\nd phi3 = phi1 ^ phi2\nd phi4 = phi3 ^ conj(phi1)")
    with pytest.raises(ValidationException) as exc:
        validate(eqs)
    assert exc.value.error_code == "D2_NONZERO"


def test_validate_rejects_parametric_input(examples_dir):
    eqs = parse_manifold((examples_dir / "ab_family.nil").read_text())
    assert eqs.params == ("t",)
    with pytest.raises(ValidationException) as exc:
        validate(eqs)
    assert exc.value.error_code == "PARAMETRIC_INPUT"


def test_instantiate_matches_ab_file(examples_dir):
    family = parse_manifold((examples_dir / "ab_family.nil").read_text())
    fibre = parse_manifold((examples_dir / "ab_fiber_0.1.nil").read_text())
    assert instantiate(family, {"t": Fraction(1, 10)}).d_table == fibre.d_table


def test_non_unimodular_structure_is_flagged():
    # affine group: ad(theta1) has nonzero trace
    eqs = parse_manifold("dim 2\nd phi1 = 0\nd phi2 = phi1 ^ phi2")
    manifold = validate(eqs)
    assert not manifold.flags.unimodular
    assert not manifold.flags.nilpotent


@pytest.mark.parametrize("name", ["torus2", "torus3", "iwasawa", "kodaira_thurston", "heisenberg_step3"])
def test_print_parse_round_trip(name):
    eqs = parse_manifold(builtin(name))
    assert parse_manifold(print_manifold(eqs)) == eqs
    assert print_manifold(parse_manifold(print_manifold(eqs))) == print_manifold(eqs)


def _generator_text(g: int, n: int) -> str:
    return f"phi{g + 1}" if g < n else f"conj(phi{g - n + 1})"


@pytest.mark.parametrize("seed", range(50))
def test_random_round_trip(seed):
    rng = random.Random(seed)
    n = rng.randint(1, 3)
    lines = [f"dim {n}"]
    for k in range(1, n + 1):
        text = ""
        for _ in range(rng.randint(0, 3)):
            a, b = rng.sample(range(2 * n), 2)
            sign = rng.choice(["+", "-"])
            term = f"{rng.randint(1, 5)}/{rng.randint(1, 4)} * {_generator_text(a, n)} ^ {_generator_text(b, n)}"
            text = f"{sign} {term}" if not text else f"{text} {sign} {term}"
        lines.append(f"d phi{k} = " + (text or "0"))
    eqs = parse_manifold("\n".join(lines))
    assert parse_manifold(print_manifold(eqs)) == eqs


def test_parse_form_any_degree():
    form = parse_form("2*i * phi1 ^ phi2 ^ conj(phi1) - phi3", 3)
    assert set(form.degrees()) == {1, 3}
    assert form.coefficient((0, 1, 3)) == GaussRational(0, 2)


def test_chevalley_flag_iwasawa(iwasawa):
    flag = chevalley_flag(iwasawa)
    assert flag.r == 2
    assert flag.steps == (2, 3)
    assert [[x for x in row] for row in flag.change] == [[ONE, ZERO, ZERO], [ZERO, ONE, ZERO], [ZERO, ZERO, ONE]]


def test_chevalley_flag_sorts_closed_forms_first():
    permuted = validate(parse_manifold("dim 3\nd phi1 = -1 * phi2 ^ phi3\nd phi2 = 0\nd phi3 = 0"))
    flag = chevalley_flag(permuted)
    assert flag.r == 2
    for mu, form in enumerate(flag.eqs.d_table):
        for mono, _ in form.items():
            assert all(g < mu for g in mono)
    assert flag.eqs.d_table[0].is_zero() and flag.eqs.d_table[1].is_zero()


def test_chevalley_flag_three_step(heisenberg_step3):
    flag = chevalley_flag(heisenberg_step3)
    assert flag.r == 2
    assert flag.steps == (2, 3, 4)


def test_chevalley_flag_needs_parallelisable(kodaira_thurston):
    with pytest.raises(StructureException) as exc:
        chevalley_flag(kodaira_thurston)
    assert exc.value.error_code == "NOT_PARALLELISABLE"


def test_change_of_coframe_identity(iwasawa):
    identity = holomorphic_change([[ONE if i == j else ZERO for j in range(3)] for i in range(3)])
    assert change_of_coframe(iwasawa.eqs, identity) == iwasawa.eqs


def test_change_of_coframe_singular(iwasawa):
    singular = [[ZERO] * 6 for _ in range(6)]
    with pytest.raises(StructureException) as exc:
        change_of_coframe(iwasawa.eqs, singular)
    assert exc.value.error_code == "NOT_INVERTIBLE"


def test_structure_constants_sign_convention(iwasawa):
    # d phi3 = -phi1 ^ phi2 encodes [theta1, theta2] = theta3
    table = structure_constants(iwasawa)
    assert table[(0, 1)][2] == 1
    assert table[(1, 0)][2] == -1
