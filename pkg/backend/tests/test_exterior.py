import random
from fractions import Fraction

import pytest

from app.core.exceptions import FormException, ValidationException
from app.core.scalars import GaussRational, I, ONE, ZERO
from app.models.exterior import (
    Form, basis, bidegree_component, dual_n1n1, form_from_hermitian_11, hermitian_of_11, hermitian_of_n1n1,
    phi, phibar, substitute, top_coefficient, total_basis, volume_form, wedge, wedge_all, wedge_power,
)
from app.models.structeq import parse_manifold, validate


def _omega_iwasawa() -> Form:
    n = 3
    pairs = [(2, 3), (1, 3), (1, 2)]
    total = Form.zero(n)
    for a, b in pairs:
        total = total + wedge_all([phi(n, a), phi(n, b), phibar(n, a), phibar(n, b)], n)
    return total.scale(I ** 4)


def _random_form(rng: random.Random, n: int, k: int) -> Form:
    monos = total_basis(n, k)
    return Form(n, {rng.choice(monos): GaussRational(rng.randint(1, 3), rng.randint(-3, 3))
                    for _ in range(rng.randint(1, 3))})


def test_wedge_basics():
    n = 3
    product = wedge(phi(n, 1), phi(n, 2))
    assert product.coefficient((0, 1)) == 1
    assert product.bidegrees() == [(2, 0)]
    assert wedge(phi(n, 1), phi(n, 1)).is_zero()
    assert wedge(phi(n, 2), phi(n, 1)) == -product


def test_wedge_dimension_mismatch():
    with pytest.raises(FormException):
        phi(2, 1).wedge(phi(3, 1))


@pytest.mark.parametrize("seed", range(6))
def test_graded_commutativity_and_associativity(seed):
    rng = random.Random(seed)
    n = 3
    a, b, c = (_random_form(rng, n, rng.randint(1, 2)) for _ in range(3))
    for x, y in ((a, b), (b, c)):
        sign = -1 if (x.degrees()[0] * y.degrees()[0]) % 2 else 1
        assert x.wedge(y) == y.wedge(x).scale(sign)
    assert a.wedge(b).wedge(c) == a.wedge(b.wedge(c))


def test_d_on_iwasawa(iwasawa):
    n = 3
    assert iwasawa.algebra.d(phi(n, 3)) == -wedge(phi(n, 1), phi(n, 2))
    assert iwasawa.algebra.d(wedge(phi(n, 1), phi(n, 2))).is_zero()
    assert iwasawa.algebra.d(wedge(phi(n, 1), phi(n, 3))).is_zero()


def test_d_vanishes_on_torus(torus3):
    for mono in total_basis(3, 3):
        assert torus3.algebra.d(Form(3, {mono: 1})).is_zero()


def test_d_squared_is_zero_exhaustively(corpus_manifold):
    algebra = corpus_manifold.algebra
    n = corpus_manifold.n
    for k in range(2 * n):
        for mono in total_basis(n, k):
            assert algebra.d(algebra.d(Form(n, {mono: 1}))).is_zero()


def _generator_text(g: int, n: int) -> str:
    return f"phi{g + 1}" if g < n else f"conj(phi{g - n + 1})"


def _random_nilpotent_text(rng: random.Random) -> str:
    """d phi_k built from phi_j, conj(phi_j) with j < k, no (0,2) terms."""
    n = rng.randint(1, 3)
    lines = [f"dim {n}"]
    for k in range(1, n + 1):
        lower = [j for j in range(k - 1)] + [n + j for j in range(k - 1)]
        pairs = [(a, b) for a in lower for b in lower if a < b and a < n]
        terms = []
        for a, b in rng.sample(pairs, rng.randint(0, len(pairs))):
            coeff = rng.choice([f"{rng.randint(1, 4)}/{rng.randint(1, 3)}", f"{rng.randint(1, 3)}*i"])
            terms.append(f"{rng.choice(['+', '-'])} {coeff} * {_generator_text(a, n)} ^ {_generator_text(b, n)}")
        lines.append(f"d phi{k} = " + (" ".join(terms) if terms else "0"))
    return "\n".join(lines)


@pytest.mark.parametrize("seed", range(100))
def test_d_squared_is_zero_on_random_structures(seed):
    rng = random.Random(seed)
    manifold = None
    for _ in range(200):
        try:
            manifold = validate(parse_manifold(_random_nilpotent_text(rng)))
            break
        except ValidationException as e:
            assert e.error_code == "D2_NONZERO"
    assert manifold is not None
    assert manifold.flags.nilpotent and manifold.flags.integrable
    algebra = manifold.algebra
    n = manifold.n
    for k in range(2 * n + 1):
        for mono in total_basis(n, k):
            assert algebra.d(algebra.d(Form(n, {mono: 1}))).is_zero()


@pytest.mark.parametrize("seed", range(4))
def test_conjugation_and_leibniz(iwasawa, seed):
    rng = random.Random(seed)
    algebra = iwasawa.algebra
    a = _random_form(rng, 3, 2).component(1, 1) + _random_form(rng, 3, 2)
    b = _random_form(rng, 3, 1)
    assert algebra.d(a.conj()) == algebra.d(a).conj()
    assert algebra.delbar(a.conj()) == algebra.del_(a).conj()
    assert algebra.d(a.wedge(b)) == algebra.d(a).wedge(b) + a.wedge(algebra.d(b))
    for p, q in a.bidegrees():
        piece = a.component(p, q)
        assert algebra.d(piece) == algebra.del_(piece) + algebra.delbar(piece)


def test_bidegree_components_reconstruct(iwasawa):
    form = _omega_iwasawa() + phi(3, 1).wedge(phibar(3, 2)) + phi(3, 3)
    total = Form.zero(3)
    for p, q in form.bidegrees():
        total = total + bidegree_component(form, p, q)
    assert total == form
    assert bidegree_component(_omega_iwasawa(), 2, 2) == _omega_iwasawa()


def test_integrability_of_structure_equations(corpus_manifold):
    for form in corpus_manifold.eqs.d_table:
        assert form.component(0, 2).is_zero()


def test_deformed_one_one_part(ab_tenth):
    t = Fraction(1, 10)
    form = phi(3, 3).scale(GaussRational(0, -2) * t)
    part = ab_tenth.algebra.d(form).component(1, 1)
    assert part == phi(3, 2).wedge(phibar(3, 2)).scale(GaussRational(0, 2) * t * t)


def test_top_coefficient():
    assert top_coefficient(volume_form(3)) == 1
    omega = _omega_iwasawa()
    assert top_coefficient(omega.wedge(phi(3, 2).wedge(phibar(3, 2)).scale(I))) == 1


def test_invariant_stokes(corpus_manifold):
    n = corpus_manifold.n
    for mono in total_basis(n, 2 * n - 1):
        assert top_coefficient(corpus_manifold.algebra.d(Form(n, {mono: 1}))).is_zero()


def test_hermitian_probes():
    n = 3
    identity_form = Form.zero(n)
    for j in range(1, n + 1):
        identity_form = identity_form + phi(n, j).wedge(phibar(n, j)).scale(I)
    h = hermitian_of_11(identity_form)
    assert h.rows() == [[ONE if a == b else ZERO for b in range(n)] for a in range(n)]
    assert hermitian_of_n1n1(_omega_iwasawa()).is_positive_definite()
    e22 = hermitian_of_11(phi(n, 2).wedge(phibar(n, 2)).scale(I))
    assert e22.is_positive_semidefinite() and not e22.is_positive_definite()


def test_probe_rejects_wrong_type():
    with pytest.raises(FormException) as exc:
        hermitian_of_11(phi(3, 1).wedge(phi(3, 2)))
    assert exc.value.error_code == "WRONG_BIDEGREE"
    with pytest.raises(FormException) as exc:
        hermitian_of_11(phi(3, 1).wedge(phibar(3, 1)))
    assert exc.value.error_code == "NOT_REAL"


def test_probe_inverses():
    h = [[GaussRational(2), GaussRational(0, 1), ZERO],
         [GaussRational(0, -1), GaussRational(3), ZERO],
         [ZERO, ZERO, ONE]]
    assert hermitian_of_11(form_from_hermitian_11(h)).rows() == h
    assert hermitian_of_n1n1(dual_n1n1(h)).rows() == h


@pytest.mark.parametrize("seed", range(4))
def test_square_of_positive_form_is_positive(seed):
    rng = random.Random(seed)
    n = 3
    # A A^* + I is positive-definite
    a = [[GaussRational(rng.randint(-2, 2), rng.randint(-2, 2)) for _ in range(n)] for _ in range(n)]
    h = [[sum((a[j][m] * a[k][m].conj() for m in range(n)), ZERO) + (ONE if j == k else ZERO)
          for k in range(n)] for j in range(n)]
    omega = form_from_hermitian_11(h)
    assert hermitian_of_11(omega).is_positive_definite()
    assert hermitian_of_n1n1(wedge_power(omega, 2)).is_positive_definite()


def test_bases_are_lexicographic():
    assert basis(2, 1, 1) == ((0, 2), (0, 3), (1, 2), (1, 3))
    assert len(total_basis(3, 2)) == 15
    assert basis(2, 3, 0) == ()


def test_substitute_identity():
    n = 2
    images = [Form(n, {(g,): 1}) for g in range(2 * n)]
    form = phi(n, 1).wedge(phibar(n, 2)).scale(GaussRational(1, 1))
    assert substitute(form, images) == form
    with pytest.raises(FormException):
        substitute(form, images[:3])
