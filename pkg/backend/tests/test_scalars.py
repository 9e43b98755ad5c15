import random
from fractions import Fraction

import pytest

from app.core.exceptions import EvaluationException
from app.core.scalars import (
    GaussRational, I, ONE, ParamPoly, ZERO, parse_rational, poly_conj, poly_eval, rationalize,
)


def _random_gauss(rng: random.Random) -> GaussRational:
    return GaussRational(Fraction(rng.randint(-9, 9), rng.randint(1, 5)),
                         Fraction(rng.randint(-9, 9), rng.randint(1, 5)))


def _random_poly(rng: random.Random) -> ParamPoly:
    names = ["t11", "t12", "t21"]
    total = ParamPoly()
    for _ in range(rng.randint(0, 4)):
        term = ParamPoly.const(_random_gauss(rng))
        for _ in range(rng.randint(0, 2)):
            term = term * ParamPoly.var(rng.choice(names), conjugate=rng.random() < 0.5)
        total = total + term
    return total


def test_gauss_rational_arithmetic():
    x = GaussRational(Fraction(1, 2), Fraction(3, 4))
    assert x * x.conj() == x.abs2() == Fraction(13, 16)
    assert x / x == ONE
    assert I * I == -1
    assert (x ** -1) * x == ONE
    assert x.conj().conj() == x
    assert not ZERO and bool(I)


def test_gauss_rational_literal_syntax():
    assert str(GaussRational(Fraction(-3, 4))) == "-3/4"
    assert str(I) == "i"
    assert str(GaussRational(0, Fraction(2, 3))) == "2/3*i"
    assert str(GaussRational(Fraction(1, 2), -1)) == "(1/2-i)"


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_conjugation_swaps_parameters():
    t11 = ParamPoly.var("t11")
    s22 = ParamPoly.var("t22", conjugate=True)
    assert poly_conj(t11) == ParamPoly.var("t11", conjugate=True)
    assert poly_conj(t11 * s22 * I) == ParamPoly.var("t11", conjugate=True) * ParamPoly.var("t22") * -I


def test_evaluation_binds_conjugates():
    t12 = ParamPoly.var("t12")
    assert poly_eval(t12 * t12.conj(), {"t12": Fraction(1, 10)}) == Fraction(1, 100)
    det = ParamPoly.var("t11") * ParamPoly.var("t22") - t12 * ParamPoly.var("t21")
    assert poly_eval(det, {"t11": 0, "t12": Fraction(1, 10), "t21": 0, "t22": 0}) == 0
    assert poly_eval(ParamPoly(), {}) == 0


def test_evaluation_names_unbound_variable():
    with pytest.raises(EvaluationException) as exc:
        poly_eval(ParamPoly.var("t31"), {"t11": 1})
    assert exc.value.error_code == "UNBOUND_VARIABLE"
    assert "t31" in exc.value.message


def test_constant_value_rejects_parameters():
    with pytest.raises(EvaluationException):
        ParamPoly.var("t").constant_value()


@pytest.mark.parametrize("x,bound,expected", [
    (0.5, 10, Fraction(1, 2)),
    (0.333334, 100, Fraction(1, 3)),
])
def test_rationalize(x, bound, expected):
    assert rationalize(x, bound) == expected


def test_rationalize_is_best_over_bound():
    x = 0.7071067
    best = rationalize(x, 50)
    assert best.denominator <= 50
    for b in range(1, 51):
        a = round(x * b)
        assert abs(best - Fraction(x)) <= abs(Fraction(a, b) - Fraction(x))


def test_rationalize_rejects_bad_bound():
    with pytest.raises(ValueError):
        rationalize(0.5, 0)


def test_parse_rational():
    assert parse_rational(" -6/8 ") == Fraction(-3, 4)


@pytest.mark.parametrize("seed", range(5))
def test_ring_axioms_random(seed):
    rng = random.Random(seed)
    p, q, r = (_random_poly(rng) for _ in range(3))
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert poly_conj(p * q) == poly_conj(p) * poly_conj(q)
    assert poly_conj(poly_conj(p)) == p


@pytest.mark.parametrize("seed", range(5))
def test_evaluation_is_a_homomorphism(seed):
    rng = random.Random(100 + seed)
    p, q = _random_poly(rng), _random_poly(rng)
    point = {name: _random_gauss(rng) for name in ("t11", "t12", "t21")}
    assert poly_eval(p * q, point) == poly_eval(p, point) * poly_eval(q, point)
    assert poly_eval(p + q, point) == poly_eval(p, point) + poly_eval(q, point)
    assert poly_eval(poly_conj(p), point) == poly_eval(p, point).conj()
