from app.core import linalg
from app.core.scalars import GaussRational, ONE, ZERO


def _g(re, im=0) -> GaussRational:
    return GaussRational(re, im)


def test_hermitian_positive_definite():
    rows = [[_g(2), _g(0, 1)], [_g(0, -1), _g(2)]]
    assert linalg.is_positive_definite(rows)
    assert linalg.is_positive_semidefinite(rows)


def test_rank_one_projection_is_only_semidefinite():
    rows = [[ONE, ZERO], [ZERO, ZERO]]
    assert linalg.is_positive_semidefinite(rows)
    assert not linalg.is_positive_definite(rows)


def test_non_hermitian_matrices_are_rejected():
    # positive leading minors and an alternating characteristic polynomial, but not Hermitian
    upper = [[ONE, ONE], [ZERO, ONE]]
    assert [m.re for m in linalg.leading_minors(upper)] == [1, 1]
    assert not linalg.is_positive_definite(upper)
    assert not linalg.is_positive_semidefinite(upper)

    skew = [[_g(2), _g(0, 1)], [_g(0, 1), _g(2)]]
    assert not linalg.is_positive_definite(skew)
    assert not linalg.is_positive_semidefinite(skew)


def test_empty_matrix_is_not_positive():
    assert not linalg.is_positive_definite([])
    assert not linalg.is_positive_semidefinite([])
