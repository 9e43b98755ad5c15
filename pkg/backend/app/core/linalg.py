# app/core/linalg.py
"""
Exact linear algebra over the Gaussian rationals.

Vectors are plain lists of :class:`GaussRational`; matrices are lists of rows.  All
elimination is delegated to sympy's ``DomainMatrix`` over ``QQ_I``; the helpers here only
translate between the package scalars and the sympy domain and assemble the subspace
operations (kernels, images, intersections, complements) the cohomology and metric code
needs.  Results are deterministic: reduced row echelon form with pivots taken left to
right.
"""
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple
import logging

from sympy.polys.domains import QQ, QQ_I
from sympy.polys.matrices import DomainMatrix

from .scalars import GaussRational, ZERO

logger = logging.getLogger(__name__)

Vector = List[GaussRational]
Matrix = List[Vector]


def _to_qqi(z: GaussRational):
    return QQ_I(QQ(z.re.numerator, z.re.denominator), QQ(z.im.numerator, z.im.denominator))


def _from_qq(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def _from_qqi(e) -> GaussRational:
    return GaussRational(_from_qq(e.x), _from_qq(e.y))


def _domain_matrix(rows: Sequence[Sequence[GaussRational]], ncols: int) -> DomainMatrix:
    data = [[_to_qqi(GaussRational.coerce(x)) for x in row] for row in rows]
    return DomainMatrix(data, (len(data), ncols), QQ_I)


def _to_rows(dm: DomainMatrix) -> Matrix:
    return [[_from_qqi(e) for e in row] for row in dm.rep.to_list()]


def zeros(n: int) -> Vector:
    return [ZERO] * n


def rref(rows: Sequence[Sequence[GaussRational]], ncols: int) -> Tuple[Matrix, Tuple[int, ...]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    if not rows or ncols == 0:
        return [], ()
    reduced, pivots = _domain_matrix(rows, ncols).rref()
    result = _to_rows(reduced)[: len(pivots)]
    return result, tuple(pivots)


def rank(rows: Sequence[Sequence[GaussRational]], ncols: int) -> int:
    return len(rref(rows, ncols)[1])


def row_space(rows: Sequence[Sequence[GaussRational]], ncols: int) -> Matrix:
    """Canonical basis (reduced echelon rows) of the span of ``rows``."""
    return rref(rows, ncols)[0]


def nullspace(rows: Sequence[Sequence[GaussRational]], ncols: int) -> Matrix:
    """Basis of {x : A x = 0}; one vector per free column, in column order."""
    reduced, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        vec = zeros(ncols)
        vec[f] = GaussRational(1)
        for row, p in zip(reduced, pivots):
            vec[p] = -row[f]
        basis.append(vec)
    return basis


def transpose(rows: Sequence[Sequence[GaussRational]], ncols: int) -> Matrix:
    return [[rows[i][j] for i in range(len(rows))] for j in range(ncols)]


def independent_subset(vectors: Sequence[Sequence[GaussRational]], ncols: int) -> List[int]:
    """Indices of the greedy (left to right) maximal independent subfamily."""
    if not vectors:
        return []
    return list(rref(transpose(vectors, ncols), len(vectors))[1])


def contains(space: Sequence[Sequence[GaussRational]], vectors: Sequence[Sequence[GaussRational]],
             ncols: int) -> bool:
    """Whether every vector lies in span(space)."""
    if not vectors:
        return True
    return rank(list(space) + list(vectors), ncols) == rank(space, ncols)


def intersection(a: Sequence[Sequence[GaussRational]], b: Sequence[Sequence[GaussRational]],
                 ncols: int) -> Matrix:
    """Basis of span(a) ∩ span(b)."""
    if not a or not b:
        return []
    # columns: a_1..a_k, -b_1..-b_m
    cols = list(a) + [[-x for x in vec] for vec in b]
    relations = nullspace(transpose(cols, ncols), len(cols))
    elements = []
    for rel in relations:
        vec = zeros(ncols)
        for coeff, generator in zip(rel[: len(a)], a):
            if coeff:
                vec = [v + coeff * g for v, g in zip(vec, generator)]
        elements.append(vec)
    return row_space(elements, ncols)


def complement(sub: Sequence[Sequence[GaussRational]], space: Sequence[Sequence[GaussRational]],
               ncols: int) -> Matrix:
    """Vectors of ``space`` (kept in order) completing a basis of span(sub) to span(sub + space)."""
    chosen = independent_subset(list(sub) + list(space), ncols)
    offset = len(sub)
    return [list(space[i - offset]) for i in chosen if i >= offset]


def mat_vec(rows: Sequence[Sequence[GaussRational]], vec: Sequence[GaussRational]) -> Vector:
    return [sum((a * x for a, x in zip(row, vec) if a and x), ZERO) for row in rows]


def adjoint(rows: Sequence[Sequence[GaussRational]], ncols: int) -> Matrix:
    return [[rows[i][j].conj() for i in range(len(rows))] for j in range(ncols)]


def matmul(a: Sequence[Sequence[GaussRational]], b: Sequence[Sequence[GaussRational]],
           ncols_b: int) -> Matrix:
    bt = transpose(b, ncols_b)
    return [[sum((x * y for x, y in zip(row, col) if x and y), ZERO) for col in bt] for row in a]


def solve(rows: Sequence[Sequence[GaussRational]], rhs: Sequence[GaussRational],
          ncols: int) -> Optional[Vector]:
    """One solution of A x = rhs (free variables set to zero), or None if inconsistent."""
    if not rows:
        return zeros(ncols) if not any(rhs) else None
    augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
    reduced, pivots = rref(augmented, ncols + 1)
    if ncols in pivots:
        return None
    x = zeros(ncols)
    for row, p in zip(reduced, pivots):
        x[p] = row[ncols]
    return x


def min_norm_solve(rows: Sequence[Sequence[GaussRational]], rhs: Sequence[GaussRational],
                   ncols: int) -> Optional[Vector]:
    """Minimal-norm solution x = A^H y of A x = rhs (pseudo-inverse solution), or None."""
    if solve(rows, rhs, ncols) is None:
        return None
    a_h = adjoint(rows, ncols)
    gram = matmul(rows, a_h, len(rows))
    y = solve(gram, rhs, len(rows))
    if y is None:
        return None
    return mat_vec(a_h, y)


def residual_outside_image(rows: Sequence[Sequence[GaussRational]], rhs: Sequence[GaussRational],
                           ncols: int) -> Vector:
    """Orthogonal projection of ``rhs`` onto the complement of the column space of A."""
    if not rows or ncols == 0:
        return list(rhs)
    a_h = adjoint(rows, ncols)
    normal = matmul(a_h, rows, ncols)
    x = solve(normal, mat_vec(a_h, rhs), ncols)
    image = mat_vec(rows, x)
    return [b - v for b, v in zip(rhs, image)]


def inverse(rows: Sequence[Sequence[GaussRational]]) -> Optional[Matrix]:
    """Inverse of a square matrix by Gauss-Jordan on [A | I]; None if singular."""
    n = len(rows)
    augmented = [list(row) + [GaussRational(1) if i == j else ZERO for j in range(n)]
                 for i, row in enumerate(rows)]
    reduced, pivots = rref(augmented, 2 * n)
    if tuple(pivots[:n]) != tuple(range(n)) or len(pivots) < n:
        return None
    return [row[n:] for row in reduced[:n]]


def determinant(rows: Sequence[Sequence[GaussRational]]) -> GaussRational:
    n = len(rows)
    if n == 0:
        return GaussRational(1)
    return _from_qqi(_domain_matrix(rows, n).det())


def charpoly(rows: Sequence[Sequence[GaussRational]]) -> List[GaussRational]:
    """Coefficients of det(x I - A), leading coefficient first."""
    n = len(rows)
    if n == 0:
        return [GaussRational(1)]
    return [_from_qqi(c) for c in _domain_matrix(rows, n).charpoly()]


def leading_minors(rows: Sequence[Sequence[GaussRational]]) -> List[GaussRational]:
    n = len(rows)
    return [determinant([list(r[:k]) for r in rows[:k]]) for k in range(1, n + 1)]


def _hermitian(rows: Sequence[Sequence[GaussRational]]) -> bool:
    n = len(rows)
    return all(len(row) == n for row in rows) and all(
        rows[j][k] == rows[k][j].conj() for j in range(n) for k in range(j, n))


def is_positive_definite(rows: Sequence[Sequence[GaussRational]]) -> bool:
    """Sylvester's criterion: Hermitian and all leading principal minors > 0."""
    if not rows or not _hermitian(rows):
        return False
    for minor in leading_minors(rows):
        if not minor.is_real or minor.re <= 0:
            return False
    return True


def is_positive_semidefinite(rows: Sequence[Sequence[GaussRational]]) -> bool:
    """Hermitian PSD test: coefficients of det(xI - A) alternate weakly in sign."""
    n = len(rows)
    if not _hermitian(rows):
        return False
    coeffs = charpoly(rows)
    for k, c in enumerate(coeffs):
        if not c.is_real:
            return False
        # coefficient of x^(n-k) must have sign (-1)^k or vanish
        if (c.re < 0 if k % 2 == 0 else c.re > 0):
            return False
    return n > 0
