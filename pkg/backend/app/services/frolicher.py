# app/services/frolicher.py
"""
Fröhlicher spectral sequence of the holomorphic-degree filtration.

E_r^{p,q} = Z_r^{p,q} / (Z_{r-1}^{p+1,q-1} + d Z_{r-1}^{p-r+1,q+r-2}) with
Z_r^{p,q} = {x in F^p Λ^{p+q} : dx in F^{p+r}}.  E_∞ is the graded De Rham cohomology.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple
import logging

from ..core import linalg
from ..core.exceptions import InconsistencyException
from ..models.exterior import bidegree_of, total_basis
from ..models.structeq import ComplexNilmanifold
from . import cohomology

logger = logging.getLogger(__name__)

Table = Dict[Tuple[int, int], int]


@dataclass
class InequalityRow:
    k: int
    betti: int
    hodge_sum: int

    @property
    def equal(self) -> bool:
        return self.betti == self.hodge_sum


@dataclass
class SpectralPages:
    n: int
    pages: List[Table]
    infinity: Table
    degeneration_page: Optional[int]
    equality: List[InequalityRow] = field(default_factory=list)

    def page(self, r: int) -> Table:
        """E_r (1-based); pages past the last computed one equal the last."""
        return self.pages[min(r, len(self.pages)) - 1]

    @property
    def degenerates_at_e1(self) -> bool:
        return self.degeneration_page == 1


class _Filtration:
    """Z_r subspaces of one manifold, in total-basis coordinates."""

    def __init__(self, manifold: ComplexNilmanifold):
        self.manifold = manifold
        self.n = manifold.n
        self._d = {}
        self._z = {}

    def d_matrix(self, k: int) -> linalg.Matrix:
        if k not in self._d:
            self._d[k] = cohomology.operator_matrix(self.manifold, "d", total_basis(self.n, k),
                                                    total_basis(self.n, k + 1))
        return self._d[k]

    def z(self, r: Optional[int], p: int, k: int) -> linalg.Matrix:
        """Z_r^{p,k-p}; ``r=None`` means dx = 0."""
        key = (r, p, k)
        if key in self._z:
            return self._z[key]
        n = self.n
        source = total_basis(n, k)
        if k < 0 or not source:
            self._z[key] = []
            return []
        target = total_basis(n, k + 1)
        columns = [i for i, m in enumerate(source) if bidegree_of(m, n)[0] >= p]
        if r is None:
            rows = list(range(len(target)))
        else:
            rows = [j for j, m in enumerate(target) if bidegree_of(m, n)[0] < p + r]
        matrix = self.d_matrix(k)
        restricted = [[matrix[j][c] for c in columns] for j in rows]
        if not columns:
            kernel = []
        elif restricted:
            kernel = linalg.nullspace(restricted, len(columns))
        else:
            kernel = [[1 if a == b else 0 for b in range(len(columns))] for a in range(len(columns))]
        vectors = []
        for vec in kernel:
            full = linalg.zeros(len(source))
            for c, x in zip(columns, vec):
                full[c] = x
            vectors.append(full)
        result = linalg.row_space(vectors, len(source))
        self._z[key] = result
        return result

    def d_image(self, vectors: linalg.Matrix, k: int) -> linalg.Matrix:
        matrix = self.d_matrix(k)
        return [linalg.mat_vec(matrix, vec) for vec in vectors]


def _page(filtration: _Filtration, r: int) -> Table:
    n = filtration.n
    table = {}
    for p in range(n + 1):
        for q in range(n + 1):
            k = p + q
            size = len(total_basis(n, k))
            cycles = filtration.z(r, p, k)
            lower = filtration.z(r - 1, p + 1, k)
            boundaries = filtration.d_image(filtration.z(r - 1, p - r + 1, k - 1), k - 1) if k > 0 else []
            denominator = linalg.row_space(lower + boundaries, size)
            if not linalg.contains(cycles, denominator, size):
                raise InconsistencyException(f"E_{r}^{p},{q}: denominator escapes the cycles",
                                             error_code="INCONSISTENT")
            table[(p, q)] = len(cycles) - len(denominator)
    return table


def _infinity(filtration: _Filtration, derham: cohomology.CohomologyReport) -> Table:
    """dim F^p H^k - dim F^{p+1} H^k."""
    n = filtration.n
    table = {}
    for k in range(2 * n + 1):
        size = len(total_basis(n, k))
        exact = filtration.d_image(filtration.z(0, 0, k - 1), k - 1) if k > 0 else []
        exact_rank = linalg.rank(exact, size)

        def filtered(p: int) -> int:
            return linalg.rank(filtration.z(None, p, k) + exact, size) - exact_rank

        for p in range(n + 1):
            q = k - p
            if 0 <= q <= n:
                table[(p, q)] = filtered(p) - filtered(p + 1)
        total = sum(table.get((p, k - p), 0) for p in range(n + 1))
        if total != derham.dims[k]:
            raise InconsistencyException(f"Graded De Rham dimension {total} != b_{k} = {derham.dims[k]}",
                                         error_code="INCONSISTENT")
    return table


def _euler(table: Table) -> int:
    return sum((-1) ** (p + q) * dim for (p, q), dim in table.items())


def pages(manifold: ComplexNilmanifold, r_max: Optional[int] = None) -> SpectralPages:
    """Pages E_1..E_r until they agree with E_∞ (or r_max is reached)."""
    n = manifold.n
    r_max = r_max if r_max is not None else n + 1
    if r_max < 1:
        raise ValueError("r_max must be at least 1")
    filtration = _Filtration(manifold)
    derham = cohomology.derham(manifold)
    infinity = _infinity(filtration, derham)
    euler = sum((-1) ** k * b for k, b in enumerate(derham.betti))

    computed: List[Table] = []
    degeneration = None
    for r in range(1, r_max + 1):
        table = _page(filtration, r)
        if _euler(table) != euler:
            raise InconsistencyException(f"Euler characteristic changes on page E_{r}", error_code="INCONSISTENT")
        if computed and any(table[key] > computed[-1][key] for key in table):
            raise InconsistencyException(f"Page E_{r} grows", error_code="INCONSISTENT")
        computed.append(table)
        logger.debug(f"E_{r} = {table}")
        if table == infinity:
            degeneration = r
            break

    equality = [
        InequalityRow(k=k, betti=derham.dims[k],
                      hodge_sum=sum(computed[0].get((p, k - p), 0) for p in range(n + 1)))
        for k in range(2 * n + 1)
    ]
    logger.info(f"Frolicher spectral sequence degenerates at page {degeneration}")
    return SpectralPages(n=n, pages=computed, infinity=infinity, degeneration_page=degeneration,
                         equality=equality)


def check_inequality(manifold: ComplexNilmanifold) -> List[InequalityRow]:
    """(b_k, sum_{p+q=k} h^{p,q}) for every k, from the cohomology computations."""
    n = manifold.n
    betti = cohomology.derham(manifold).betti
    hodge = cohomology.dolbeault(manifold)
    rows = [InequalityRow(k=k, betti=betti[k],
                          hodge_sum=sum(hodge.dims[(p, k - p)] for p in range(n + 1) if 0 <= k - p <= n))
            for k in range(2 * n + 1)]
    for row in rows:
        if row.betti > row.hodge_sum:
            raise InconsistencyException(f"b_{row.k} = {row.betti} exceeds the Hodge sum {row.hodge_sum}",
                                         error_code="INCONSISTENT")
    return rows
