# app/services/cohomology.py
"""
Invariant De Rham, Dolbeault and Bott-Chern cohomology by exact ranks.

Subspaces are lists of coordinate vectors against a monomial basis from
:mod:`app.models.exterior`.  Representatives are taken from the reduced echelon basis of
the cocycles, pivots left to right, completing the coboundaries.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Sequence, Tuple, Union
import logging

from ..core import linalg
from ..core.exceptions import InconsistencyException
from ..models.exterior import Form, algebra_of, basis, total_basis
from ..models.structeq import ComplexNilmanifold

logger = logging.getLogger(__name__)

Key = Union[int, Tuple[int, int]]


class Theory(str, Enum):
    DERHAM = "derham"
    DOLBEAULT = "dolbeault"
    BOTTCHERN = "bottchern"


@dataclass
class CohomologyReport:
    theory: Theory
    n: int
    dims: Dict[Key, int]
    representatives: Dict[Key, List[Form]] = field(default_factory=dict)
    invariant_level: bool = True

    def dim(self, *key) -> int:
        return self.dims[key[0] if len(key) == 1 else tuple(key)]

    @property
    def betti(self) -> Tuple[int, ...]:
        return tuple(self.dims[k] for k in range(2 * self.n + 1))

    def table(self) -> List[List[int]]:
        """h^{p,q} as rows p = 0..n."""
        return [[self.dims[(p, q)] for q in range(self.n + 1)] for p in range(self.n + 1)]


# subspace helpers shared by frolicher and metrics

def _operator(manifold, name: str) -> Callable[[Form], Form]:
    algebra = algebra_of(manifold)
    return {"d": algebra.d, "del": algebra.del_, "delbar": algebra.delbar, "ddbar": algebra.ddbar}[name]


def operator_matrix(manifold, name: str, source: Sequence, target: Sequence) -> linalg.Matrix:
    return algebra_of(manifold).matrix(_operator(manifold, name), source, target)


def kernel(manifold, name: str, source: Sequence, target: Sequence) -> linalg.Matrix:
    """Echelon basis (source coordinates) of the kernel of an operator."""
    if not source:
        return []
    if not target:
        return linalg.row_space([[1 if i == j else 0 for j in range(len(source))]
                                 for i in range(len(source))], len(source))
    return linalg.row_space(linalg.nullspace(operator_matrix(manifold, name, source, target), len(source)),
                            len(source))


def image(manifold, name: str, source: Sequence, target: Sequence) -> linalg.Matrix:
    """Echelon basis (target coordinates) of the image of an operator."""
    if not source or not target:
        return []
    matrix = operator_matrix(manifold, name, source, target)
    return linalg.row_space(linalg.transpose(matrix, len(source)), len(target))


def embed(vectors: Sequence[Sequence], source: Sequence, target: Sequence) -> linalg.Matrix:
    """Re-express vectors over ``source`` monomials in the larger ``target`` basis."""
    index = {m: i for i, m in enumerate(target)}
    out = []
    for vec in vectors:
        row = linalg.zeros(len(target))
        for mono, x in zip(source, vec):
            row[index[mono]] = x
        out.append(row)
    return out


def to_forms(n: int, vectors: Sequence[Sequence], monomials: Sequence) -> List[Form]:
    return [Form.from_vector(n, monomials, vec) for vec in vectors]


def _quotient(cocycles: linalg.Matrix, coboundaries: linalg.Matrix, ncols: int, label: str):
    if not linalg.contains(cocycles, coboundaries, ncols):
        raise InconsistencyException(f"Coboundaries of {label} are not cocycles", error_code="INCONSISTENT")
    reps = linalg.complement(coboundaries, cocycles, ncols)
    if len(reps) != len(cocycles) - len(coboundaries):
        raise InconsistencyException(f"Rank mismatch computing {label}", error_code="INCONSISTENT")
    return reps


def derham(manifold: ComplexNilmanifold) -> CohomologyReport:
    n = manifold.n
    dims, reps = {}, {}
    for k in range(2 * n + 1):
        source = total_basis(n, k)
        closed = kernel(manifold, "d", source, total_basis(n, k + 1))
        exact = image(manifold, "d", total_basis(n, k - 1), source)
        chosen = _quotient(closed, exact, len(source), f"H^{k}_dR")
        dims[k] = len(chosen)
        reps[k] = to_forms(n, chosen, source)
        logger.debug(f"b_{k}: closed={len(closed)} exact={len(exact)}")
    logger.info(f"De Rham Betti numbers: {[dims[k] for k in range(2 * n + 1)]}")
    return CohomologyReport(Theory.DERHAM, n, dims, reps)


def dolbeault(manifold: ComplexNilmanifold) -> CohomologyReport:
    n = manifold.n
    dims, reps = {}, {}
    for p in range(n + 1):
        for q in range(n + 1):
            source = basis(n, p, q)
            closed = kernel(manifold, "delbar", source, basis(n, p, q + 1))
            exact = image(manifold, "delbar", basis(n, p, q - 1), source)
            chosen = _quotient(closed, exact, len(source), f"H^{p},{q}_delbar")
            dims[(p, q)] = len(chosen)
            reps[(p, q)] = to_forms(n, chosen, source)
    logger.info(f"Dolbeault numbers computed for n={n}")
    return CohomologyReport(Theory.DOLBEAULT, n, dims, reps)


def _stack(*blocks: linalg.Matrix) -> linalg.Matrix:
    rows = []
    for block in blocks:
        rows.extend(block)
    return rows


def bott_chern(manifold: ComplexNilmanifold) -> CohomologyReport:
    n = manifold.n
    dims, reps = {}, {}
    for p in range(n + 1):
        for q in range(n + 1):
            source = basis(n, p, q)
            system = _stack(operator_matrix(manifold, "del", source, basis(n, p + 1, q)),
                            operator_matrix(manifold, "delbar", source, basis(n, p, q + 1)))
            closed = linalg.row_space(linalg.nullspace(system, len(source)), len(source)) if system else \
                kernel(manifold, "d", source, ())
            exact = image(manifold, "ddbar", basis(n, p - 1, q - 1), source)
            chosen = _quotient(closed, exact, len(source), f"H^{p},{q}_BC")
            dims[(p, q)] = len(chosen)
            reps[(p, q)] = to_forms(n, chosen, source)
    return CohomologyReport(Theory.BOTTCHERN, n, dims, reps)


def compute(manifold: ComplexNilmanifold, theory: Union[Theory, str]) -> CohomologyReport:
    theory = Theory(theory)
    return {Theory.DERHAM: derham, Theory.DOLBEAULT: dolbeault, Theory.BOTTCHERN: bott_chern}[theory](manifold)


@dataclass
class DdbarBidegree:
    d_exact_is_del_exact: bool
    d_exact_is_delbar_exact: bool
    d_exact_is_ddbar_exact: bool
    del_or_delbar_exact_is_ddbar_exact: bool

    @property
    def holds(self) -> bool:
        return (self.d_exact_is_del_exact and self.d_exact_is_delbar_exact
                and self.d_exact_is_ddbar_exact and self.del_or_delbar_exact_is_ddbar_exact)


@dataclass
class DdbarReport:
    per_bidegree: Dict[Tuple[int, int], DdbarBidegree]

    @property
    def overall(self) -> bool:
        return all(entry.holds for entry in self.per_bidegree.values())

    def failures(self) -> List[Tuple[int, int]]:
        return [key for key, entry in sorted(self.per_bidegree.items()) if not entry.holds]


def ddbar_check(manifold: ComplexNilmanifold) -> DdbarReport:
    """Inclusion tests for d-closed pure-type forms, one bidegree at a time."""
    n = manifold.n
    results = {}
    for p in range(n + 1):
        for q in range(n + 1):
            k = p + q
            source = basis(n, p, q)
            ambient = total_basis(n, k)
            size = len(ambient)
            closed = embed(kernel(manifold, "d", source, total_basis(n, k + 1)), source, ambient)
            d_exact = image(manifold, "d", total_basis(n, k - 1), ambient)
            del_exact = embed(image(manifold, "del", basis(n, p - 1, q), source), source, ambient)
            delbar_exact = embed(image(manifold, "delbar", basis(n, p, q - 1), source), source, ambient)
            ddbar_exact = embed(image(manifold, "ddbar", basis(n, p - 1, q - 1), source), source, ambient)

            closed_d_exact = linalg.intersection(closed, d_exact, size)
            closed_partial = linalg.intersection(closed, del_exact + delbar_exact, size)
            results[(p, q)] = DdbarBidegree(
                d_exact_is_del_exact=linalg.contains(del_exact, closed_d_exact, size),
                d_exact_is_delbar_exact=linalg.contains(delbar_exact, closed_d_exact, size),
                d_exact_is_ddbar_exact=linalg.contains(ddbar_exact, closed_d_exact, size),
                del_or_delbar_exact_is_ddbar_exact=linalg.contains(ddbar_exact, closed_partial, size),
            )
    report = DdbarReport(results)
    logger.info(f"ddbar-lemma at invariant level: {report.overall} (failing bidegrees {report.failures()})")
    return report


def holomorphic_top_minus_one_closed(manifold: ComplexNilmanifold) -> bool:
    """Every delbar-closed invariant (n-1,0)-form is d-closed."""
    n = manifold.n
    source = basis(n, n - 1, 0)
    algebra = algebra_of(manifold)
    holomorphic = kernel(manifold, "delbar", source, basis(n, n - 1, 1))
    return all(algebra.d(Form.from_vector(n, source, vec)).is_zero() for vec in holomorphic)


def euler_characteristic(manifold: ComplexNilmanifold) -> int:
    return sum((-1) ** k * b for k, b in enumerate(derham(manifold).betti))
