# app/models/exterior.py
"""
Bigraded complexified exterior algebra of an invariant coframe.

Generators are numbered ``0..2n-1``: ``g < n`` is ``phi{g+1}``, ``g >= n`` is
``conj(phi{g-n+1})``.  A monomial is a strictly increasing tuple of generator numbers, so
every holomorphic factor precedes every antiholomorphic one and the bidegree can be read
off directly.  Coefficients are :class:`ParamPoly`, which lets parametric structure
equations be differentiated symbolically.

The canonical volume form is ``vol = (i phi1 ^ conj(phi1)) ^ ... ^ (i phin ^ conj(phin))``
and "integration" of an invariant form is its coefficient against ``vol``
(:func:`top_coefficient`).
"""
from __future__ import annotations

from bisect import bisect_right
from functools import lru_cache
from itertools import combinations, product
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import logging

from ..core.exceptions import FormException
from ..core.scalars import GaussRational, I, ParamPoly, ZERO
from ..core import linalg

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Coefficient = Union[ParamPoly, GaussRational, int]


def _sort_with_sign(indices: Sequence[int]) -> Optional[Tuple[Monomial, int]]:
    """Sort generator indices, returning the permutation sign; None on a repeated factor."""
    if len(set(indices)) != len(indices):
        return None
    items = list(indices)
    sign = 1
    # insertion sort counting transpositions (monomials are short)
    for i in range(1, len(items)):
        j = i
        while j > 0 and items[j - 1] > items[j]:
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    return tuple(items), sign


def _merge(m1: Monomial, m2: Monomial) -> Optional[Tuple[Monomial, int]]:
    """m1 ^ m2 as (monomial, sign), or None if they share a generator."""
    if set(m1) & set(m2):
        return None
    inversions = sum(len(m1) - bisect_right(m1, b) for b in m2)
    merged = tuple(sorted(m1 + m2))
    return merged, (-1) ** inversions


def bidegree_of(mono: Monomial, n: int) -> Tuple[int, int]:
    p = sum(1 for g in mono if g < n)
    return p, len(mono) - p


def conj_generator(g: int, n: int) -> int:
    return g + n if g < n else g - n


def generator_name(g: int, n: int) -> str:
    return f"phi{g + 1}" if g < n else f"conj(phi{g - n + 1})"


def monomial_name(mono: Monomial, n: int) -> str:
    if not mono:
        return "1"
    return " ^ ".join(generator_name(g, n) for g in mono)


class Form:
    """Invariant differential form: canonical monomials -> ParamPoly coefficients."""

    __slots__ = ("n", "_coeffs", "_hash")

    def __init__(self, n: int, coeffs: Mapping[Monomial, Coefficient] = None):
        self.n = n
        cleaned: Dict[Monomial, ParamPoly] = {}
        for mono, coeff in (coeffs or {}).items():
            coeff = ParamPoly.coerce(coeff)
            if coeff:
                cleaned[tuple(mono)] = coeff
        self._coeffs = cleaned
        self._hash = None

    # constructors

    @classmethod
    def zero(cls, n: int) -> "Form":
        return cls(n)

    @classmethod
    def constant(cls, n: int, value: Coefficient) -> "Form":
        return cls(n, {(): value})

    @classmethod
    def from_terms(cls, n: int, terms: Iterable[Tuple[Sequence[int], Coefficient]]) -> "Form":
        """Build a form from unsorted generator lists, absorbing permutation signs."""
        total: Dict[Monomial, ParamPoly] = {}
        for indices, coeff in terms:
            for g in indices:
                if not 0 <= g < 2 * n:
                    raise FormException(f"Generator index {g} out of range for n={n}",
                                        error_code="INDEX_RANGE")
            sorted_ = _sort_with_sign(indices)
            if sorted_ is None:
                continue
            mono, sign = sorted_
            total[mono] = total.get(mono, ParamPoly()) + ParamPoly.coerce(coeff) * sign
        return cls(n, total)

    # inspection

    @property
    def coeffs(self) -> Mapping[Monomial, ParamPoly]:
        return dict(self._coeffs)

    def items(self):
        for mono in sorted(self._coeffs, key=lambda m: (len(m), m)):
            yield mono, self._coeffs[mono]

    def coefficient(self, mono: Monomial) -> ParamPoly:
        return self._coeffs.get(tuple(mono), ParamPoly())

    def is_zero(self) -> bool:
        return not self._coeffs

    def degrees(self) -> List[int]:
        return sorted({len(m) for m in self._coeffs})

    def bidegrees(self) -> List[Tuple[int, int]]:
        return sorted({bidegree_of(m, self.n) for m in self._coeffs})

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self._coeffs.values())

    def variables(self) -> Tuple[str, ...]:
        return tuple(sorted({v for c in self._coeffs.values() for v in c.variables}))

    # linear structure

    def _check(self, other: "Form"):
        if not isinstance(other, Form):
            raise TypeError(f"Expected Form, got {type(other).__name__}")
        if other.n != self.n:
            raise FormException(f"Dimension mismatch: {self.n} vs {other.n}",
                                error_code="DIMENSION_MISMATCH")

    def __add__(self, other: "Form") -> "Form":
        self._check(other)
        result = dict(self._coeffs)
        for mono, coeff in other._coeffs.items():
            result[mono] = result.get(mono, ParamPoly()) + coeff
        return Form(self.n, result)

    def __neg__(self) -> "Form":
        return Form(self.n, {m: -c for m, c in self._coeffs.items()})

    def __sub__(self, other: "Form") -> "Form":
        return self + (-other)

    def scale(self, factor: Coefficient) -> "Form":
        factor = ParamPoly.coerce(factor)
        return Form(self.n, {m: c * factor for m, c in self._coeffs.items()})

    def __mul__(self, factor: Coefficient) -> "Form":
        return self.scale(factor)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Form):
            return NotImplemented
        return self.n == other.n and self._coeffs == other._coeffs

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self._coeffs.items())))
        return self._hash

    # algebra

    def wedge(self, other: "Form") -> "Form":
        self._check(other)
        result: Dict[Monomial, ParamPoly] = {}
        for m1, c1 in self._coeffs.items():
            for m2, c2 in other._coeffs.items():
                merged = _merge(m1, m2)
                if merged is None:
                    continue
                mono, sign = merged
                term = c1 * c2 * sign
                result[mono] = result.get(mono, ParamPoly()) + term
        return Form(self.n, result)

    def conj(self) -> "Form":
        terms = []
        for mono, coeff in self._coeffs.items():
            terms.append(([conj_generator(g, self.n) for g in mono], coeff.conj()))
        return Form.from_terms(self.n, terms)

    def is_real(self) -> bool:
        return self.conj() == self

    def component(self, p: int, q: int) -> "Form":
        return Form(self.n, {m: c for m, c in self._coeffs.items() if bidegree_of(m, self.n) == (p, q)})

    def evaluate(self, point: Mapping[str, object]) -> "Form":
        return Form(self.n, {m: ParamPoly.const(c.evaluate(point)) for m, c in self._coeffs.items()})

    def map_coefficients(self, fn: Callable[[ParamPoly], ParamPoly]) -> "Form":
        return Form(self.n, {m: fn(c) for m, c in self._coeffs.items()})

    # vectors in a monomial basis

    def to_vector(self, basis: Sequence[Monomial]) -> List[GaussRational]:
        index = {m: i for i, m in enumerate(basis)}
        vec = [ZERO] * len(basis)
        for mono, coeff in self._coeffs.items():
            if mono not in index:
                raise FormException(f"Monomial {monomial_name(mono, self.n)} outside the basis",
                                    error_code="WRONG_BIDEGREE")
            vec[index[mono]] = coeff.constant_value()
        return vec

    @classmethod
    def from_vector(cls, n: int, basis: Sequence[Monomial], vec: Sequence[GaussRational]) -> "Form":
        return cls(n, {m: ParamPoly.const(x) for m, x in zip(basis, vec) if x})

    def __str__(self) -> str:
        return format_form(self)

    def __repr__(self) -> str:
        return f"Form(n={self.n}, {format_form(self)})"


# printing

def coefficient_terms(coeff: ParamPoly) -> List[Tuple[str, str]]:
    """Split a coefficient into (sign, factor-string) pairs in DSL syntax."""
    out = []
    for mono, c in coeff.items():
        sign = "+"
        if (c.im == 0 and c.re < 0) or (c.re == 0 and c.im < 0):
            sign, c = "-", -c
        factors = []
        if c != 1 or not mono:
            factors.append(str(c))
        for (name, bar), exp in mono:
            factors.extend([f"conj({name})" if bar else name] * exp)
        out.append((sign, " * ".join(factors)))
    return out


def format_form(form: Form) -> str:
    """Render in the manifold DSL term syntax, e.g. ``- phi1 ^ phi2 + 2*i * phi3 ^ conj(phi3)``."""
    pieces: List[str] = []
    for mono, coeff in form.items():
        for sign, factors in coefficient_terms(coeff):
            if mono:
                body = monomial_name(mono, form.n) if factors == "1" or not factors else \
                    f"{factors} * {monomial_name(mono, form.n)}"
            else:
                body = factors
            if not pieces:
                pieces.append(body if sign == "+" else f"- {body}")
            else:
                pieces.append(f"{sign} {body}")
    return " ".join(pieces) if pieces else "0"


# basic forms

def phi(n: int, j: int) -> Form:
    """The (1,0)-coframe element phi_j (1-based)."""
    return Form(n, {(j - 1,): 1})


def phibar(n: int, j: int) -> Form:
    return Form(n, {(n + j - 1,): 1})


def wedge(a: Form, b: Form) -> Form:
    return a.wedge(b)


def wedge_all(forms: Iterable[Form], n: int) -> Form:
    result = Form.constant(n, 1)
    for f in forms:
        result = result.wedge(f)
    return result


def wedge_power(a: Form, k: int) -> Form:
    return wedge_all([a] * k, a.n)


def conj(a: Form) -> Form:
    return a.conj()


def bidegree_component(a: Form, p: int, q: int) -> Form:
    return a.component(p, q)


@lru_cache(maxsize=None)
def _volume_monomial_factor(n: int) -> GaussRational:
    """c with vol = c * phi1^..^phin^conj(phi1)^..^conj(phin)."""
    vol = wedge_all((phi(n, j).wedge(phibar(n, j)).scale(I) for j in range(1, n + 1)), n)
    return vol.coefficient(tuple(range(2 * n))).constant_value()


def volume_form(n: int) -> Form:
    return Form(n, {tuple(range(2 * n)): _volume_monomial_factor(n)})


def top_coefficient(a: Form) -> ParamPoly:
    """Coefficient of the canonical volume form."""
    full = tuple(range(2 * a.n))
    return a.coefficient(full) * (GaussRational(1) / _volume_monomial_factor(a.n))


@lru_cache(maxsize=None)
def basis(n: int, p: int, q: int) -> Tuple[Monomial, ...]:
    """Lexicographic monomial basis of the (p,q)-forms."""
    if p < 0 or q < 0 or p > n or q > n:
        return ()
    return tuple(h + a for h, a in product(combinations(range(n), p), combinations(range(n, 2 * n), q)))


@lru_cache(maxsize=None)
def total_basis(n: int, k: int) -> Tuple[Monomial, ...]:
    """Lexicographic monomial basis of all k-forms."""
    if k < 0 or k > 2 * n:
        return ()
    return tuple(combinations(range(2 * n), k))


def substitute(a: Form, images: Sequence[Form]) -> Form:
    """Replace generator g by the 1-form images[g] (linear change of coframe)."""
    if len(images) != 2 * a.n:
        raise FormException("substitute needs one image per generator", error_code="DIMENSION_MISMATCH")
    n_out = images[0].n if images else a.n
    result = Form.zero(n_out)
    for mono, coeff in a.items():
        result = result + wedge_all((images[g] for g in mono), n_out).scale(coeff)
    return result


# Hermitian probes

class HermitianMatrix:
    """n x n matrix extracted from a real (1,1)- or (n-1,n-1)-form."""

    __slots__ = ("size", "entries")

    def __init__(self, entries: Sequence[Sequence[Coefficient]]):
        self.size = len(entries)
        self.entries = tuple(tuple(ParamPoly.coerce(x) for x in row) for row in entries)

    def rows(self) -> List[List[GaussRational]]:
        """Constant entries (raises on parametric entries)."""
        return [[x.constant_value() for x in row] for row in self.entries]

    def evaluate(self, point) -> "HermitianMatrix":
        return HermitianMatrix([[x.evaluate(point) for x in row] for row in self.entries])

    def is_zero(self) -> bool:
        return all(x.is_zero() for row in self.entries for x in row)

    def is_hermitian(self) -> bool:
        return all(self.entries[j][k] == self.entries[k][j].conj()
                   for j in range(self.size) for k in range(self.size))

    def is_positive_definite(self) -> bool:
        return linalg.is_positive_definite(self.rows())

    def is_positive_semidefinite(self) -> bool:
        return linalg.is_positive_semidefinite(self.rows())

    def to_complex(self) -> List[List[complex]]:
        return [[complex(x) for x in row] for row in self.rows()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HermitianMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self) -> str:
        return "HermitianMatrix([" + ", ".join("[" + ", ".join(str(x) for x in row) + "]"
                                               for row in self.entries) + "])"


def _require_pure(a: Form, p: int, q: int):
    wrong = [bd for bd in a.bidegrees() if bd != (p, q)]
    if wrong:
        raise FormException(f"Expected a form of type ({p},{q}), found components {wrong}",
                            error_code="WRONG_BIDEGREE")
    if not a.is_real():
        raise FormException("Hermitian probe needs a real form", error_code="NOT_REAL")


def hermitian_of_11(a: Form) -> HermitianMatrix:
    """H with a = i * sum H_jk phi_j ^ conj(phi_k)."""
    _require_pure(a, 1, 1)
    n = a.n
    minus_i = ParamPoly.const(GaussRational(0, -1))
    return HermitianMatrix([[a.coefficient((j, n + k)) * minus_i for k in range(n)] for j in range(n)])


def _elementary_11(n: int, j: int, k: int) -> Form:
    return phi(n, j + 1).wedge(phibar(n, k + 1)).scale(I)


def hermitian_of_n1n1(a: Form) -> HermitianMatrix:
    """H with a ^ i phi_j ^ conj(phi_k) = H_jk vol."""
    n = a.n
    _require_pure(a, n - 1, n - 1)
    return HermitianMatrix([[top_coefficient(a.wedge(_elementary_11(n, j, k))) for k in range(n)]
                            for j in range(n)])


def form_from_hermitian_11(h: Sequence[Sequence[Coefficient]]) -> Form:
    """Inverse of :func:`hermitian_of_11`."""
    n = len(h)
    result = Form.zero(n)
    for j in range(n):
        for k in range(n):
            result = result + _elementary_11(n, j, k).scale(h[j][k])
    return result


@lru_cache(maxsize=None)
def _dual_n1n1_element(n: int, j: int, k: int) -> Form:
    """(n-1,n-1)-monomial form D with D ^ i phi_a ^ conj(phi_b) = delta_(j,a) delta_(k,b) vol."""
    hol = tuple(g for g in range(n) if g != j)
    anti = tuple(n + g for g in range(n) if g != k)
    candidate = Form(n, {hol + anti: 1})
    pairing = top_coefficient(candidate.wedge(_elementary_11(n, j, k))).constant_value()
    return candidate.scale(GaussRational(1) / pairing)


def dual_n1n1(h: Sequence[Sequence[Coefficient]]) -> Form:
    """Inverse of :func:`hermitian_of_n1n1`: the (n-1,n-1)-form whose probe is h."""
    n = len(h)
    result = Form.zero(n)
    for j in range(n):
        for k in range(n):
            result = result + _dual_n1n1_element(n, j, k).scale(h[j][k])
    return result


# differential

class DifferentialAlgebra:
    """d, del and delbar on invariant forms, extended from the structure equations by Leibniz."""

    def __init__(self, n: int, d_table: Sequence[Form]):
        self.n = n
        self.generator_d: Tuple[Form, ...] = tuple(d_table) + tuple(f.conj() for f in d_table)
        self._cache: Dict[Monomial, Form] = {}

    def d_monomial(self, mono: Monomial) -> Form:
        cached = self._cache.get(mono)
        if cached is not None:
            return cached
        n = self.n
        result = Form.zero(n)
        for i, g in enumerate(mono):
            before = Form(n, {mono[:i]: 1})
            after = Form(n, {mono[i + 1:]: 1})
            term = before.wedge(self.generator_d[g]).wedge(after)
            result = result + (term if i % 2 == 0 else -term)
        self._cache[mono] = result
        return result

    def d(self, a: Form) -> Form:
        result = Form.zero(self.n)
        for mono, coeff in a.items():
            result = result + self.d_monomial(mono).scale(coeff)
        return result

    def _typed(self, a: Form, shift: Tuple[int, int]) -> Form:
        result = Form.zero(self.n)
        for p, q in a.bidegrees():
            result = result + self.d(a.component(p, q)).component(p + shift[0], q + shift[1])
        return result

    def del_(self, a: Form) -> Form:
        return self._typed(a, (1, 0))

    def delbar(self, a: Form) -> Form:
        return self._typed(a, (0, 1))

    def ddbar(self, a: Form) -> Form:
        return self.del_(self.delbar(a))

    def matrix(self, operator: Callable[[Form], Form], source: Sequence[Monomial],
               target: Sequence[Monomial]) -> List[List[GaussRational]]:
        """Matrix (rows = target monomials) of a linear operator between monomial bases."""
        columns = [operator(Form(self.n, {m: 1})).to_vector(target) for m in source]
        return [[columns[c][r] for c in range(len(source))] for r in range(len(target))]


def algebra_of(manifold) -> DifferentialAlgebra:
    """Accepts a ComplexNilmanifold, StructureEquations or DifferentialAlgebra."""
    if isinstance(manifold, DifferentialAlgebra):
        return manifold
    return manifold.algebra


def d(a: Form, manifold) -> Form:
    return algebra_of(manifold).d(a)


def del_(a: Form, manifold) -> Form:
    return algebra_of(manifold).del_(a)


def delbar(a: Form, manifold) -> Form:
    return algebra_of(manifold).delbar(a)


def ddbar(a: Form, manifold) -> Form:
    return algebra_of(manifold).ddbar(a)
