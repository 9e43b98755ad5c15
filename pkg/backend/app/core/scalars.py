# app/core/scalars.py
"""
Exact scalars used everywhere in the package.

``Rational`` is :class:`fractions.Fraction` (always reduced, positive denominator).
``GaussRational`` is a Gaussian rational ``re + im*i``.  ``ParamPoly`` is a polynomial
with Gaussian-rational coefficients in formal deformation parameters ``t_k`` and their
formal conjugates, written ``conj(t_k)`` (the ``s_k`` of the documentation).  A parameter
and its conjugate are independent variables; they are only tied together when a
polynomial is evaluated at a point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, Mapping, Tuple, Union
import logging

from .exceptions import EvaluationException

logger = logging.getLogger(__name__)

Rational = Fraction

Number = Union[int, Fraction, "GaussRational"]


def _as_fraction(value: Union[int, Fraction]) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"Cannot use {type(value).__name__} as an exact rational")


def _format_fraction(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class GaussRational:
    """Gaussian rational ``re + im*i`` with exact rational parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _as_fraction(self.re))
        object.__setattr__(self, "im", _as_fraction(self.im))

    @classmethod
    def coerce(cls, value: Number) -> "GaussRational":
        if isinstance(value, GaussRational):
            return value
        return cls(_as_fraction(value))

    # ring operations

    def __add__(self, other: Number) -> "GaussRational":
        other = GaussRational.coerce(other)
        return GaussRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self) -> "GaussRational":
        return GaussRational(-self.re, -self.im)

    def __sub__(self, other: Number) -> "GaussRational":
        return self + (-GaussRational.coerce(other))

    def __rsub__(self, other: Number) -> "GaussRational":
        return GaussRational.coerce(other) - self

    def __mul__(self, other: Number) -> "GaussRational":
        other = GaussRational.coerce(other)
        return GaussRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "GaussRational":
        other = GaussRational.coerce(other)
        norm = other.abs2()
        if norm == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * other.conj()
        return GaussRational(num.re / norm, num.im / norm)

    def __rtruediv__(self, other: Number) -> "GaussRational":
        return GaussRational.coerce(other) / self

    def __pow__(self, exponent: int) -> "GaussRational":
        if exponent < 0:
            return GaussRational(1) / (self ** -exponent)
        result = GaussRational(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        if isinstance(other, GaussRational):
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    # involution and norms

    def conj(self) -> "GaussRational":
        return GaussRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        """Literal syntax of the manifold DSL: ``a/b``, ``a/b*i`` or ``(a/b+c/d*i)``."""
        if self.im == 0:
            return _format_fraction(self.re)
        imag = "i" if self.im == 1 else "-i" if self.im == -1 else f"{_format_fraction(self.im)}*i"
        if self.re == 0:
            return imag
        sign = "-" if self.im < 0 else "+"
        magnitude = "i" if abs(self.im) == 1 else f"{_format_fraction(abs(self.im))}*i"
        return f"({_format_fraction(self.re)}{sign}{magnitude})"

    def __repr__(self) -> str:
        return f"GaussRational({self})"


ZERO = GaussRational(0)
ONE = GaussRational(1)
I = GaussRational(0, 1)


# A variable is (name, conjugated?); a monomial is a sorted tuple of (variable, exponent).
Variable = Tuple[str, bool]
PolyMonomial = Tuple[Tuple[Variable, int], ...]

_CONSTANT: PolyMonomial = ()


def _mul_monomials(a: PolyMonomial, b: PolyMonomial) -> PolyMonomial:
    if not a:
        return b
    if not b:
        return a
    exps: Dict[Variable, int] = dict(a)
    for var, exp in b:
        exps[var] = exps.get(var, 0) + exp
    return tuple(sorted(exps.items()))


def _conj_monomial(mono: PolyMonomial) -> PolyMonomial:
    return tuple(sorted(((name, not bar), exp) for (name, bar), exp in mono))


def _monomial_degree(mono: PolyMonomial) -> int:
    return sum(exp for _, exp in mono)


def _monomial_sort_key(mono: PolyMonomial):
    return (_monomial_degree(mono), mono)


def _format_variable(var: Variable) -> str:
    name, bar = var
    return f"conj({name})" if bar else name


class ParamPoly:
    """Polynomial in parameters ``t_k`` and formal conjugates ``conj(t_k)``.

    Instances are immutable; zero coefficients are never stored.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[PolyMonomial, Number] = None):
        cleaned: Dict[PolyMonomial, GaussRational] = {}
        for mono, coeff in (terms or {}).items():
            coeff = GaussRational.coerce(coeff)
            if coeff:
                cleaned[tuple(sorted(mono))] = coeff
        self._terms = cleaned
        self._hash = None

    # constructors

    @classmethod
    def const(cls, value: Number) -> "ParamPoly":
        return cls({_CONSTANT: value})

    @classmethod
    def var(cls, name: str, conjugate: bool = False) -> "ParamPoly":
        return cls({(((name, conjugate), 1),): 1})

    @classmethod
    def coerce(cls, value: Union["ParamPoly", Number]) -> "ParamPoly":
        if isinstance(value, ParamPoly):
            return value
        return cls.const(value)

    # inspection

    @property
    def terms(self) -> Mapping[PolyMonomial, GaussRational]:
        return dict(self._terms)

    def items(self) -> Iterator[Tuple[PolyMonomial, GaussRational]]:
        """Terms in canonical order (by degree, then lexicographically)."""
        for mono in sorted(self._terms, key=_monomial_sort_key):
            yield mono, self._terms[mono]

    @property
    def variables(self) -> Tuple[str, ...]:
        """Parameter names occurring in the polynomial (conjugates reported by base name)."""
        return tuple(sorted({name for mono in self._terms for (name, _), _ in mono}))

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(mono == _CONSTANT for mono in self._terms)

    def constant_value(self) -> GaussRational:
        if not self.is_constant():
            raise EvaluationException(
                f"Polynomial {self} depends on parameters {list(self.variables)}",
                error_code="PARAMETRIC_VALUE",
            )
        return self._terms.get(_CONSTANT, ZERO)

    def coefficient(self, mono: PolyMonomial) -> GaussRational:
        return self._terms.get(tuple(sorted(mono)), ZERO)

    def degree(self) -> int:
        return max((_monomial_degree(m) for m in self._terms), default=0)

    def homogeneous_part(self, degree: int) -> "ParamPoly":
        return ParamPoly({m: c for m, c in self._terms.items() if _monomial_degree(m) == degree})

    # ring operations

    def __add__(self, other) -> "ParamPoly":
        other = ParamPoly.coerce(other)
        result = dict(self._terms)
        for mono, coeff in other._terms.items():
            result[mono] = result.get(mono, ZERO) + coeff
        return ParamPoly(result)

    __radd__ = __add__

    def __neg__(self) -> "ParamPoly":
        return ParamPoly({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "ParamPoly":
        return self + (-ParamPoly.coerce(other))

    def __rsub__(self, other) -> "ParamPoly":
        return ParamPoly.coerce(other) - self

    def __mul__(self, other) -> "ParamPoly":
        if not isinstance(other, ParamPoly):
            scalar = GaussRational.coerce(other)
            return ParamPoly({m: c * scalar for m, c in self._terms.items()})
        result: Dict[PolyMonomial, GaussRational] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _mul_monomials(m1, m2)
                result[mono] = result.get(mono, ZERO) + c1 * c2
        return ParamPoly(result)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "ParamPoly":
        result = ParamPoly.const(1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction, GaussRational)):
            other = ParamPoly.const(other)
        if not isinstance(other, ParamPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._terms)

    # involution and evaluation

    def conj(self) -> "ParamPoly":
        return ParamPoly({_conj_monomial(m): c.conj() for m, c in self._terms.items()})

    def evaluate(self, point: Mapping[str, Number]) -> GaussRational:
        total = ZERO
        for mono, coeff in self._terms.items():
            value = coeff
            for (name, bar), exp in mono:
                if name not in point:
                    raise EvaluationException(
                        f"Unbound variable '{name}' while evaluating {self}",
                        error_code="UNBOUND_VARIABLE",
                    )
                z = GaussRational.coerce(point[name])
                value = value * (z.conj() if bar else z) ** exp
            total = total + value
        return total

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, coeff in self.items():
            factors = [_format_variable(var) if exp == 1 else f"{_format_variable(var)}^{exp}"
                       for var, exp in mono]
            if not factors:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append("*".join(factors))
            else:
                parts.append("*".join([str(coeff)] + factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ParamPoly({self})"


def poly_conj(p: ParamPoly) -> ParamPoly:
    """Involution swapping every t_k with conj(t_k) and conjugating coefficients."""
    return p.conj()


def poly_eval(p: ParamPoly, point: Mapping[str, Number]) -> GaussRational:
    """Evaluate at t_k := z_k; conj(t_k) is bound to conj(z_k) automatically."""
    return p.evaluate(point)


def rationalize(x: float, max_denominator: int) -> Fraction:
    """Best rational approximation of ``x`` with denominator at most ``max_denominator``."""
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    return Fraction(x).limit_denominator(max_denominator)


def parse_rational(text: str) -> Fraction:
    """Parse ``a`` or ``a/b`` (optionally signed) into an exact rational."""
    return Fraction(text.strip())
