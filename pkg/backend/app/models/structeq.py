# app/models/structeq.py
"""
Structure equations of an invariant (1,0)-coframe and the manifold DSL.

A ``.nil`` file is line oriented::

    # Iwasawa manifold
    dim 3
    d phi1 = 0
    d phi2 = 0
    d phi3 = -1 * phi1 ^ phi2

Optional ``params t s`` declares deformation parameters usable in coefficients, either
bare or as ``conj(t)``.  Terms are ``<coeff> * <gen> ^ <gen>`` where the coefficient is a
product of Gaussian-rational literals, ``i``, parameters and parenthesised coefficient
sums.  Sign convention: ``d phi(X, Y) = -phi([X, Y])``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Dict, List, Mapping, Optional, Sequence, Tuple
import logging
import re

from ..core.config import settings
from ..core.exceptions import (
    InconsistencyException, ParseException, StructureException, ValidationException,
)
from ..core.scalars import GaussRational, I, ParamPoly, ZERO
from ..core import linalg
from .exterior import (
    DifferentialAlgebra, Form, bidegree_of, format_form, monomial_name, substitute,
    top_coefficient, total_basis,
)

logger = logging.getLogger(__name__)

RESERVED_NAMES = {"i", "conj", "dim", "params", "d"}
_GENERATOR = re.compile(r"phi(\d+)$")

_TOKEN_SPEC = [
    ("NUMBER", r"\d+(?:/\d+)?"),
    ("NAME", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PLUS", r"\+"),
    ("MINUS", r"-"),
    ("STAR", r"\*"),
    ("CARET", r"\^"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("EQUALS", r"="),
    ("SKIP", r"[ \t\r]+"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{kind}>{pattern})" for kind, pattern in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str, line: int = 1) -> List[Token]:
    tokens = []
    for match in _TOKEN_RE.finditer(text):
        kind = match.lastgroup
        column = match.start() + 1
        if kind == "SKIP":
            continue
        if kind == "MISMATCH":
            raise ParseException(f"Unexpected character {match.group()!r}", line, column)
        tokens.append(Token(kind, match.group(), line, column))
    tokens.append(Token("END", "", line, len(text) + 1))
    return tokens


class _TermParser:
    """Recursive descent over one expression: sum of signed products."""

    def __init__(self, tokens: List[Token], n: int, params: Sequence[str],
                 required_degree: Optional[int] = None):
        self.tokens = tokens
        self.pos = 0
        self.n = n
        self.params = set(params)
        self.required_degree = required_degree

    # cursor

    def peek(self, kind: str = None) -> Optional[Token]:
        token = self.tokens[self.pos]
        if kind is None or token.kind == kind:
            return token
        return None

    def accept(self, kind: str) -> Optional[Token]:
        token = self.peek(kind)
        if token is not None:
            self.pos += 1
        return token

    def expect(self, kind: str, what: str) -> Token:
        token = self.accept(kind)
        if token is None:
            self.fail(f"Expected {what}", self.peek())
        return token

    @staticmethod
    def fail(message: str, token: Token, code: str = "SYNTAX"):
        raise ParseException(message, token.line, token.column, error_code=code)

    # grammar

    def expression(self) -> Form:
        terms = []
        sign = -1 if self.accept("MINUS") else 1
        if sign == 1:
            self.accept("PLUS")
        while True:
            start = self.peek()
            coeff, gens = self.term()
            terms.append((start, coeff * sign, gens))
            if self.accept("PLUS"):
                sign = 1
            elif self.accept("MINUS"):
                sign = -1
            else:
                break
        end = self.peek()
        if end.kind != "END":
            self.fail(f"Unexpected {end.text!r}", end)
        return self._assemble(terms, end)

    def _assemble(self, terms, end: Token) -> Form:
        collected = []
        pending = ParamPoly()
        pending_token = None
        for start, coeff, gens in terms:
            if self.required_degree is not None and not gens:
                # bare literal such as ``1/2 + 3/4*i * phi1 ^ phi2``: join the next coefficient
                pending = pending + coeff
                pending_token = pending_token or start
                continue
            if self.required_degree is not None and len(gens) != self.required_degree:
                self.fail(f"Expected a {self.required_degree}-form term, found {len(gens)} factor(s)",
                          start, "WRONG_DEGREE")
            collected.append((gens, coeff + pending))
            pending, pending_token = ParamPoly(), None
        if pending:
            self.fail("Coefficient without a monomial", pending_token, "MALFORMED_TERM")
        return Form.from_terms(self.n, collected)

    def term(self) -> Tuple[ParamPoly, List[int]]:
        coeff = ParamPoly.const(1)
        gens: List[int] = []
        while True:
            token = self.peek()
            kind, value = self.item()
            if kind == "gen":
                if value in gens:
                    self.fail(f"Repeated factor {monomial_name((value,), self.n)} makes the term vanish",
                              token, "MALFORMED_TERM")
                gens.append(value)
            else:
                if gens:
                    self.fail("Coefficient after a generator", token)
                coeff = coeff * value
            separator = self.peek()
            if self.accept("STAR"):
                if gens:
                    self.fail("Generators are joined with '^'", separator)
                continue
            if self.accept("CARET"):
                if not gens:
                    self.fail("'^' must join generators", separator)
                continue
            return coeff, gens

    def item(self):
        token = self.peek()
        if self.accept("NUMBER"):
            return "coeff", ParamPoly.const(GaussRational(Fraction(token.text)))
        if self.accept("LPAREN"):
            inner = self.coefficient_sum()
            self.expect("RPAREN", "')'")
            return "coeff", inner
        if self.accept("NAME"):
            if token.text == "conj":
                self.expect("LPAREN", "'(' after conj")
                name = self.expect("NAME", "a generator or parameter name")
                self.expect("RPAREN", "')'")
                generator = self._generator(name)
                if generator is not None:
                    return "gen", generator + self.n
                return "coeff", ParamPoly.var(self._param(name), conjugate=True)
            if token.text == "i":
                return "coeff", ParamPoly.const(I)
            generator = self._generator(token)
            if generator is not None:
                return "gen", generator
            return "coeff", ParamPoly.var(self._param(token))
        self.fail(f"Unexpected {token.text or 'end of line'!r}", token)

    def coefficient_sum(self) -> ParamPoly:
        total = ParamPoly()
        sign = -1 if self.accept("MINUS") else 1
        while True:
            product_ = ParamPoly.const(sign)
            while True:
                token = self.peek()
                kind, value = self.item()
                if kind == "gen":
                    self.fail("Generators are not allowed inside a coefficient", token)
                product_ = product_ * value
                if not self.accept("STAR"):
                    break
            total = total + product_
            if self.accept("PLUS"):
                sign = 1
            elif self.accept("MINUS"):
                sign = -1
            else:
                return total

    def _generator(self, token: Token) -> Optional[int]:
        match = _GENERATOR.match(token.text)
        if not match:
            return None
        index = int(match.group(1))
        if not 1 <= index <= self.n:
            self.fail(f"Generator {token.text} out of range 1..{self.n}", token, "INDEX_RANGE")
        return index - 1

    def _param(self, token: Token) -> str:
        if token.text not in self.params:
            self.fail(f"Undeclared parameter {token.text!r}", token, "UNDECLARED_PARAMETER")
        return token.text


@dataclass(frozen=True)
class StructureEquations:
    """dφ^k for k = 1..n as 2-forms with ParamPoly coefficients."""

    n: int
    d_table: Tuple[Form, ...]
    params: Tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.d_table) != self.n:
            raise ValidationException(f"Expected {self.n} equations, got {len(self.d_table)}",
                                      error_code="DIMENSION")
        for k, form in enumerate(self.d_table, start=1):
            if form.n != self.n or any(deg != 2 for deg in form.degrees()):
                raise ValidationException(f"d phi{k} must be a 2-form in dimension {self.n}",
                                          error_code="WRONG_DEGREE")

    @cached_property
    def algebra(self) -> DifferentialAlgebra:
        return DifferentialAlgebra(self.n, self.d_table)

    def equation(self, k: int) -> Form:
        """dφ^k, 1-based."""
        return self.d_table[k - 1]

    @property
    def is_parametric(self) -> bool:
        return bool(self.params) or any(not form.is_constant() for form in self.d_table)

    def __str__(self) -> str:
        return print_manifold(self)


def parse_manifold(text: str) -> StructureEquations:
    """Parse the manifold DSL into canonical structure equations."""
    n: Optional[int] = None
    params: List[str] = []
    equations: Dict[int, Form] = {}
    last_line = 1
    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        if not content.strip():
            continue
        last_line = line_no
        tokens = tokenize(content, line_no)
        head = tokens[0]
        if n is None:
            if head.kind != "NAME" or head.text != "dim":
                raise ParseException("First statement must be 'dim <n>'", head.line, head.column,
                                     error_code="MISSING_DIM")
            value = tokens[1]
            if value.kind != "NUMBER" or "/" in value.text or int(value.text) < 1 or tokens[2].kind != "END":
                raise ParseException("'dim' takes one positive integer", value.line, value.column)
            n = int(value.text)
            continue
        if head.kind == "NAME" and head.text == "params":
            if equations:
                raise ParseException("'params' must precede the equations", head.line, head.column)
            for token in tokens[1:-1]:
                if token.kind != "NAME":
                    raise ParseException(f"Invalid parameter name {token.text!r}", token.line, token.column)
                if token.text in RESERVED_NAMES or _GENERATOR.match(token.text):
                    raise ParseException(f"Reserved name {token.text!r} cannot be a parameter",
                                         token.line, token.column, error_code="RESERVED_NAME")
                if token.text in params:
                    raise ParseException(f"Parameter {token.text!r} declared twice",
                                         token.line, token.column, error_code="DUPLICATE_PARAMETER")
                params.append(token.text)
            continue
        if head.kind == "NAME" and head.text == "dim":
            raise ParseException("'dim' declared twice", head.line, head.column)
        if head.kind != "NAME" or head.text != "d":
            raise ParseException(f"Expected 'd phi<k> = ...', found {head.text!r}", head.line, head.column)
        target = tokens[1]
        match = _GENERATOR.match(target.text) if target.kind == "NAME" else None
        if not match:
            raise ParseException("Expected 'phi<k>' after 'd'", target.line, target.column)
        k = int(match.group(1))
        if not 1 <= k <= n:
            raise ParseException(f"Generator {target.text} out of range 1..{n}", target.line,
                                 target.column, error_code="INDEX_RANGE")
        if k in equations:
            raise ParseException(f"Duplicate equation for {target.text}", head.line, head.column,
                                 error_code="DUPLICATE_EQUATION")
        if tokens[2].kind != "EQUALS":
            raise ParseException("Expected '='", tokens[2].line, tokens[2].column)
        parser = _TermParser(tokens[3:], n, params, required_degree=2)
        equations[k] = parser.expression()

    if n is None:
        raise ParseException("Empty manifold description", 1, 1, error_code="MISSING_DIM")
    missing = [k for k in range(1, n + 1) if k not in equations]
    if missing:
        raise ParseException(f"Missing equation for phi{missing[0]}", last_line, 1,
                             error_code="MISSING_EQUATION")
    eqs = StructureEquations(n=n, d_table=tuple(equations[k] for k in range(1, n + 1)),
                             params=tuple(params))
    logger.debug(f"Parsed structure equations: n={n}, params={params}")
    return eqs


def parse_form(text: str, n: int, params: Sequence[str] = ()) -> Form:
    """Parse a term sum of any degree (the syntax forms are printed in)."""
    tokens: List[Token] = []
    for line_no, raw in enumerate(text.splitlines() or [""], start=1):
        tokens.extend(tokenize(raw, line_no)[:-1])
    tokens.append(Token("END", "", max(1, len(text.splitlines())), 1))
    if len(tokens) == 1:
        raise ParseException("Empty form", 1, 1)
    return _TermParser(tokens, n, params).expression()


def parse_scalar(text: str) -> GaussRational:
    """A Gaussian rational in coefficient syntax, e.g. ``1/10`` or ``(1/2 - 3/4*i)``."""
    form = parse_form(text, 1)
    if any(deg != 0 for deg in form.degrees()):
        raise ParseException(f"Expected a number, found {text!r}", 1, 1)
    return form.coefficient(()).constant_value()


def print_manifold(eqs: StructureEquations) -> str:
    lines = [f"dim {eqs.n}"]
    if eqs.params:
        lines.append("params " + " ".join(eqs.params))
    for k, form in enumerate(eqs.d_table, start=1):
        lines.append(f"d phi{k} = {format_form(form)}")
    return "\n".join(lines) + "\n"


def instantiate(eqs: StructureEquations, point: Mapping[str, object]) -> StructureEquations:
    """Evaluate every parameter at ``point``; the result is parameter-free."""
    return StructureEquations(n=eqs.n, d_table=tuple(f.evaluate(point) for f in eqs.d_table))


@dataclass(frozen=True)
class ManifoldFlags:
    integrable: bool
    d_squared_zero: bool
    unimodular: bool
    nilpotent: bool
    parallelisable: bool
    nilpotency_steps: Tuple[int, ...] = ()


@dataclass(frozen=True)
class ComplexNilmanifold:
    """Validated, parameter-free structure equations."""

    eqs: StructureEquations
    flags: ManifoldFlags
    name: Optional[str] = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.eqs.n

    @property
    def algebra(self) -> DifferentialAlgebra:
        return self.eqs.algebra


def _generator_form(n: int, g: int) -> Form:
    return Form(n, {(g,): 1})


def _ascending_flag(eqs: StructureEquations, generators: Sequence[int]) -> List[linalg.Matrix]:
    """V_0 = 0, V_(j+1) = {a in span(generators) : da in Λ²V_j}; rows in generator coordinates."""
    n = eqs.n
    algebra = eqs.algebra
    two_basis = total_basis(n, 2)
    k = len(generators)
    d_columns = [algebra.d(_generator_form(n, g)).to_vector(two_basis) for g in generators]
    steps: List[linalg.Matrix] = [[]]
    while True:
        current = steps[-1]
        one_forms = [Form(n, {(generators[j],): x for j, x in enumerate(vec) if x}) for vec in current]
        wedges = [one_forms[a].wedge(one_forms[b]).to_vector(two_basis)
                  for a in range(len(one_forms)) for b in range(a + 1, len(one_forms))]
        span = linalg.row_space(wedges, len(two_basis))
        # x with D x in span(W): kernel of [D | -W]
        columns = d_columns + [[-x for x in w] for w in span]
        relations = linalg.nullspace(linalg.transpose(columns, len(two_basis)), len(columns))
        following = linalg.row_space([rel[:k] for rel in relations], k)
        if len(following) == len(current):
            return steps
        steps.append(following)


def validate(eqs: StructureEquations, name: Optional[str] = None) -> ComplexNilmanifold:
    """Prove d² = 0 and integrability, compute the advisory flags."""
    if eqs.is_parametric:
        raise ValidationException("Structure equations depend on parameters; instantiate them first",
                                  error_code="PARAMETRIC_INPUT")
    n = eqs.n
    if n > settings.MAX_DIMENSION:
        raise ValidationException(f"Dimension {n} exceeds the supported maximum {settings.MAX_DIMENSION}",
                                  error_code="DIMENSION")
    algebra = eqs.algebra

    for g, image in enumerate(algebra.generator_d):
        dd = algebra.d(image)
        if not dd.is_zero():
            raise ValidationException(
                f"d(d {monomial_name((g,), n)}) = {format_form(dd)} is not zero",
                error_code="D2_NONZERO",
            )

    for k, form in enumerate(eqs.d_table, start=1):
        bad = form.component(0, 2)
        if not bad.is_zero():
            raise ValidationException(f"d phi{k} has a (0,2)-part {format_form(bad)}",
                                      error_code="NOT_INTEGRABLE")

    unimodular = all(top_coefficient(algebra.d_monomial(mono)).is_zero()
                     for mono in total_basis(n, 2 * n - 1))
    if not unimodular:
        logger.warning("Structure is not unimodular: metric infeasibility certificates disabled")

    steps = _ascending_flag(eqs, list(range(2 * n)))
    nilpotent = len(steps[-1]) == 2 * n
    if not nilpotent:
        logger.warning("Structure is not nilpotent: cohomology is invariant-level only")

    parallelisable = all(bidegree_of(mono, n) == (2, 0) for form in eqs.d_table for mono, _ in form.items())

    flags = ManifoldFlags(
        integrable=True,
        d_squared_zero=True,
        unimodular=unimodular,
        nilpotent=nilpotent,
        parallelisable=parallelisable,
        nilpotency_steps=tuple(len(s) for s in steps[1:]),
    )
    logger.info(f"Validated manifold {name or ''} n={n}: {flags}")
    return ComplexNilmanifold(eqs=eqs, flags=flags, name=name)


def change_of_coframe(eqs: StructureEquations, forward: Sequence[Sequence[GaussRational]]) -> StructureEquations:
    """Structure equations of the coframe ``new_i = sum_g forward[i][g] old_g`` (2n x 2n)."""
    n = eqs.n
    backward = linalg.inverse(forward)
    if backward is None:
        raise StructureException("Coframe change is not invertible", error_code="NOT_INVERTIBLE")
    algebra = eqs.algebra
    images = [Form(n, {(j,): backward[g][j] for j in range(2 * n) if backward[g][j]}) for g in range(2 * n)]
    table = []
    for i in range(n):
        d_new = Form.zero(n)
        for g in range(2 * n):
            if forward[i][g]:
                d_new = d_new + algebra.generator_d[g].scale(forward[i][g])
        table.append(substitute(d_new, images))
    return StructureEquations(n=n, d_table=tuple(table), params=eqs.params)


def holomorphic_change(change: Sequence[Sequence[GaussRational]]) -> linalg.Matrix:
    """Extend an n x n change of (1,0)-coframe to the 2n x 2n block matrix diag(C, conj C)."""
    n = len(change)
    full = [[ZERO] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            full[i][j] = change[i][j]
            full[n + i][n + j] = change[i][j].conj()
    return full


@dataclass(frozen=True)
class ChevalleyFlag:
    change: Tuple[Tuple[GaussRational, ...], ...]
    steps: Tuple[int, ...]
    r: int
    eqs: StructureEquations


def chevalley_flag(manifold: ComplexNilmanifold) -> ChevalleyFlag:
    """Adapted (1,0)-coframe with strictly triangular structure constants."""
    if not manifold.flags.parallelisable:
        raise StructureException("Chevalley flag needs a complex parallelisable manifold",
                                 error_code="NOT_PARALLELISABLE")
    n = manifold.n
    steps = _ascending_flag(manifold.eqs, list(range(n)))
    if len(steps[-1]) != n:
        raise StructureException(f"Flag stalls at dimension {len(steps[-1])} < {n}",
                                 error_code="NOT_NILPOTENT")
    change: linalg.Matrix = []
    for previous, following in zip(steps, steps[1:]):
        change.extend(linalg.complement(previous, following, n))
    new_eqs = change_of_coframe(manifold.eqs, holomorphic_change(change))
    for mu, form in enumerate(new_eqs.d_table):
        for mono, _ in form.items():
            if any(g >= mu for g in mono):
                raise InconsistencyException(f"Adapted coframe is not triangular at phi{mu + 1}",
                                             error_code="INCONSISTENT")
    return ChevalleyFlag(
        change=tuple(tuple(row) for row in change),
        steps=tuple(len(s) for s in steps[1:]),
        r=len(steps[1]),
        eqs=new_eqs,
    )


BracketTable = Dict[Tuple[int, int], Dict[int, GaussRational]]


def structure_constants(manifold: ComplexNilmanifold) -> BracketTable:
    """[θ_i, θ_k] = -Σ_m c^m_ik θ_m for dφ^m = Σ_(i<k) c^m_ik φ^i ^ φ^k (0-based indices)."""
    if not manifold.flags.parallelisable:
        raise StructureException("Holomorphic frame brackets need a complex parallelisable manifold",
                                 error_code="NOT_PARALLELISABLE")
    table: BracketTable = {}
    for m, form in enumerate(manifold.eqs.d_table):
        for (i, k), coeff in form.items():
            c = coeff.constant_value()
            table.setdefault((i, k), {})[m] = table.get((i, k), {}).get(m, ZERO) - c
            table.setdefault((k, i), {})[m] = table.get((k, i), {}).get(m, ZERO) + c
    return table
