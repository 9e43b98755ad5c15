# app/services/kuranishi.py
"""
Kuranishi family of a complex parallelisable nilmanifold at the invariant level.

Tangent-valued forms are written ``Σ ψ^i ⊗ θ_i`` with ``θ_i`` the holomorphic frame dual to
``φ^i`` and ``ψ^i`` invariant (0,q)-forms.  The frame is holomorphic, so ∂̄ acts on the form
parts only, and on constant-coefficient forms the harmonic representatives are the
∂̄-closed ones.  The Maurer-Cartan equation ``∂̄ψ = ½[ψ, ψ]`` is solved degree by degree
in the parameters ``t_{iλ}`` with the minimal-norm (pseudo-inverse) solution at each step.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple
import logging
import re

from ..core import linalg
from ..core.exceptions import (
    FormException, InconsistencyException, KuranishiException, ParseException, StructureException,
)
from ..core.scalars import GaussRational, ParamPoly, ZERO
from ..models.exterior import Form, algebra_of, basis, coefficient_terms, monomial_name, total_basis
from ..models.structeq import ComplexNilmanifold, chevalley_flag, parse_form, structure_constants
from . import cohomology

logger = logging.getLogger(__name__)

HALF = GaussRational(Fraction(1, 2))

_THETA = re.compile(r"theta(\d+)\s*=\s*(.+)$")


class VectorForm:
    """Σ_i components[i] ⊗ θ_(i+1), every component an invariant (0,q)-form for one q."""

    __slots__ = ("n", "components")

    def __init__(self, n: int, components: Sequence[Form] = None):
        self.n = n
        components = tuple(components) if components is not None else tuple(Form.zero(n) for _ in range(n))
        if len(components) != n:
            raise FormException(f"Vector form needs {n} components, got {len(components)}",
                                error_code="DIMENSION_MISMATCH")
        bidegrees = {bd for c in components for bd in c.bidegrees()}
        if len(bidegrees) > 1 or any(p != 0 for p, _ in bidegrees):
            raise FormException(f"Vector form components must share one type (0,q), found {sorted(bidegrees)}",
                                error_code="WRONG_BIDEGREE")
        self.components = components

    @classmethod
    def zero(cls, n: int) -> "VectorForm":
        return cls(n)

    @classmethod
    def basic(cls, n: int, i: int, form: Form) -> "VectorForm":
        """θ_(i+1) ⊗ form (0-based frame index)."""
        return cls(n, [form if j == i else Form.zero(n) for j in range(n)])

    @property
    def q(self) -> Optional[int]:
        for component in self.components:
            for _, q in component.bidegrees():
                return q
        return None

    def items(self) -> Iterator[Tuple[int, tuple, ParamPoly]]:
        for i, component in enumerate(self.components):
            for mono, coeff in component.items():
                yield i, mono, coeff

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def is_constant(self) -> bool:
        return all(c.is_constant() for c in self.components)

    @property
    def variables(self) -> Tuple[str, ...]:
        return tuple(sorted({v for c in self.components for v in c.variables()}))

    def degree(self) -> int:
        """Total polynomial degree in the parameters."""
        return max((coeff.degree() for _, _, coeff in self.items()), default=0)

    def __add__(self, other: "VectorForm") -> "VectorForm":
        return VectorForm(self.n, [a + b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "VectorForm":
        return VectorForm(self.n, [-a for a in self.components])

    def __sub__(self, other: "VectorForm") -> "VectorForm":
        return self + (-other)

    def scale(self, factor) -> "VectorForm":
        return VectorForm(self.n, [a.scale(factor) for a in self.components])

    def homogeneous_part(self, degree: int) -> "VectorForm":
        return VectorForm(self.n, [a.map_coefficients(lambda c: c.homogeneous_part(degree))
                                   for a in self.components])

    def evaluate(self, point: Mapping[str, object]) -> "VectorForm":
        return VectorForm(self.n, [a.evaluate(point) for a in self.components])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorForm):
            return NotImplemented
        return self.n == other.n and self.components == other.components

    def __hash__(self) -> int:
        return hash((self.n, self.components))

    def __str__(self) -> str:
        pieces: List[str] = []
        for i, mono, coeff in self.items():
            frame = f"theta{i + 1} (x) {monomial_name(mono, self.n)}"
            for sign, factors in coefficient_terms(coeff):
                body = frame if factors == "1" else f"{factors} * {frame}"
                if not pieces:
                    pieces.append(body if sign == "+" else f"- {body}")
                else:
                    pieces.append(f"{sign} {body}")
        return " ".join(pieces) if pieces else "0"

    def __repr__(self) -> str:
        return f"VectorForm(n={self.n}, {self})"


@dataclass
class MaurerCartanSolution:
    psi: VectorForm
    degree: int
    parameters: Tuple[str, ...]
    pieces: List[VectorForm] = field(default_factory=list)
    obstruction: Optional[VectorForm] = None
    obstruction_degree: Optional[int] = None

    @property
    def obstructed(self) -> bool:
        return self.obstruction is not None


def parameter_name(i: int, lam: int) -> str:
    """t<i><λ> (1-based), with an underscore once an index has two digits."""
    return f"t{i}_{lam}" if i >= 10 or lam >= 10 else f"t{i}{lam}"


def _require_parallelisable(manifold: ComplexNilmanifold):
    if not manifold.flags.parallelisable:
        raise StructureException("Kuranishi computations need a complex parallelisable manifold",
                                 error_code="NOT_PARALLELISABLE")


def _closed_conjugates(manifold: ComplexNilmanifold) -> List[Form]:
    """conj of the closed part of the adapted coframe, in the original generators."""
    flag = chevalley_flag(manifold)
    n = manifold.n
    closed = []
    for row in flag.change[: flag.r]:
        eta = Form(n, {(j,): x for j, x in enumerate(row) if x})
        closed.append(eta.conj())
    return closed


def count_closed_oneforms(manifold: ComplexNilmanifold) -> int:
    """Number r of independent d-closed (1,0)-forms."""
    _require_parallelisable(manifold)
    n = manifold.n
    closed = cohomology.kernel(manifold, "d", basis(n, 1, 0), total_basis(n, 2))
    return len(closed)


def _h01(manifold: ComplexNilmanifold) -> int:
    n = manifold.n
    closed = cohomology.kernel(manifold, "delbar", basis(n, 0, 1), basis(n, 0, 2))
    exact = cohomology.image(manifold, "delbar", basis(n, 0, 0), basis(n, 0, 1))
    return len(closed) - len(exact)


def _h02(manifold: ComplexNilmanifold) -> int:
    n = manifold.n
    closed = cohomology.kernel(manifold, "delbar", basis(n, 0, 2), basis(n, 0, 3))
    exact = cohomology.image(manifold, "delbar", basis(n, 0, 1), basis(n, 0, 2))
    return len(closed) - len(exact)


def kodaira_h01(manifold: ComplexNilmanifold) -> Tuple[int, List[Form]]:
    """r and the closed conjugate coframe forms spanning H^{0,1}; checked against Dolbeault ranks."""
    _require_parallelisable(manifold)
    forms = _closed_conjugates(manifold)
    r = len(forms)
    h01 = _h01(manifold)
    if r != h01:
        raise InconsistencyException(f"Closed (1,0)-forms r={r} but h^(0,1)={h01}", error_code="INCONSISTENT")
    return r, forms


def tangent_h01_basis(manifold: ComplexNilmanifold) -> List[VectorForm]:
    """θ_i ⊗ conj(η_λ) for i = 1..n and λ = 1..r."""
    _, forms = kodaira_h01(manifold)
    n = manifold.n
    return [VectorForm.basic(n, i, form) for i in range(n) for form in forms]


def tangent_cohomology_dims(manifold: ComplexNilmanifold) -> Tuple[int, int]:
    """(dim H^{0,1}(T^{1,0}), dim H^{0,2}(T^{1,0})) = (n h^{0,1}, n h^{0,2})."""
    _require_parallelisable(manifold)
    n = manifold.n
    return n * _h01(manifold), n * _h02(manifold)


def kuranishi_bracket(manifold: ComplexNilmanifold, psi: VectorForm, tau: VectorForm) -> VectorForm:
    """[α ⊗ θ_i, β ⊗ θ_k] = α ^ β ⊗ [θ_i, θ_k], extended bilinearly."""
    n = manifold.n
    table = structure_constants(manifold)
    result = [Form.zero(n) for _ in range(n)]
    for (i, k), targets in table.items():
        a, b = psi.components[i], tau.components[k]
        if a.is_zero() or b.is_zero():
            continue
        product = a.wedge(b)
        for m, c in targets.items():
            if c:
                result[m] = result[m] + product.scale(c)
    return VectorForm(n, result)


def delbar_vector(manifold: ComplexNilmanifold, psi: VectorForm) -> VectorForm:
    _require_parallelisable(manifold)
    algebra = algebra_of(manifold)
    return VectorForm(manifold.n, [algebra.delbar(c) for c in psi.components])


def integrability_defect(manifold: ComplexNilmanifold, psi: VectorForm) -> VectorForm:
    """∂̄ψ - ½[ψ, ψ]."""
    return delbar_vector(manifold, psi) - kuranishi_bracket(manifold, psi, psi).scale(HALF)


def verify_integrability(manifold: ComplexNilmanifold, psi: VectorForm) -> bool:
    return integrability_defect(manifold, psi).is_zero()


def bianchi_check(manifold: ComplexNilmanifold, psi1: VectorForm) -> bool:
    """∂̄(½[ψ1, ψ1]) = 0 whenever ∂̄ψ1 = 0."""
    if not delbar_vector(manifold, psi1).is_zero():
        return True
    return delbar_vector(manifold, kuranishi_bracket(manifold, psi1, psi1)).is_zero()


def first_order_psi(manifold: ComplexNilmanifold) -> Tuple[VectorForm, Tuple[str, ...]]:
    """ψ1(t) = Σ t_{iλ} θ_i ⊗ conj(η_λ) over the tangent H^{0,1} basis."""
    r, forms = kodaira_h01(manifold)
    n = manifold.n
    psi = VectorForm.zero(n)
    names = []
    for i in range(n):
        for lam, form in enumerate(forms):
            name = parameter_name(i + 1, lam + 1)
            names.append(name)
            psi = psi + VectorForm.basic(n, i, form.scale(ParamPoly.var(name)))
    return psi, tuple(names)


class _DelbarSystem:
    """∂̄ from vector (0,1)-forms to vector (0,2)-forms as one constant matrix."""

    def __init__(self, manifold: ComplexNilmanifold):
        n = manifold.n
        algebra = algebra_of(manifold)
        self.n = n
        self.source = basis(n, 0, 1)
        self.target = basis(n, 0, 2)
        self.index = {m: j for j, m in enumerate(self.target)}
        images = [algebra.delbar(Form(n, {mono: 1})).to_vector(self.target) for mono in self.source]
        width = len(self.target)
        self.ncols = n * len(self.source)
        self.rows = [[ZERO] * self.ncols for _ in range(n * width)]
        for i in range(n):
            for mu, image in enumerate(images):
                for b, x in enumerate(image):
                    self.rows[i * width + b][i * len(self.source) + mu] = x

    def split(self, rhs: VectorForm) -> Dict[tuple, List[GaussRational]]:
        """Right-hand side per parameter monomial, in target coordinates."""
        width = len(self.target)
        out: Dict[tuple, List[GaussRational]] = {}
        for i, mono, coeff in rhs.items():
            for pm, c in coeff.items():
                vec = out.setdefault(pm, [ZERO] * (self.n * width))
                vec[i * width + self.index[mono]] = vec[i * width + self.index[mono]] + c
        return out

    def source_vector_form(self, pm: tuple, x: Sequence[GaussRational]) -> VectorForm:
        size = len(self.source)
        components = []
        for i in range(self.n):
            components.append(Form(self.n, {self.source[mu]: ParamPoly({pm: x[i * size + mu]})
                                            for mu in range(size) if x[i * size + mu]}))
        return VectorForm(self.n, components)

    def target_vector_form(self, pm: tuple, y: Sequence[GaussRational]) -> VectorForm:
        width = len(self.target)
        components = []
        for i in range(self.n):
            components.append(Form(self.n, {self.target[b]: ParamPoly({pm: y[i * width + b]})
                                            for b in range(width) if y[i * width + b]}))
        return VectorForm(self.n, components)


def solve_maurer_cartan(manifold: ComplexNilmanifold, max_degree: Optional[int] = None) -> MaurerCartanSolution:
    """Polynomial solution ψ(t) = ψ1 + ψ2 + ... of ∂̄ψ = ½[ψ, ψ], or the first obstruction."""
    n = manifold.n
    max_degree = max_degree if max_degree is not None else 2 * n
    if max_degree < 1:
        raise ValueError("max_degree must be at least 1")
    psi1, names = first_order_psi(manifold)
    if not delbar_vector(manifold, psi1).is_zero():
        raise InconsistencyException("First-order deformation is not delbar-closed", error_code="INCONSISTENT")
    if not bianchi_check(manifold, psi1):
        raise InconsistencyException("delbar of [psi1, psi1] does not vanish", error_code="INCONSISTENT")

    pieces = [psi1]
    psi = psi1
    if verify_integrability(manifold, psi):
        logger.info(f"Maurer-Cartan solved at degree 1 with {len(names)} parameters")
        return MaurerCartanSolution(psi=psi, degree=1, parameters=names, pieces=pieces)

    system = _DelbarSystem(manifold)
    for nu in range(2, max_degree + 1):
        rhs = VectorForm.zero(n)
        for mu in range(1, nu):
            rhs = rhs + kuranishi_bracket(manifold, pieces[mu - 1], pieces[nu - mu - 1])
        rhs = rhs.scale(HALF)
        if not delbar_vector(manifold, rhs).is_zero():
            raise InconsistencyException(f"Degree-{nu} bracket term is not delbar-closed",
                                         error_code="INCONSISTENT")
        piece = VectorForm.zero(n)
        for pm, vec in sorted(system.split(rhs).items()):
            x = linalg.min_norm_solve(system.rows, vec, system.ncols)
            if x is None:
                residual = linalg.residual_outside_image(system.rows, vec, system.ncols)
                obstruction = system.target_vector_form(pm, residual)
                logger.info(f"Maurer-Cartan obstructed at degree {nu}: {obstruction}")
                return MaurerCartanSolution(psi=psi, degree=nu - 1, parameters=names, pieces=pieces,
                                            obstruction=obstruction, obstruction_degree=nu)
            piece = piece + system.source_vector_form(pm, x)
        pieces.append(piece)
        psi = psi + piece
        logger.debug(f"psi_{nu} = {piece}")
        if verify_integrability(manifold, psi):
            degree = max(k + 1 for k, p in enumerate(pieces) if not p.is_zero())
            logger.info(f"Maurer-Cartan solved at degree {degree} with {len(names)} parameters")
            return MaurerCartanSolution(psi=psi, degree=degree, parameters=names, pieces=pieces)

    raise KuranishiException(f"No solution up to degree {max_degree}", error_code="DEGREE_EXCEEDED")


def nakamura_psi() -> VectorForm:
    """Closed formula on the Iwasawa manifold: Σ t_{iλ} θ_i ⊗ conj(φ_λ) - (t11 t22 - t12 t21) θ3 ⊗ conj(φ3)."""
    n = 3
    psi = VectorForm.zero(n)
    for i in range(n):
        for lam in range(2):
            psi = psi + VectorForm.basic(n, i, Form(n, {(n + lam,): ParamPoly.var(parameter_name(i + 1, lam + 1))}))
    t = {name: ParamPoly.var(name) for name in ("t11", "t12", "t21", "t22")}
    det = t["t11"] * t["t22"] - t["t12"] * t["t21"]
    return psi + VectorForm.basic(n, 2, Form(n, {(n + 2,): -det}))


def solution_for(manifold: ComplexNilmanifold, psi: Optional[VectorForm] = None,
                 max_degree: Optional[int] = None) -> VectorForm:
    """The given ψ if integrable, else the solver's (raising on obstruction)."""
    if psi is not None:
        return psi
    solution = solve_maurer_cartan(manifold, max_degree=max_degree)
    if solution.obstructed:
        raise KuranishiException(f"Maurer-Cartan obstructed at degree {solution.obstruction_degree}",
                                 error_code="OBSTRUCTED")
    return solution.psi


def print_vector_form(psi: VectorForm) -> str:
    """File form: ``dim``, ``params`` and one ``theta<i> = <(0,q)-form>`` line per frame vector."""
    lines = [f"dim {psi.n}"]
    if psi.variables:
        lines.append("params " + " ".join(psi.variables))
    for i, component in enumerate(psi.components, start=1):
        lines.append(f"theta{i} = {component}")
    return "\n".join(lines) + "\n"


def parse_vector_form(text: str) -> VectorForm:
    """Inverse of :func:`print_vector_form`; frame vectors without a line get 0."""
    n: Optional[int] = None
    params: List[str] = []
    components: Dict[int, Form] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        head, _, rest = content.partition(" ")
        if head == "dim" and n is None:
            if not rest.strip().isdigit() or int(rest) < 1:
                raise ParseException("'dim' takes one positive integer", line_no, 1)
            n = int(rest)
            continue
        if n is None:
            raise ParseException("First statement must be 'dim <n>'", line_no, 1, error_code="MISSING_DIM")
        if head == "params":
            params.extend(rest.split())
            continue
        match = _THETA.match(content)
        if not match:
            raise ParseException("Expected 'theta<i> = <form>'", line_no, 1)
        i = int(match.group(1))
        if not 1 <= i <= n:
            raise ParseException(f"theta{i} out of range 1..{n}", line_no, 1, error_code="INDEX_RANGE")
        if i in components:
            raise ParseException(f"Duplicate line for theta{i}", line_no, 1, error_code="DUPLICATE_EQUATION")
        try:
            components[i] = parse_form(match.group(2), n, params)
        except ParseException as e:
            raise ParseException(e.message.split(": ", 1)[-1], line_no, e.column + match.start(2),
                                 error_code=e.error_code)
    if n is None:
        raise ParseException("Empty vector form description", 1, 1, error_code="MISSING_DIM")
    return VectorForm(n, [components.get(i, Form.zero(n)) for i in range(1, n + 1)])
