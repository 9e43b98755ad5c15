# app/services/deform.py
"""
Deformed complex structures from a Maurer-Cartan solution evaluated at a rational point.

The deformed (1,0)-coframe is the graph ``φ^i_t = φ^i + Σ_λ ψ^i_λ(t) conj(φ^λ)``; the
structure equations of the new coframe are obtained by an exact change of basis and
re-validated from scratch.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple
import logging
import re

from ..core import linalg
from ..core.exceptions import DeformationException, NilgeoException, ParseException, StructureException
from ..core.scalars import GaussRational, ONE, ZERO
from ..models.exterior import Form, format_form, substitute
from ..models.structeq import (
    ComplexNilmanifold, StructureEquations, change_of_coframe, parse_scalar, validate,
)
from . import cohomology, frolicher, metrics
from .builtins import load_builtin
from .kuranishi import VectorForm, nakamura_psi

logger = logging.getLogger(__name__)

Point = Dict[str, GaussRational]

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class DeformedStructure:
    base: ComplexNilmanifold
    psi: VectorForm
    point: Tuple[Tuple[str, GaussRational], ...]
    new_eqs: StructureEquations
    manifold: ComplexNilmanifold
    basis_change: Tuple[Tuple[GaussRational, ...], ...]
    inverse: Tuple[Tuple[GaussRational, ...], ...]

    @property
    def is_trivial(self) -> bool:
        n2 = len(self.basis_change)
        return all(self.basis_change[a][b] == (ONE if a == b else ZERO) for a in range(n2) for b in range(n2))


def parse_point(text: str) -> Point:
    """``t12=1/10,t11=0`` -> {"t12": 1/10, "t11": 0}."""
    point: Point = {}
    column = 1
    for chunk in text.split(","):
        stripped = chunk.strip()
        if stripped:
            if "=" not in stripped:
                raise ParseException(f"Expected name=value, found {stripped!r}", 1, column)
            name, value = (part.strip() for part in stripped.split("=", 1))
            if not _NAME.match(name):
                raise ParseException(f"Invalid parameter name {name!r}", 1, column)
            if name in point:
                raise ParseException(f"Parameter {name!r} given twice", 1, column, error_code="DUPLICATE_PARAMETER")
            point[name] = parse_scalar(value)
        column += len(chunk) + 1
    return point


def format_point(point: Mapping[str, GaussRational]) -> str:
    return ",".join(f"{name}={GaussRational.coerce(value)}" for name, value in sorted(point.items()))


def graph_coframe(psi_value: VectorForm) -> linalg.Matrix:
    """Rows φ^i + Σ ψ^i_λ conj(φ^λ) and their conjugates, over the 2n old generators."""
    n = psi_value.n
    forward = [[ONE if a == b else ZERO for b in range(2 * n)] for a in range(2 * n)]
    for i, mono, coeff in psi_value.items():
        (g,) = mono
        c = coeff.constant_value()
        forward[i][g] = c
        forward[n + i][g - n] = c.conj()
    return forward


def _first_vanishing_minor(matrix: linalg.Matrix) -> int:
    for k, minor in enumerate(linalg.leading_minors(matrix), start=1):
        if not minor:
            return k
    return len(matrix)


def deformed_structure(manifold: ComplexNilmanifold, psi: VectorForm, point: Mapping[str, object],
                       name: Optional[str] = None) -> DeformedStructure:
    """Structure equations of the complex structure ψ(point); missing parameters are 0."""
    n = manifold.n
    if psi.n != n:
        raise DeformationException(f"Vector form has n={psi.n}, manifold has n={n}", error_code="DIMENSION_MISMATCH")
    if psi.q not in (None, 1):
        raise DeformationException("Deformations need a vector (0,1)-form", error_code="WRONG_BIDEGREE")
    unknown = sorted(set(point) - set(psi.variables))
    if unknown:
        raise DeformationException(f"Parameters {unknown} do not occur in psi {list(psi.variables)}",
                                   error_code="UNKNOWN_PARAMETER")
    full = {v: GaussRational.coerce(point.get(v, 0)) for v in psi.variables}
    value = psi.evaluate(full)
    forward = graph_coframe(value)
    label = name or f"{manifold.name or 'manifold'}[{format_point(point)}]"

    try:
        new_eqs = change_of_coframe(manifold.eqs, forward)
    except StructureException:
        k = _first_vanishing_minor(forward)
        raise DeformationException(
            f"Graph coframe is singular at {format_point(point)}: leading minor {k} vanishes",
            error_code="NOT_INVERTIBLE",
        )
    for k, form in enumerate(new_eqs.d_table, start=1):
        bad = form.component(0, 2)
        if not bad.is_zero():
            logger.error(f"d phi{k}_t has a (0,2)-part {format_form(bad)} at {format_point(point)}")
            raise DeformationException(f"d phi{k}_t has a (0,2)-part {format_form(bad)}; "
                                       f"psi is not integrable at {format_point(point)}",
                                       error_code="INTEGRABILITY_BROKEN")
    deformed = validate(new_eqs, name=label)
    backward = linalg.inverse(forward)
    logger.info(f"Deformed {manifold.name or 'manifold'} at {format_point(point)}")
    return DeformedStructure(
        base=manifold,
        psi=psi,
        point=tuple(sorted(full.items())),
        new_eqs=new_eqs,
        manifold=deformed,
        basis_change=tuple(tuple(row) for row in forward),
        inverse=tuple(tuple(row) for row in backward),
    )


def ab_structure(t) -> DeformedStructure:
    """Iwasawa manifold deformed along t12 = t, all other parameters zero."""
    t = GaussRational.coerce(t)
    if not t:
        raise DeformationException("t = 0 gives the Iwasawa manifold itself; use builtin:iwasawa",
                                   error_code="ZERO_PARAMETER")
    base = load_builtin("iwasawa")
    return deformed_structure(base, nakamura_psi(), {"t12": t}, name=f"iwasawa_ab({t})")


def ab_fiber(t) -> ComplexNilmanifold:
    return ab_structure(t).manifold


def transfer_witness(deformed: DeformedStructure, omega: Form) -> Form:
    """Rewrite a base form in the deformed coframe (old generators = inverse · new)."""
    n = deformed.base.n
    images = [Form(n, {(j,): x for j, x in enumerate(row) if x}) for row in deformed.inverse]
    return substitute(omega, images)


@dataclass
class FamilyPoint:
    point: Dict[str, GaussRational]
    ok: bool
    error_code: Optional[str] = None
    message: Optional[str] = None
    betti: Tuple[int, ...] = ()
    hodge: List[List[int]] = field(default_factory=list)
    ddbar: Optional[bool] = None
    degeneration_page: Optional[int] = None
    verdicts: Dict[str, str] = field(default_factory=dict)


def scan_family(manifold: ComplexNilmanifold, psi: VectorForm, points: Sequence[Mapping[str, object]],
                budget: Optional[int] = None, seed: Optional[int] = None,
                kinds: Sequence = metrics.IMPLICATION_ORDER) -> List[FamilyPoint]:
    """Decide every point on its own; failures are recorded, not raised."""
    rows = []
    for point in points:
        point = {k: GaussRational.coerce(v) for k, v in point.items()}
        try:
            structure = deformed_structure(manifold, psi, point)
        except NilgeoException as e:
            logger.warning(f"Skipping {format_point(point)}: {e.message}")
            rows.append(FamilyPoint(point=point, ok=False, error_code=e.error_code, message=e.message))
            continue
        fibre = structure.manifold
        classification = metrics.classify(fibre, budget=budget, seed=seed, kinds=kinds)
        rows.append(FamilyPoint(
            point=point,
            ok=True,
            betti=cohomology.derham(fibre).betti,
            hodge=cohomology.dolbeault(fibre).table(),
            ddbar=cohomology.ddbar_check(fibre).overall,
            degeneration_page=frolicher.pages(fibre).degeneration_page,
            verdicts={kind.value: report.verdict.value for kind, report in classification.reports.items()},
        ))
    return rows
