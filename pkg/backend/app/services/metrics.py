# app/services/metrics.py
"""
Existence of invariant Kähler, balanced, strongly Gauduchon and Gauduchon metrics.

The search layer is numeric and untrusted: it maximises the smallest eigenvalue of a
Hermitian probe over a trace-normalised slice of a linear space of forms.  Candidates
are rationalised with growing denominator bounds and only an exact verification turns
them into a witness (a positive-definite form satisfying the condition) or a
certificate (a positive semidefinite, nonzero obstruction orthogonal to the condition).
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import logging

import numpy as np

from ..core import linalg
from ..core.config import settings
from ..core.exceptions import FormException, InconsistencyException
from ..core.scalars import GaussRational, I, ZERO, rationalize
from ..models.exterior import (
    Form, HermitianMatrix, algebra_of, basis, dual_n1n1, form_from_hermitian_11,
    hermitian_of_11, hermitian_of_n1n1, phi, top_coefficient, total_basis, wedge_all, wedge_power,
)
from ..models.structeq import ComplexNilmanifold
from .cohomology import kernel, to_forms

logger = logging.getLogger(__name__)

SOFTMIN_TEMPERATURE = 1e-3
CERTIFICATE_SLACK = 5e-2


class MetricKind(str, Enum):
    KAHLER = "kahler"
    BALANCED = "balanced"
    SG = "sg"
    GAUDUCHON = "gauduchon"


# strongest first: each kind implies the next
IMPLICATION_ORDER = (MetricKind.KAHLER, MetricKind.BALANCED, MetricKind.SG, MetricKind.GAUDUCHON)


class Verdict(str, Enum):
    WITNESS = "witness"
    CERTIFICATE = "certificate"
    UNDECIDED = "undecided"


@dataclass
class Certificate:
    """``geometric``: real 1-form alpha with (dα)^{1,1} >= 0; ``dual_psd``: positive form
    orthogonal to the whole condition subspace."""

    style: str
    positive_part: Form
    matrix: HermitianMatrix
    alpha: Optional[Form] = None


@dataclass
class SearchStats:
    strategy: str = "none"
    seed: int = 0
    budget: int = 0
    restarts: int = 0
    iterations: int = 0
    best_min_eigenvalue: Optional[float] = None
    denominator_bound: Optional[int] = None
    subspace_dimension: int = 0


@dataclass
class MetricReport:
    kind: MetricKind
    verdict: Verdict
    witness: Optional[Form] = None
    certificate: Optional[Certificate] = None
    verified: bool = False
    stats: SearchStats = field(default_factory=SearchStats)
    invariant_level: bool = True


@dataclass
class ConditionSubspace:
    kind: MetricKind
    forms: List[Form]
    extensions: List[Form]
    probes: List[HermitianMatrix]

    @property
    def dimension(self) -> int:
        return len(self.forms)


def _coerce_kind(kind) -> MetricKind:
    return kind if isinstance(kind, MetricKind) else MetricKind(kind)


def probe(manifold: ComplexNilmanifold, kind: MetricKind, form: Form) -> HermitianMatrix:
    """Hermitian matrix whose positivity is the metric positivity for ``kind``."""
    if kind == MetricKind.KAHLER:
        return hermitian_of_11(form)
    n = manifold.n
    return hermitian_of_n1n1(form.component(n - 1, n - 1))


def real_span(forms: Sequence[Form], monomials: Sequence) -> List[Form]:
    """Real basis of the conjugation-stable span of ``forms``: v + conj v and i(v - conj v)."""
    candidates = []
    for form in forms:
        mirrored = form.conj()
        candidates.append(form + mirrored)
        candidates.append((form - mirrored).scale(I))
    vectors = [c.to_vector(monomials) for c in candidates]
    return [candidates[i] for i in linalg.independent_subset(vectors, len(monomials))]


def condition_subspace(manifold: ComplexNilmanifold, kind) -> ConditionSubspace:
    kind = _coerce_kind(kind)
    n = manifold.n
    if kind == MetricKind.KAHLER:
        monomials = basis(n, 1, 1)
        closed = kernel(manifold, "d", monomials, total_basis(n, 3))
        forms = real_span(to_forms(n, closed, monomials), monomials)
        extensions = forms
    elif kind == MetricKind.BALANCED:
        monomials = basis(n, n - 1, n - 1)
        closed = kernel(manifold, "d", monomials, total_basis(n, 2 * n - 1))
        forms = real_span(to_forms(n, closed, monomials), monomials)
        extensions = forms
    elif kind == MetricKind.GAUDUCHON:
        monomials = basis(n, n - 1, n - 1)
        pluriclosed = kernel(manifold, "ddbar", monomials, basis(n, n, n))
        forms = real_span(to_forms(n, pluriclosed, monomials), monomials)
        extensions = forms
    else:
        everything = total_basis(n, 2 * n - 2)
        closed = kernel(manifold, "d", everything, total_basis(n, 2 * n - 1))
        real_closed = real_span(to_forms(n, closed, everything), everything)
        monomials = basis(n, n - 1, n - 1)
        projections = [f.component(n - 1, n - 1) for f in real_closed]
        keep = linalg.independent_subset([p.to_vector(monomials) for p in projections], len(monomials))
        forms = [projections[i] for i in keep]
        extensions = [real_closed[i] for i in keep]
    probes = [probe(manifold, kind, f) for f in forms]
    logger.debug(f"Condition subspace {kind.value}: dimension {len(forms)}")
    return ConditionSubspace(kind=kind, forms=forms, extensions=extensions, probes=probes)


# numeric layer

def _ascend(mats: np.ndarray, trace: np.ndarray, start: np.ndarray, iterations: int) -> Tuple[np.ndarray, float, int]:
    """Projected (softmin) gradient ascent of λ_min(Σ y_i W_i) on {trace · y = 1}."""
    norm_t = float(trace @ trace)
    y = start.copy()
    step0 = 0.5 * max(float(np.linalg.norm(start)), 1e-3)
    best_y, best_val = y.copy(), -np.inf
    used = 0
    for it in range(iterations):
        used = it + 1
        vals, vecs = np.linalg.eigh(np.tensordot(y, mats, axes=1))
        if vals[0] > best_val:
            best_val, best_y = float(vals[0]), y.copy()
        weights = np.exp(-(vals - vals[0]) / SOFTMIN_TEMPERATURE)
        weights /= weights.sum()
        quad = np.einsum("ak,iab,bk->ik", vecs.conj(), mats, vecs).real
        grad = quad @ weights
        grad = grad - (grad @ trace) / norm_t * trace
        size = float(np.linalg.norm(grad))
        if size < 1e-14:
            break
        y = y + (step0 / np.sqrt(it + 1)) * grad / size
    return best_y, best_val, used


def _restarts(mats: np.ndarray, budget: int, seed: int) -> Iterator[Tuple[int, np.ndarray, float, int]]:
    """Best point of each restart, restart 0 starting from the minimal-norm slice point."""
    trace = np.einsum("iaa->i", mats).real
    norm_t = float(trace @ trace)
    if norm_t < 1e-18:
        return
    rng = np.random.default_rng(seed)
    restarts = max(1, settings.RESTARTS)
    per_restart = max(1, budget // restarts)
    center = trace / norm_t
    for index in range(restarts):
        start = center.copy()
        if index > 0:
            noise = rng.standard_normal(len(trace))
            noise -= (noise @ trace) / norm_t * trace
            start = start + noise * float(np.linalg.norm(center))
        y, value, used = _ascend(mats, trace, start, per_restart)
        yield index, y, value, used


def _rational_candidates(y: np.ndarray) -> Iterator[Tuple[int, List[Fraction]]]:
    previous = None
    for k in range(settings.MAX_DENOMINATOR_DOUBLINGS + 1):
        bound = 2 ** k
        candidate = [rationalize(float(x), bound) for x in y]
        if candidate != previous:
            yield bound, candidate
        previous = candidate


def _stack(matrices: Sequence[HermitianMatrix]) -> np.ndarray:
    return np.array([m.to_complex() for m in matrices], dtype=complex)


def _combine(forms: Sequence[Form], coeffs: Sequence[Fraction], n: int) -> Form:
    total = Form.zero(n)
    for form, c in zip(forms, coeffs):
        if c:
            total = total + form.scale(GaussRational(c))
    return total


def _min_eigenvalue(mats: np.ndarray, coeffs: Sequence[Fraction]) -> float:
    return float(np.linalg.eigvalsh(np.tensordot(np.array([float(c) for c in coeffs]), mats, axes=1))[0])


# witnesses

def parallelisable_balanced_witness(manifold: ComplexNilmanifold) -> Optional[Form]:
    """Σ_i i^{(n-1)²} u_i ^ conj(u_i), u_i the product of all φ_j with j != i."""
    if not manifold.flags.parallelisable:
        return None
    n = manifold.n
    sign = I ** ((n - 1) ** 2)
    omega = Form.zero(n)
    for i in range(1, n + 1):
        u = wedge_all((phi(n, j) for j in range(1, n + 1) if j != i), n)
        omega = omega + u.wedge(u.conj()).scale(sign)
    return omega if verify_witness(manifold, MetricKind.BALANCED, omega) else None


def verify_witness(manifold: ComplexNilmanifold, kind, witness: Form) -> bool:
    """Exact check: real, satisfies the condition, positive-definite probe."""
    kind = _coerce_kind(kind)
    n = manifold.n
    algebra = algebra_of(manifold)
    try:
        if witness.n != n or witness.is_zero() or not witness.is_constant() or not witness.is_real():
            return False
        if kind == MetricKind.KAHLER:
            if witness.bidegrees() != [(1, 1)] or not algebra.d(witness).is_zero():
                return False
        elif kind == MetricKind.BALANCED:
            if witness.bidegrees() != [(n - 1, n - 1)] or not algebra.d(witness).is_zero():
                return False
        elif kind == MetricKind.GAUDUCHON:
            if witness.bidegrees() != [(n - 1, n - 1)] or not algebra.ddbar(witness).is_zero():
                return False
        else:
            if witness.degrees() != [2 * n - 2] or not algebra.d(witness).is_zero():
                return False
        return probe(manifold, kind, witness).is_positive_definite()
    except FormException as e:
        logger.debug(f"Witness rejected: {e.message}")
        return False


def _search_witness(manifold, kind, subspace: ConditionSubspace, budget: int, seed: int,
                    stats: SearchStats) -> Optional[Form]:
    if not subspace.forms:
        return None
    mats = _stack(subspace.probes)
    for index, y, value, used in _restarts(mats, budget, seed):
        stats.restarts = index + 1
        stats.iterations += used
        stats.best_min_eigenvalue = value if stats.best_min_eigenvalue is None else max(stats.best_min_eigenvalue, value)
        if value <= settings.NUMERIC_TOLERANCE:
            continue
        for bound, coeffs in _rational_candidates(y):
            if _min_eigenvalue(mats, coeffs) <= 0:
                continue
            candidate = _combine(subspace.extensions, coeffs, manifold.n)
            if verify_witness(manifold, kind, candidate):
                stats.denominator_bound = bound
                return candidate
    return None


# certificates

def _hermitian_basis(n: int) -> List[List[List[GaussRational]]]:
    """Real basis of Hermitian n x n matrices: E_jj, E_jk + E_kj, i(E_jk - E_kj)."""
    out = []
    for j in range(n):
        for k in range(j, n):
            m = [[ZERO] * n for _ in range(n)]
            if j == k:
                m[j][j] = GaussRational(1)
                out.append(m)
                continue
            m[j][k] = m[k][j] = GaussRational(1)
            out.append(m)
            m = [[ZERO] * n for _ in range(n)]
            m[j][k], m[k][j] = I, -I
            out.append(m)
    return out


def _pairing(a: Sequence[Sequence[GaussRational]], b: Sequence[Sequence[GaussRational]]) -> GaussRational:
    return sum((a[j][k] * b[j][k] for j in range(len(a)) for k in range(len(a))), ZERO)


def _matrix_combination(mats, coeffs) -> List[List[GaussRational]]:
    n = len(mats[0])
    out = [[ZERO] * n for _ in range(n)]
    for m, c in zip(mats, coeffs):
        if c:
            c = GaussRational.coerce(c)
            for j in range(n):
                for k in range(n):
                    out[j][k] = out[j][k] + m[j][k] * c
    return out


def _dual_form(manifold: ComplexNilmanifold, kind: MetricKind, matrix) -> Form:
    if kind == MetricKind.KAHLER:
        return dual_n1n1(matrix)
    return form_from_hermitian_11(matrix)


def _psd_nonzero(h: HermitianMatrix) -> bool:
    return not h.is_zero() and h.is_hermitian() and h.is_positive_semidefinite()


def _real_one_forms(manifold: ComplexNilmanifold, kind: MetricKind) -> List[Form]:
    n = manifold.n
    monomials = total_basis(n, 1)
    algebra = algebra_of(manifold)
    if kind == MetricKind.SG:
        # (dα)^{2,0} = (dα)^{0,2} = 0
        targets = basis(n, 2, 0) + basis(n, 0, 2)
        matrix_cols = []
        for g in range(2 * n):
            da = algebra.d(Form(n, {(g,): 1}))
            matrix_cols.append((da.component(2, 0) + da.component(0, 2)).to_vector(targets))
        rows = linalg.transpose(matrix_cols, len(targets)) if targets else []
        allowed = linalg.nullspace(rows, 2 * n) if rows else [[GaussRational(1) if i == j else ZERO
                                                              for j in range(2 * n)] for i in range(2 * n)]
        complex_forms = to_forms(n, allowed, monomials)
    else:
        complex_forms = [Form(n, {(g,): 1}) for g in range(n)]
    return real_span(complex_forms, monomials)


def _search_geometric(manifold, kind, budget, seed, stats) -> Optional[Certificate]:
    n = manifold.n
    algebra = algebra_of(manifold)
    alphas = _real_one_forms(manifold, kind)
    images = [hermitian_of_11(algebra.d(a).component(1, 1)) for a in alphas]
    flat = [[x for row in h.rows() for x in row] for h in images]
    keep = linalg.independent_subset(flat, n * n)
    if not keep:
        return None
    alphas = [alphas[i] for i in keep]
    mats = _stack([images[i] for i in keep])
    for index, y, value, used in _restarts(mats, budget, seed):
        stats.iterations += used
        stats.restarts = index + 1
        if value < -CERTIFICATE_SLACK:
            continue
        for bound, coeffs in _rational_candidates(y):
            alpha = _combine(alphas, coeffs, n)
            part = algebra.d(alpha).component(1, 1)
            if part.is_zero():
                continue
            cert = Certificate(style="geometric", positive_part=part, matrix=hermitian_of_11(part), alpha=alpha)
            if verify_certificate(manifold, kind, cert):
                stats.denominator_bound = bound
                stats.best_min_eigenvalue = value
                return cert
    return None


def _search_dual(manifold, kind, subspace: ConditionSubspace, budget, seed, stats) -> Optional[Certificate]:
    n = manifold.n
    herm = _hermitian_basis(n)
    constraints = [[_pairing(p.rows(), e) for e in herm] for p in subspace.probes]
    if constraints:
        null = linalg.nullspace(constraints, len(herm))
    else:
        null = [[GaussRational(1) if i == j else ZERO for j in range(len(herm))] for i in range(len(herm))]
    if not null:
        return None
    exact = [_matrix_combination(herm, vec) for vec in null]
    mats = np.array([[[complex(x) for x in row] for row in m] for m in exact], dtype=complex)
    for index, y, value, used in _restarts(mats, budget, seed):
        stats.iterations += used
        stats.restarts = index + 1
        if value < -CERTIFICATE_SLACK:
            continue
        for bound, coeffs in _rational_candidates(y):
            matrix = _matrix_combination(exact, coeffs)
            form = _dual_form(manifold, kind, matrix)
            cert = Certificate(style="dual_psd", positive_part=form, matrix=HermitianMatrix(matrix))
            if verify_certificate(manifold, kind, cert, subspace=subspace):
                stats.denominator_bound = bound
                stats.best_min_eigenvalue = value
                return cert
    return None


def verify_certificate(manifold: ComplexNilmanifold, kind, cert: Certificate,
                       subspace: Optional[ConditionSubspace] = None) -> bool:
    """Exact check of an infeasibility certificate (needs unimodularity for Stokes)."""
    kind = _coerce_kind(kind)
    n = manifold.n
    if not manifold.flags.unimodular:
        return False
    algebra = algebra_of(manifold)
    try:
        if cert.style == "geometric":
            alpha = cert.alpha
            if kind not in (MetricKind.BALANCED, MetricKind.SG) or alpha is None:
                return False
            if alpha.degrees() != [1] or not alpha.is_constant() or not alpha.is_real():
                return False
            da = algebra.d(alpha)
            if kind == MetricKind.SG and not (da.component(2, 0).is_zero() and da.component(0, 2).is_zero()):
                return False
            part = da.component(1, 1)
            if part != cert.positive_part:
                return False
            return _psd_nonzero(hermitian_of_11(part))
        if cert.style == "dual_psd":
            form = cert.positive_part
            if not form.is_constant() or not form.is_real():
                return False
            if kind == MetricKind.KAHLER:
                if form.bidegrees() != [(n - 1, n - 1)]:
                    return False
                matrix = hermitian_of_n1n1(form)
            else:
                if form.bidegrees() != [(1, 1)]:
                    return False
                matrix = hermitian_of_11(form)
            if not _psd_nonzero(matrix):
                return False
            subspace = subspace or condition_subspace(manifold, kind)
            return all(top_coefficient(f.wedge(form)).is_zero() for f in subspace.forms)
    except FormException as e:
        logger.debug(f"Certificate rejected: {e.message}")
        return False
    return False


def soundness_pairing(manifold: ComplexNilmanifold, kind, witness: Form, cert: Certificate) -> GaussRational:
    """top(witness ^ positive part): zero by Stokes/orthogonality, positive by positivity."""
    algebra = algebra_of(manifold)
    positive = algebra.d(cert.alpha) if cert.style == "geometric" else cert.positive_part
    return top_coefficient(witness.wedge(positive)).constant_value()


def gauduchon_from_sg(manifold: ComplexNilmanifold, omega: Form) -> Tuple[Form, bool]:
    """The (n-1,n-1)-part of an sG witness, and whether it verifies as a Gauduchon witness."""
    n = manifold.n
    part = omega.component(n - 1, n - 1)
    return part, verify_witness(manifold, MetricKind.GAUDUCHON, part)


def find_witness(manifold: ComplexNilmanifold, kind, budget: Optional[int] = None,
                 seed: Optional[int] = None) -> MetricReport:
    kind = _coerce_kind(kind)
    budget = budget if budget is not None else settings.BUDGET
    seed = seed if seed is not None else settings.SEED
    stats = SearchStats(seed=seed, budget=budget)
    subspace = condition_subspace(manifold, kind)
    stats.subspace_dimension = subspace.dimension

    if kind == MetricKind.BALANCED:
        explicit = parallelisable_balanced_witness(manifold)
        if explicit is not None:
            stats.strategy = "parallelisable"
            logger.info(f"kind={kind.value} verdict=witness strategy=parallelisable")
            return MetricReport(kind, Verdict.WITNESS, witness=explicit, verified=True, stats=stats)

    stats.strategy = "witness_search"
    witness = _search_witness(manifold, kind, subspace, budget, seed, stats)
    if witness is not None:
        logger.info(f"kind={kind.value} verdict=witness restarts={stats.restarts} "
                    f"iterations={stats.iterations} bound={stats.denominator_bound}")
        return MetricReport(kind, Verdict.WITNESS, witness=witness, verified=True, stats=stats)

    if not manifold.flags.unimodular:
        logger.warning(f"kind={kind.value}: not unimodular, certificate search disabled")
        return MetricReport(kind, Verdict.UNDECIDED, stats=stats)

    cert = None
    if kind in (MetricKind.BALANCED, MetricKind.SG):
        stats.strategy = "geometric_certificate"
        cert = _search_geometric(manifold, kind, budget, seed, stats)
    if cert is None and kind != MetricKind.GAUDUCHON:
        stats.strategy = "dual_certificate"
        cert = _search_dual(manifold, kind, subspace, budget, seed, stats)
    if cert is not None:
        logger.info(f"kind={kind.value} verdict=certificate style={cert.style} "
                    f"iterations={stats.iterations} bound={stats.denominator_bound}")
        return MetricReport(kind, Verdict.CERTIFICATE, certificate=cert, verified=True, stats=stats)

    logger.info(f"kind={kind.value} verdict=undecided iterations={stats.iterations} "
                f"best={stats.best_min_eigenvalue}")
    return MetricReport(kind, Verdict.UNDECIDED, stats=stats)


@dataclass
class Classification:
    reports: Dict[MetricKind, MetricReport]
    audit: List[str] = field(default_factory=list)

    def verdict(self, kind) -> Verdict:
        return self.reports[_coerce_kind(kind)].verdict

    def has_metric(self, kind) -> Optional[bool]:
        verdict = self.verdict(kind)
        if verdict == Verdict.UNDECIDED:
            return None
        return verdict == Verdict.WITNESS


def _audit_implications(manifold: ComplexNilmanifold, reports: Dict[MetricKind, MetricReport]) -> List[str]:
    n = manifold.n
    audit = []
    kahler = reports.get(MetricKind.KAHLER)
    if kahler and kahler.verdict == Verdict.WITNESS:
        power = wedge_power(kahler.witness, n - 1)
        if not verify_witness(manifold, MetricKind.BALANCED, power):
            raise InconsistencyException("Kähler witness power fails balanced verification",
                                         error_code="INCONSISTENT")
        audit.append("kahler witness ^ (n-1) verifies as balanced")
    balanced = reports.get(MetricKind.BALANCED)
    if balanced and balanced.verdict == Verdict.WITNESS:
        if not verify_witness(manifold, MetricKind.SG, balanced.witness):
            raise InconsistencyException("Balanced witness fails sG verification", error_code="INCONSISTENT")
        audit.append("balanced witness verifies as sG")
    sg = reports.get(MetricKind.SG)
    if sg and sg.verdict == Verdict.WITNESS:
        _, ok = gauduchon_from_sg(manifold, sg.witness)
        if not ok:
            raise InconsistencyException("sG witness fails Gauduchon verification", error_code="INCONSISTENT")
        audit.append("sG witness (n-1,n-1)-part verifies as Gauduchon")

    # a witness for a stronger kind rules out certificates for every weaker kind
    for i, stronger in enumerate(IMPLICATION_ORDER):
        if stronger not in reports or reports[stronger].verdict != Verdict.WITNESS:
            continue
        for weaker in IMPLICATION_ORDER[i:]:
            if weaker in reports and reports[weaker].verdict == Verdict.CERTIFICATE:
                raise InconsistencyException(
                    f"{stronger.value} witness conflicts with {weaker.value} certificate",
                    error_code="INCONSISTENT",
                )
    audit.append("no witness/certificate conflicts")
    return audit


def classify(manifold: ComplexNilmanifold, budget: Optional[int] = None,
             seed: Optional[int] = None, kinds: Sequence = IMPLICATION_ORDER) -> Classification:
    reports = {}
    for kind in kinds:
        kind = _coerce_kind(kind)
        reports[kind] = find_witness(manifold, kind, budget=budget, seed=seed)
    audit = _audit_implications(manifold, reports)
    return Classification(reports=reports, audit=audit)
