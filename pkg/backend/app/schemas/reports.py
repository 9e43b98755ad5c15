# app/schemas/reports.py
"""JSON report schemas shared by the CLI (``--json``) and the HTTP surface."""
from pydantic import BaseModel, ConfigDict, Field
from typing import Dict, List, Optional

from ..core.config import settings
from ..core.scalars import GaussRational
from ..models.structeq import ComplexNilmanifold, ManifoldFlags, print_manifold
from ..services import cohomology, frolicher, metrics
from ..services.cohomology import Theory
from ..services.deform import DeformedStructure, FamilyPoint
from ..services.metrics import MetricKind, Verdict
from ..services.report import FullReport, KuranishiSummary, summary_line


def _key(key) -> str:
    return ",".join(str(x) for x in key) if isinstance(key, tuple) else str(key)


def _table(table: Dict, n: int) -> List[List[int]]:
    return [[table.get((p, q), 0) for q in range(n + 1)] for p in range(n + 1)]


def _matrix(rows) -> List[List[str]]:
    return [[str(GaussRational.coerce(x)) for x in row] for row in rows]


class ReportBase(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(settings.SCHEMA_VERSION, alias="schema", description="Report schema version")
    invariant_level: bool = Field(True, description="All results concern invariant forms only")


class FlagsOut(BaseModel):
    integrable: bool
    d_squared_zero: bool
    unimodular: bool
    nilpotent: bool
    parallelisable: bool
    nilpotency_steps: List[int]

    @classmethod
    def from_flags(cls, flags: ManifoldFlags) -> "FlagsOut":
        return cls(
            integrable=flags.integrable,
            d_squared_zero=flags.d_squared_zero,
            unimodular=flags.unimodular,
            nilpotent=flags.nilpotent,
            parallelisable=flags.parallelisable,
            nilpotency_steps=list(flags.nilpotency_steps),
        )


class ValidateOut(ReportBase):
    name: Optional[str] = None
    n: int
    equations: str = Field(..., description="Canonical DSL text")
    flags: FlagsOut

    @classmethod
    def from_manifold(cls, manifold: ComplexNilmanifold) -> "ValidateOut":
        return cls(name=manifold.name, n=manifold.n, equations=print_manifold(manifold.eqs),
                   flags=FlagsOut.from_flags(manifold.flags))


class CohomologyOut(ReportBase):
    theory: Theory
    n: int
    dims: Dict[str, int] = Field(..., description="Keyed by 'k' (De Rham) or 'p,q'")
    betti: Optional[List[int]] = None
    table: Optional[List[List[int]]] = None
    representatives: Dict[str, List[str]]

    @classmethod
    def from_report(cls, report: cohomology.CohomologyReport) -> "CohomologyOut":
        graded = report.theory == Theory.DERHAM
        return cls(
            theory=report.theory,
            n=report.n,
            dims={_key(k): v for k, v in sorted(report.dims.items())},
            betti=list(report.betti) if graded else None,
            table=None if graded else report.table(),
            representatives={_key(k): [str(f) for f in v] for k, v in sorted(report.representatives.items())},
        )


class InequalityOut(BaseModel):
    k: int
    betti: int
    hodge_sum: int
    equal: bool


class FrolicherOut(ReportBase):
    n: int
    pages: List[List[List[int]]] = Field(..., description="E_1, E_2, ... as h[p][q] tables")
    infinity: List[List[int]]
    degeneration_page: Optional[int]
    degenerates_at_e1: bool
    inequality: List[InequalityOut]

    @classmethod
    def from_pages(cls, spectral: frolicher.SpectralPages) -> "FrolicherOut":
        return cls(
            n=spectral.n,
            pages=[_table(page, spectral.n) for page in spectral.pages],
            infinity=_table(spectral.infinity, spectral.n),
            degeneration_page=spectral.degeneration_page,
            degenerates_at_e1=spectral.degenerates_at_e1,
            inequality=[InequalityOut(k=row.k, betti=row.betti, hodge_sum=row.hodge_sum, equal=row.equal)
                        for row in spectral.equality],
        )


class DdbarEntryOut(BaseModel):
    p: int
    q: int
    d_exact_is_del_exact: bool
    d_exact_is_delbar_exact: bool
    d_exact_is_ddbar_exact: bool
    del_or_delbar_exact_is_ddbar_exact: bool
    holds: bool


class DdbarOut(ReportBase):
    overall: bool
    failures: List[List[int]]
    per_bidegree: List[DdbarEntryOut]

    @classmethod
    def from_report(cls, report: cohomology.DdbarReport) -> "DdbarOut":
        entries = [
            DdbarEntryOut(p=p, q=q, holds=e.holds, d_exact_is_del_exact=e.d_exact_is_del_exact,
                          d_exact_is_delbar_exact=e.d_exact_is_delbar_exact,
                          d_exact_is_ddbar_exact=e.d_exact_is_ddbar_exact,
                          del_or_delbar_exact_is_ddbar_exact=e.del_or_delbar_exact_is_ddbar_exact)
            for (p, q), e in sorted(report.per_bidegree.items())
        ]
        return cls(overall=report.overall, failures=[list(k) for k in report.failures()], per_bidegree=entries)


class CertificateOut(BaseModel):
    style: str = Field(..., description="geometric or dual_psd")
    positive_part: str
    matrix: List[List[str]]
    alpha: Optional[str] = None

    @classmethod
    def from_certificate(cls, cert: metrics.Certificate) -> "CertificateOut":
        return cls(style=cert.style, positive_part=str(cert.positive_part), matrix=_matrix(cert.matrix.rows()),
                   alpha=str(cert.alpha) if cert.alpha is not None else None)


class SearchStatsOut(BaseModel):
    strategy: str
    seed: int
    budget: int
    restarts: int
    iterations: int
    best_min_eigenvalue: Optional[float] = None
    denominator_bound: Optional[int] = None
    subspace_dimension: int


class MetricReportOut(BaseModel):
    kind: MetricKind
    verdict: Verdict
    witness: Optional[str] = None
    certificate: Optional[CertificateOut] = None
    verified: bool
    search_stats: SearchStatsOut

    @classmethod
    def from_report(cls, report: metrics.MetricReport) -> "MetricReportOut":
        s = report.stats
        return cls(
            kind=report.kind,
            verdict=report.verdict,
            witness=str(report.witness) if report.witness is not None else None,
            certificate=CertificateOut.from_certificate(report.certificate) if report.certificate else None,
            verified=report.verified,
            search_stats=SearchStatsOut(
                strategy=s.strategy, seed=s.seed, budget=s.budget, restarts=s.restarts, iterations=s.iterations,
                best_min_eigenvalue=None if s.best_min_eigenvalue is None else round(s.best_min_eigenvalue, 12),
                denominator_bound=s.denominator_bound, subspace_dimension=s.subspace_dimension,
            ),
        )


class MetricsOut(ReportBase):
    name: Optional[str] = None
    reports: List[MetricReportOut]
    audit: List[str]

    @classmethod
    def from_classification(cls, classification: metrics.Classification,
                            name: Optional[str] = None) -> "MetricsOut":
        return cls(name=name, reports=[MetricReportOut.from_report(r) for r in classification.reports.values()],
                   audit=list(classification.audit))


class KuranishiOut(ReportBase):
    r: int
    h01: int
    tangent_h01_dim: int
    tangent_h02_dim: int
    basis_size: int
    parameters: List[str] = []
    psi: Optional[str] = Field(None, description="Terms 't<i><l> * theta<i> (x) conj(phi<l>)'")
    degree: Optional[int] = None
    obstructed: bool = False
    obstruction: Optional[str] = None
    obstruction_degree: Optional[int] = None
    integrable: Optional[bool] = None
    note: Optional[str] = None

    @classmethod
    def from_summary(cls, summary: KuranishiSummary) -> "KuranishiOut":
        solution = summary.solution
        return cls(
            r=summary.r,
            h01=summary.h01,
            tangent_h01_dim=summary.tangent_dims[0],
            tangent_h02_dim=summary.tangent_dims[1],
            basis_size=summary.basis_size,
            parameters=list(solution.parameters) if solution else [],
            psi=str(solution.psi) if solution else None,
            degree=solution.degree if solution else None,
            obstructed=bool(solution and solution.obstructed),
            obstruction=str(solution.obstruction) if solution and solution.obstruction is not None else None,
            obstruction_degree=solution.obstruction_degree if solution else None,
            integrable=summary.integrable,
            note=summary.note,
        )


class DeformOut(ReportBase):
    base: Optional[str] = None
    name: Optional[str] = None
    point: Dict[str, str]
    equations: str
    basis_change: List[List[str]]
    flags: FlagsOut

    @classmethod
    def from_structure(cls, structure: DeformedStructure) -> "DeformOut":
        return cls(
            base=structure.base.name,
            name=structure.manifold.name,
            point={k: str(v) for k, v in structure.point},
            equations=print_manifold(structure.new_eqs),
            basis_change=_matrix(structure.basis_change),
            flags=FlagsOut.from_flags(structure.manifold.flags),
        )


class FamilyPointOut(BaseModel):
    point: Dict[str, str]
    ok: bool
    error_code: Optional[str] = None
    message: Optional[str] = None
    betti: List[int] = []
    hodge: List[List[int]] = []
    ddbar: Optional[bool] = None
    degeneration_page: Optional[int] = None
    verdicts: Dict[str, str] = {}

    @classmethod
    def from_point(cls, row: FamilyPoint) -> "FamilyPointOut":
        return cls(point={k: str(v) for k, v in sorted(row.point.items())}, ok=row.ok, error_code=row.error_code,
                   message=row.message, betti=list(row.betti), hodge=row.hodge, ddbar=row.ddbar,
                   degeneration_page=row.degeneration_page, verdicts=row.verdicts)


class FullReportOut(ReportBase):
    name: Optional[str] = None
    version: str
    seed: int
    budget: int
    validation: ValidateOut
    derham: CohomologyOut
    dolbeault: CohomologyOut
    bottchern: CohomologyOut
    frolicher: FrolicherOut
    ddbar: DdbarOut
    holomorphic_top_minus_one_closed: bool
    euler_characteristic: int
    metrics: MetricsOut
    kuranishi: Optional[KuranishiOut] = None
    summary: str
    timings: Dict[str, float] = Field(default_factory=dict, description="Wall-clock seconds per stage")

    @classmethod
    def from_report(cls, report: FullReport) -> "FullReportOut":
        return cls(
            name=report.name,
            version=report.version,
            seed=report.seed,
            budget=report.budget,
            validation=ValidateOut.from_manifold(report.manifold),
            derham=CohomologyOut.from_report(report.derham),
            dolbeault=CohomologyOut.from_report(report.dolbeault),
            bottchern=CohomologyOut.from_report(report.bottchern),
            frolicher=FrolicherOut.from_pages(report.spectral),
            ddbar=DdbarOut.from_report(report.ddbar),
            holomorphic_top_minus_one_closed=report.holomorphic_closed,
            euler_characteristic=report.euler,
            metrics=MetricsOut.from_classification(report.classification, name=report.name),
            kuranishi=KuranishiOut.from_summary(report.kuranishi) if report.kuranishi else None,
            summary=summary_line(report),
            timings=report.timings,
        )


class ExampleOut(BaseModel):
    name: str
    description: str
    text: Optional[str] = None


class FamilyOut(ReportBase):
    base: Optional[str] = None
    points: List[FamilyPointOut]

    @classmethod
    def from_rows(cls, rows: List[FamilyPoint], base: Optional[str] = None) -> "FamilyOut":
        return cls(base=base, points=[FamilyPointOut.from_point(row) for row in rows])
