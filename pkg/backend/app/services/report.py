# app/services/report.py
"""Full pipeline: validate, cohomology, Frölicher, ∂∂̄, metrics and (if applicable) Kuranishi."""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple
import logging
import time

from ..core.config import settings
from ..core.exceptions import InconsistencyException, KuranishiException
from ..models.structeq import ComplexNilmanifold, parse_manifold, validate
from . import cohomology, frolicher, kuranishi, metrics
from .metrics import MetricKind, Verdict

logger = logging.getLogger(__name__)

KIND_LABELS = {
    MetricKind.KAHLER: "Kähler",
    MetricKind.BALANCED: "balanced",
    MetricKind.SG: "sG",
    MetricKind.GAUDUCHON: "Gauduchon",
}

VERDICT_LABELS = {
    Verdict.WITNESS: "YES (witness verified)",
    Verdict.CERTIFICATE: "NO (certificate verified)",
    Verdict.UNDECIDED: "UNDECIDED",
}


@dataclass
class KuranishiSummary:
    r: int
    h01: int
    tangent_dims: Tuple[int, int]
    basis_size: int
    solution: Optional[kuranishi.MaurerCartanSolution] = None
    integrable: Optional[bool] = None
    note: Optional[str] = None


@dataclass
class FullReport:
    manifold: ComplexNilmanifold
    derham: cohomology.CohomologyReport
    dolbeault: cohomology.CohomologyReport
    bottchern: cohomology.CohomologyReport
    spectral: frolicher.SpectralPages
    ddbar: cohomology.DdbarReport
    holomorphic_closed: bool
    euler: int
    classification: metrics.Classification
    kuranishi: Optional[KuranishiSummary]
    seed: int
    budget: int
    version: str = settings.VERSION
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def name(self) -> Optional[str]:
        return self.manifold.name


def kuranishi_summary(manifold: ComplexNilmanifold, max_degree: Optional[int] = None) -> KuranishiSummary:
    r, _ = kuranishi.kodaira_h01(manifold)
    summary = KuranishiSummary(
        r=r,
        h01=cohomology.dolbeault(manifold).dims[(0, 1)],
        tangent_dims=kuranishi.tangent_cohomology_dims(manifold),
        basis_size=len(kuranishi.tangent_h01_basis(manifold)),
    )
    try:
        solution = kuranishi.solve_maurer_cartan(manifold, max_degree=max_degree)
    except KuranishiException as e:
        summary.note = e.message
        return summary
    summary.solution = solution
    summary.integrable = not solution.obstructed and kuranishi.verify_integrability(manifold, solution.psi)
    if not solution.obstructed and not summary.integrable:
        raise InconsistencyException("Maurer-Cartan solution fails the integrability check",
                                     error_code="INCONSISTENT")
    return summary


def summary_line(report: FullReport) -> str:
    """One line per manifold: metric verdicts, ∂∂̄-lemma, E1-degeneration."""
    parts = [f"{KIND_LABELS[kind]}: {VERDICT_LABELS[r.verdict]}"
             for kind, r in report.classification.reports.items()]
    parts.append(f"∂∂̄: {'YES' if report.ddbar.overall else 'NO'}")
    parts.append(f"E1-degeneration: {'YES' if report.spectral.degenerates_at_e1 else 'NO'}")
    return " | ".join(parts)


def run_report(text: str, name: Optional[str] = None, budget: Optional[int] = None,
               seed: Optional[int] = None, max_degree: Optional[int] = None) -> FullReport:
    budget = budget if budget is not None else settings.BUDGET
    seed = seed if seed is not None else settings.SEED
    timings: Dict[str, float] = {}

    def timed(label, fn, *args, **kwargs):
        start = time.perf_counter()
        result = fn(*args, **kwargs)
        timings[label] = round(time.perf_counter() - start, 6)
        return result

    manifold = timed("validate", lambda: validate(parse_manifold(text), name=name))
    derham = timed("derham", cohomology.derham, manifold)
    dolbeault = timed("dolbeault", cohomology.dolbeault, manifold)
    bottchern = timed("bottchern", cohomology.bott_chern, manifold)
    spectral = timed("frolicher", frolicher.pages, manifold)
    if spectral.page(1) != dolbeault.dims:
        raise InconsistencyException("E_1 differs from the Dolbeault table", error_code="INCONSISTENT")
    frolicher.check_inequality(manifold)
    ddbar = timed("ddbar", cohomology.ddbar_check, manifold)
    classification = timed("metrics", metrics.classify, manifold, budget=budget, seed=seed)

    summary = None
    if manifold.flags.parallelisable and manifold.flags.nilpotent:
        summary = timed("kuranishi", kuranishi_summary, manifold, max_degree)

    report = FullReport(
        manifold=manifold,
        derham=derham,
        dolbeault=dolbeault,
        bottchern=bottchern,
        spectral=spectral,
        ddbar=ddbar,
        holomorphic_closed=cohomology.holomorphic_top_minus_one_closed(manifold),
        euler=cohomology.euler_characteristic(manifold),
        classification=classification,
        kuranishi=summary,
        seed=seed,
        budget=budget,
        timings=timings,
    )
    logger.info(f"Report for {name or 'manifold'}: {summary_line(report)}")
    return report
