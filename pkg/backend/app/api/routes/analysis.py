# app/api/routes/analysis.py
from fastapi import APIRouter
import logging

from ...core.config import settings
from ...models.structeq import print_manifold
from ...schemas.reports import CohomologyOut, DdbarOut, FrolicherOut, FullReportOut, MetricsOut
from ...schemas.requests import CohomologyRequest, FrolicherRequest, ManifoldRequest, MetricsRequest, ReportRequest
from ...services import cohomology, frolicher, metrics
from ...services.report import run_report
from ..deps import manifold_from

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/cohomology", response_model=CohomologyOut, response_model_by_alias=True)
def compute_cohomology(request: CohomologyRequest):
    """
    De Rham, Dolbeault or Bott-Chern numbers with representatives
    """
    manifold = manifold_from(request)
    return CohomologyOut.from_report(cohomology.compute(manifold, request.theory))


@router.post("/frolicher", response_model=FrolicherOut, response_model_by_alias=True)
def compute_frolicher(request: FrolicherRequest):
    manifold = manifold_from(request)
    return FrolicherOut.from_pages(frolicher.pages(manifold, r_max=request.r_max))


@router.post("/ddbar", response_model=DdbarOut, response_model_by_alias=True)
def check_ddbar(request: ManifoldRequest):
    manifold = manifold_from(request)
    return DdbarOut.from_report(cohomology.ddbar_check(manifold))


@router.post("/metrics", response_model=MetricsOut, response_model_by_alias=True)
def classify_metrics(request: MetricsRequest):
    """
    Witnesses and infeasibility certificates for Kähler, balanced, sG and Gauduchon metrics
    """
    manifold = manifold_from(request)
    kinds = request.kinds or list(metrics.IMPLICATION_ORDER)
    classification = metrics.classify(manifold, budget=request.budget or settings.BUDGET,
                                      seed=settings.SEED if request.seed is None else request.seed, kinds=kinds)
    return MetricsOut.from_classification(classification, name=manifold.name)


@router.post("/report", response_model=FullReportOut, response_model_by_alias=True)
def full_report(request: ReportRequest):
    """
    Full pipeline: validation, cohomology, Frölicher, ∂∂̄-lemma, metrics and Kuranishi
    """
    manifold = manifold_from(request)
    report = run_report(print_manifold(manifold.eqs), name=manifold.name, budget=request.budget,
                        seed=request.seed, max_degree=request.max_degree)
    return FullReportOut.from_report(report)
