# app/api/routes/deformations.py
from fastapi import APIRouter
import logging

from ...schemas.reports import DeformOut, FamilyOut, KuranishiOut
from ...schemas.requests import DeformRequest, FamilyRequest, KuranishiRequest
from ...services import deform
from ...services.report import kuranishi_summary
from ..deps import manifold_from, psi_from

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/kuranishi", response_model=KuranishiOut, response_model_by_alias=True)
def kuranishi_family(request: KuranishiRequest):
    """
    Kuranishi parameters and the Maurer-Cartan solution of a complex parallelisable manifold
    """
    manifold = manifold_from(request)
    return KuranishiOut.from_summary(kuranishi_summary(manifold, max_degree=request.max_degree))


@router.post("/deform", response_model=DeformOut, response_model_by_alias=True)
def deform_structure(request: DeformRequest):
    manifold = manifold_from(request)
    psi = psi_from(request.psi, manifold, max_degree=request.max_degree)
    structure = deform.deformed_structure(manifold, psi, deform.parse_point(request.at))
    return DeformOut.from_structure(structure)


@router.post("/family", response_model=FamilyOut, response_model_by_alias=True)
def scan_family(request: FamilyRequest):
    """
    Invariants and metric verdicts at each point; failing points are reported, not raised
    """
    manifold = manifold_from(request)
    psi = psi_from(request.psi, manifold, max_degree=request.max_degree)
    points = [deform.parse_point(text) for text in request.points]
    rows = deform.scan_family(manifold, psi, points, budget=request.budget, seed=request.seed)
    logger.info(f"Scanned {len(rows)} points, {sum(not r.ok for r in rows)} failed")
    return FamilyOut.from_rows(rows, base=manifold.name)
