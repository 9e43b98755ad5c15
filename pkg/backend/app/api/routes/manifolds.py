# app/api/routes/manifolds.py
from fastapi import APIRouter
import logging

from ...schemas.reports import ValidateOut
from ...schemas.requests import ManifoldRequest
from ..deps import manifold_from

logger = logging.getLogger(__name__)

router = APIRouter()


@router.post("/validate", response_model=ValidateOut, response_model_by_alias=True)
def validate_manifold(request: ManifoldRequest):
    """
    Parse structure equations and report d^2 = 0, integrability and structural flags
    """
    manifold = manifold_from(request)
    logger.info(f"Validated manifold n={manifold.n} ({manifold.name or 'inline'})")
    return ValidateOut.from_manifold(manifold)
