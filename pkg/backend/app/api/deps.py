# app/api/deps.py
from typing import Optional

from ..models.structeq import ComplexNilmanifold, parse_manifold, validate
from ..schemas.requests import ManifoldRequest
from ..services import builtins, kuranishi
from ..services.kuranishi import VectorForm


def manifold_from(request: ManifoldRequest) -> ComplexNilmanifold:
    """Parse and validate the manifold carried by a request body"""
    if request.builtin is not None:
        return builtins.load_builtin(request.builtin)
    return validate(parse_manifold(request.source))


def psi_from(text: Optional[str], manifold: ComplexNilmanifold, max_degree: Optional[int] = None) -> VectorForm:
    if text is None:
        return kuranishi.solution_for(manifold, max_degree=max_degree)
    if text.strip() == f"{builtins.BUILTIN_PREFIX}iwasawa":
        return kuranishi.nakamura_psi()
    return kuranishi.parse_vector_form(text)
