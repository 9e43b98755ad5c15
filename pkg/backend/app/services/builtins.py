# app/services/builtins.py
"""
Registry of built-in example manifolds, served as canonical DSL text.

``iwasawa_ab(<t>)`` is the deformed Iwasawa fibre along the t12 direction, built on
demand by :func:`app.services.deform.ab_fiber`.
"""
from pathlib import Path
from typing import Dict, List, Tuple
import logging
import re

from ..core.exceptions import RegistryException
from ..models.structeq import ComplexNilmanifold, parse_manifold, parse_scalar, print_manifold, validate

logger = logging.getLogger(__name__)

BUILTIN_PREFIX = "builtin:"

_TEXTS: Dict[str, str] = {
    "torus2": """
dim 2
d phi1 = 0
d phi2 = 0
""",
    "torus3": """
dim 3
d phi1 = 0
d phi2 = 0
d phi3 = 0
""",
    "iwasawa": """
dim 3
d phi1 = 0
d phi2 = 0
d phi3 = -1 * phi1 ^ phi2
""",
    "kodaira_thurston": """
dim 2
d phi1 = 0
d phi2 = phi1 ^ conj(phi1)
""",
    "heisenberg_step3": """
dim 4
d phi1 = 0
d phi2 = 0
d phi3 = phi1 ^ phi2
d phi4 = phi1 ^ phi3
""",
}

DESCRIPTIONS: Dict[str, str] = {
    "torus2": "complex torus of dimension 2",
    "torus3": "complex torus of dimension 3",
    "iwasawa": "Iwasawa manifold, complex parallelisable, 2-step",
    "kodaira_thurston": "Kodaira-Thurston surface, not parallelisable",
    "heisenberg_step3": "3-step complex parallelisable nilmanifold of dimension 4",
    "iwasawa_ab(<t>)": "small deformation of the Iwasawa manifold with only t12 = t nonzero",
}

_AB_PATTERN = re.compile(r"iwasawa_ab\((.+)\)$")


def available() -> List[str]:
    return sorted(DESCRIPTIONS)


def _ab_text(argument: str) -> str:
    # deform itself loads the iwasawa entry from this registry
    from .deform import ab_fiber

    fibre = ab_fiber(parse_scalar(argument))
    return print_manifold(fibre.eqs)


def builtin(name: str) -> str:
    """Canonical DSL text of a built-in manifold."""
    name = name.strip()
    if name in _TEXTS:
        return print_manifold(parse_manifold(_TEXTS[name]))
    match = _AB_PATTERN.match(name)
    if match:
        return _ab_text(match.group(1))
    raise RegistryException(f"Unknown builtin {name!r}; available: {', '.join(available())}",
                            error_code="UNKNOWN_BUILTIN")


def load_builtin(name: str) -> ComplexNilmanifold:
    return validate(parse_manifold(builtin(name)), name=name)


def read_source(source: str) -> Tuple[str, str]:
    """(DSL text, display name) for ``builtin:<name>`` or a file path."""
    if source.startswith(BUILTIN_PREFIX):
        name = source[len(BUILTIN_PREFIX):]
        return builtin(name), name
    path = Path(source)
    if not path.is_file():
        raise RegistryException(f"No such manifold file: {source}", error_code="NOT_FOUND")
    return path.read_text(encoding="utf-8"), path.stem
