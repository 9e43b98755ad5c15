from fractions import Fraction
from pathlib import Path

import pytest

from app.models.structeq import parse_manifold, validate
from app.services.builtins import load_builtin
from app.services.deform import ab_fiber

EXAMPLES_DIR = Path(__file__).resolve().parents[2] / "data" / "examples"


def load_example(name: str):
    path = EXAMPLES_DIR / f"{name}.nil"
    return validate(parse_manifold(path.read_text(encoding="utf-8")), name=name)


@pytest.fixture(scope="session")
def examples_dir() -> Path:
    return EXAMPLES_DIR


@pytest.fixture(scope="session")
def iwasawa():
    return load_builtin("iwasawa")


@pytest.fixture(scope="session")
def torus3():
    return load_builtin("torus3")


@pytest.fixture(scope="session")
def kodaira_thurston():
    return load_builtin("kodaira_thurston")


@pytest.fixture(scope="session")
def heisenberg_step3():
    return load_builtin("heisenberg_step3")


@pytest.fixture(scope="session")
def ab_tenth():
    """Deformed Iwasawa fibre at t12 = 1/10."""
    return ab_fiber(Fraction(1, 10))


@pytest.fixture(scope="session", params=["torus2", "torus3", "iwasawa", "kodaira_thurston", "heisenberg_step3"])
def corpus_manifold(request):
    return load_example(request.param)
