# app/api/routes/examples.py
from fastapi import APIRouter
from typing import List

from ...schemas.reports import ExampleOut
from ...services import builtins

router = APIRouter()


@router.get("", response_model=List[ExampleOut])
def list_examples():
    return [ExampleOut(name=name, description=builtins.DESCRIPTIONS[name]) for name in builtins.available()]


@router.get("/{name:path}", response_model=ExampleOut)
def get_example(name: str):
    """
    Canonical DSL text of a builtin; ``iwasawa_ab(1/10)`` style names are computed on demand
    """
    text = builtins.builtin(name)
    description = builtins.DESCRIPTIONS.get(name, builtins.DESCRIPTIONS["iwasawa_ab(<t>)"])
    return ExampleOut(name=name, description=description, text=text)
