# app/schemas/requests.py
from pydantic import BaseModel, Field, model_validator
from typing import List, Optional

from ..services.cohomology import Theory
from ..services.metrics import MetricKind


class ManifoldRequest(BaseModel):
    """A manifold given either as DSL text or as a builtin name"""
    source: Optional[str] = Field(None, max_length=100_000, description="Manifold DSL text")
    builtin: Optional[str] = Field(None, max_length=100, description="Builtin name, e.g. iwasawa or iwasawa_ab(1/10)")

    @model_validator(mode="after")
    def exactly_one_input(self):
        if (self.source is None) == (self.builtin is None):
            raise ValueError("Provide exactly one of 'source' or 'builtin'")
        return self


class CohomologyRequest(ManifoldRequest):
    theory: Theory = Field(Theory.DERHAM, description="derham, dolbeault or bottchern")


class FrolicherRequest(ManifoldRequest):
    r_max: Optional[int] = Field(None, ge=1, le=20, description="Last page to compute")


class MetricsRequest(ManifoldRequest):
    kinds: Optional[List[MetricKind]] = Field(None, description="Subset of kahler, balanced, sg, gauduchon")
    budget: Optional[int] = Field(None, ge=1, le=1_000_000, description="Numeric iterations per search")
    seed: Optional[int] = Field(None, description="Search seed")


class KuranishiRequest(ManifoldRequest):
    max_degree: Optional[int] = Field(None, ge=1, le=20, description="Maurer-Cartan degree bound")


class DeformRequest(ManifoldRequest):
    at: str = Field(..., min_length=1, max_length=1000, description="Point, e.g. t12=1/10,t11=0")
    psi: Optional[str] = Field(None, description="'builtin:iwasawa', or vector form text ('dim 3', 'theta3 = ...'); default solves")
    max_degree: Optional[int] = Field(None, ge=1, le=20)


class ReportRequest(ManifoldRequest):
    budget: Optional[int] = Field(None, ge=1, le=1_000_000)
    seed: Optional[int] = None
    max_degree: Optional[int] = Field(None, ge=1, le=20)


class FamilyRequest(ManifoldRequest):
    points: List[str] = Field(..., min_length=1, max_length=50, description="Points such as 't12=1/10'")
    psi: Optional[str] = None
    budget: Optional[int] = Field(None, ge=1, le=1_000_000)
    seed: Optional[int] = None
    max_degree: Optional[int] = Field(None, ge=1, le=20)
