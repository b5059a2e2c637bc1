"""Request and response bodies."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class Health(BaseModel):
    status: str = "ok"
    version: str


class AnalyzeRequest(BaseModel):
    quantity: Literal["entropy", "gv", "rate", "mi", "rankprob"]
    p: Optional[float] = Field(None, ge=0, le=1)
    pmf: Optional[list[float]] = None
    rate: Optional[float] = Field(None, ge=0)
    t: Optional[int] = Field(None, ge=2, le=64)
    l: Optional[int] = Field(None, ge=1, le=4096)
    e: Optional[int] = Field(None, ge=1, le=4096)


class AnalyzeResponse(BaseModel):
    quantity: str
    value: float


class RankTableRequest(BaseModel):
    lmax: int = Field(..., ge=1, le=64)


class RankRowModel(BaseModel):
    l: int
    m: int
    k: int
    count: str  # decimal text; counts overflow JSON numbers quickly
    brute: Optional[str] = None


class RankTableResponse(BaseModel):
    rows: list[RankRowModel]
    oracle_ok: bool


class SpectrumRequest(BaseModel):
    ensemble: Literal["iid", "linear", "coset"]
    n: int = Field(..., ge=1, le=4096)
    M: Optional[int] = Field(None, ge=2)
    l: Optional[int] = Field(None, ge=1)
    seed: int = 0


class SpectrumRowModel(BaseModel):
    d: int
    pairs: int
    exponent: Optional[float]
    predicted: float


class SpectrumResponse(BaseModel):
    n: int
    M: int
    rate: float
    rows: list[SpectrumRowModel]


class SimulateRequest(BaseModel):
    config: str = Field(..., description="experiment file text, one 'key = value' per line")
    seed: Optional[int] = None
    fixed_codebook: bool = False


class ResultRowModel(BaseModel):
    ensemble: str
    attack: str
    decoder: str
    n: int
    rate: float
    t: int
    trials: int
    misid: int
    pm: float
    stderr: float
    seed: int


class SimulateResponse(BaseModel):
    rows: list[ResultRowModel]
    csv: str
