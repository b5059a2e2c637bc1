"""HTTP front end over the library."""

from __future__ import annotations

from dataclasses import replace

from fastapi import FastAPI, HTTPException

from .. import __version__, commands
from ..ensembles import CodebookTooLarge
from ..harness import ConfigError, ExperimentConfig
from .schemas import (AnalyzeRequest, AnalyzeResponse, Health, RankRowModel, RankTableRequest,
                      RankTableResponse, ResultRowModel, SimulateRequest, SimulateResponse,
                      SpectrumRequest, SpectrumResponse, SpectrumRowModel)


def create_app() -> FastAPI:
    app = FastAPI(title="collufp", version=__version__)

    @app.get("/health", response_model=Health)
    def health():
        return Health(version=__version__)

    @app.post("/analyze", response_model=AnalyzeResponse)
    def analyze(req: AnalyzeRequest):
        params = req.model_dump(exclude={"quantity"}, exclude_none=True)
        try:
            value = commands.analyze(req.quantity, **params)
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        return AnalyzeResponse(quantity=req.quantity, value=value)

    @app.post("/ranktable", response_model=RankTableResponse)
    def ranktable(req: RankTableRequest):
        rows, ok = commands.rank_table(req.lmax)
        out = [RankRowModel(l=r.l, m=r.m, k=r.k, count=str(r.count),
                            brute=None if r.brute is None else str(r.brute)) for r in rows]
        return RankTableResponse(rows=out, oracle_ok=ok)

    @app.post("/spectrum", response_model=SpectrumResponse)
    def spectrum(req: SpectrumRequest):
        try:
            est, rows = commands.spectrum(req.ensemble, req.n, req.seed, M=req.M, l=req.l)
        except CodebookTooLarge as exc:
            raise HTTPException(413, str(exc)) from None
        except ValueError as exc:
            raise HTTPException(422, str(exc)) from None
        return SpectrumResponse(n=est.n, M=est.M, rate=est.rate,
                                rows=[SpectrumRowModel(**vars(r)) for r in rows])

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        try:
            cfg = ExperimentConfig.parse(req.config)
            if req.seed is not None:
                cfg = replace(cfg, seed=req.seed)
            if req.fixed_codebook:
                cfg = replace(cfg, fixed_codebook=True)
            table = commands.simulate(cfg)
        except ConfigError as exc:
            raise HTTPException(422, str(exc)) from None
        except (CodebookTooLarge, FileNotFoundError) as exc:
            raise HTTPException(400, str(exc)) from None
        rows = [ResultRowModel(**r.as_dict()) for r in table.rows]
        return SimulateResponse(rows=rows, csv=table.to_csv())

    return app


app = create_app()
