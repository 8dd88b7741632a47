"""HTTP service exposing the benchmark over three POST endpoints.

The service runs on the machine that holds the data: requests name
server-side paths, and run outputs are written server-side.  Domain errors
(bad configs, malformed files, infeasible reductions) map to 400 with the
error message in ``detail``; anything else is a 500.
"""

from __future__ import annotations

import dataclasses

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import reduce as reduce_mod
from .. import runner
from ..embeddings import load_embeddings, write_embeddings
from ..errors import EmbedprobeError
from .schemas import (
    HealthResponse,
    InspectRequest,
    InspectResponse,
    ReduceRequest,
    ReduceResponse,
    RunRequest,
    RunResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="embedprobe", version="0.1.0")

    @app.exception_handler(EmbedprobeError)
    async def _domain_error(request: Request, exc: EmbedprobeError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    async def health() -> HealthResponse:
        return HealthResponse(status="ok")

    @app.post("/run", response_model=RunResponse)
    def run(req: RunRequest) -> RunResponse:
        if req.config_path is not None:
            config = runner.parse_config(req.config_path)
        else:
            config = runner.validate_config(req.config)
        if req.seed is not None:
            config = dataclasses.replace(config, seed=req.seed)
        if req.output_dir is not None:
            config = dataclasses.replace(config, output_dir=req.output_dir)
        result = runner.run_experiment(config, workers=req.workers)
        files = runner.emit_reports(result, config.output_dir)
        return RunResponse(
            status="ok" if result.ok else "partial",
            report_count=len(result.reports),
            error_count=len(result.errors),
            errors=[{"cell": e.cell, "message": e.message} for e in result.errors],
            cells=[
                {
                    "embedding": r.embedding,
                    "task": r.task,
                    "classifier": r.classifier,
                    "reduction": r.reduction,
                    "mean_accuracy": r.mean_accuracy,
                    "macro_f1": r.macro_f1,
                }
                for r in result.reports
            ],
            aggregates=result.aggregates,
            output_dir=str(config.output_dir),
            files=files,
        )

    @app.post("/reduce", response_model=ReduceResponse)
    def reduce(req: ReduceRequest) -> ReduceResponse:
        stages = reduce_mod.parse_spec(req.spec)
        emb = load_embeddings(req.embeddings_path, collapse=req.collapse)
        out = reduce_mod.apply_pipeline(emb, stages)
        write_embeddings(out, req.out_path)
        return ReduceResponse(
            name=out.name,
            words=len(out),
            input_dim=emb.dim,
            output_dim=out.dim,
            out_path=req.out_path,
        )

    @app.post("/inspect", response_model=InspectResponse)
    def inspect(req: InspectRequest) -> InspectResponse:
        emb = load_embeddings(req.embeddings_path, collapse=req.collapse)
        return InspectResponse(
            name=emb.name,
            words=len(emb),
            dim=emb.dim,
            min_value=float(emb.vectors.min()),
            max_value=float(emb.vectors.max()),
        )

    return app
