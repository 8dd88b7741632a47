"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator


class RunRequest(BaseModel):
    """Start a benchmark run.

    Exactly one of ``config`` (inline JSON object, relative paths resolved
    against the server's working directory) or ``config_path`` (server-side
    file, relative paths resolved against its directory) must be given.
    ``seed`` and ``output_dir`` override the config when set.
    """

    config: dict | None = None
    config_path: str | None = None
    workers: int = Field(default=1, ge=1)
    seed: int | None = None
    output_dir: str | None = None

    @model_validator(mode="after")
    def _one_config_source(self) -> "RunRequest":
        if (self.config is None) == (self.config_path is None):
            raise ValueError("provide exactly one of config or config_path")
        return self


class CellErrorModel(BaseModel):
    cell: str
    message: str


class CellSummary(BaseModel):
    embedding: str
    task: str
    classifier: str
    reduction: str
    mean_accuracy: float
    macro_f1: float


class RunResponse(BaseModel):
    """status is "ok" when every cell completed, "partial" otherwise.
    Full per-cell detail lives in the written files."""

    status: str
    report_count: int
    error_count: int
    errors: list[CellErrorModel]
    cells: list[CellSummary]
    aggregates: dict
    output_dir: str
    files: list[str]


class ReduceRequest(BaseModel):
    embeddings_path: str
    spec: str
    out_path: str
    collapse: bool = False


class ReduceResponse(BaseModel):
    name: str
    words: int
    input_dim: int
    output_dim: int
    out_path: str


class InspectRequest(BaseModel):
    embeddings_path: str
    collapse: bool = False


class InspectResponse(BaseModel):
    name: str
    words: int
    dim: int
    min_value: float
    max_value: float


class HealthResponse(BaseModel):
    status: str
