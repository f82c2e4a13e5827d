"""Request/response bodies for the render service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class SynthSpec(BaseModel):
    kind: Literal["sphere_shell", "two_spheres", "noise", "background_dominant"]
    dims: int | tuple[int, int, int] = 128
    seed: int = 0


class VolumeLoadRequest(BaseModel):
    """Load a session volume from a server-side RAW path or a synth spec."""

    synth: SynthSpec | None = None
    path: str | None = None
    meta_path: str | None = None
    partitions: int = Field(default=64, ge=1)
    scheme: Literal["uniform", "min_special"] = "uniform"
    occupancy: Literal["voxel", "range_apron"] = "range_apron"
    block_edge: int = Field(default=4, ge=1)
    rho_min: int | None = None


class VolumeLoadResponse(BaseModel):
    dims: tuple[int, int, int]
    bits: int
    n: int
    block_edge: int
    bdims: tuple[int, int, int]
    one_time_init_ms: float
    extra_memory_bytes: int


class TfControlPoint(BaseModel):
    intensity: float
    r: float
    g: float
    b: float
    a: float


class TfRequest(BaseModel):
    """A transfer function as control points or a raw lookup table."""

    bits: int | None = None
    control_points: list[TfControlPoint] | None = None
    lut: list[tuple[float, float, float, float]] | None = None


class TfResponse(BaseModel):
    selection: list[int]
    select_ms: float
    combine_ms: float
    dprime_nonzero_fraction: float


class InfoResponse(BaseModel):
    dims: tuple[int, int, int]
    bits: int
    n: int
    scheme: list[tuple[int, int]]
    histogram: list[int]
    block_edge: int
    occupancy_mode: str


class ErrorDetail(BaseModel):
    code: str
    message: str


class ErrorBody(BaseModel):
    error: ErrorDetail


class StreamRequest(BaseModel):
    """One frame request over the WebSocket."""

    angle: float = 0.0
    w: int = Field(default=256, ge=1, le=4096)
    h: int = Field(default=256, ge=1, le=4096)
    ess: Literal["none", "block", "distance", "pdm"] = "pdm"
    step: float = Field(default=0.5, gt=0.0)
