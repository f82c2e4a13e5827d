"""Volume datasets: RAW+JSON metadata I/O, block geometry, synthetic test volumes.

Voxel arrays are indexed ``[x, y, z]``; the RAW on-disk layout is x-fastest,
which maps to Fortran order for that indexing convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SYNTH_KINDS = ("sphere_shell", "two_spheres", "noise", "background_dominant")

_DTYPE_FOR_BITS = {8: np.uint8, 16: np.uint16}


class VolumeError(ValueError):
    """Invalid volume data or metadata."""


class SizeMismatchError(VolumeError):
    """RAW file length does not match dims times bytes per voxel."""


class BitDepthError(VolumeError):
    """Bit depth other than 8 or 16."""


@dataclass(frozen=True)
class BlockGrid:
    """Geometry of the non-overlapping b^3 voxel blocks covering a volume.

    Edge blocks may be partial: ``bdims`` is the ceiling division of ``dims``
    by ``b``, and every voxel belongs to exactly one block.
    """

    b: int
    dims: tuple[int, int, int]
    bdims: tuple[int, int, int]

    @classmethod
    def for_dims(cls, dims: tuple[int, int, int], b: int = 4) -> "BlockGrid":
        if b < 1:
            raise ValueError(f"block edge must be >= 1, got {b}")
        dims = tuple(int(d) for d in dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"dims must be three positive integers, got {dims}")
        bdims = tuple(-(-d // b) for d in dims)
        return cls(b=int(b), dims=dims, bdims=bdims)

    @property
    def num_blocks(self) -> int:
        bx, by, bz = self.bdims
        return bx * by * bz

    def block_of(self, voxel: tuple[int, int, int]) -> tuple[int, int, int]:
        x, y, z = voxel
        return (x // self.b, y // self.b, z // self.b)


@dataclass(frozen=True)
class Volume:
    """A scalar volume with its voxel spacing and attained intensity range."""

    dims: tuple[int, int, int]
    voxels: np.ndarray  # shape == dims, dtype uint8 or uint16, indexed [x, y, z]
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    intensity_range: tuple[int, int] = field(init=False)

    def __post_init__(self) -> None:
        if self.voxels.dtype not in (np.uint8, np.uint16):
            raise BitDepthError(f"unsupported voxel dtype {self.voxels.dtype}")
        dims = tuple(int(d) for d in self.dims)
        if self.voxels.shape != dims:
            raise VolumeError(
                f"voxel array shape {self.voxels.shape} does not match dims {dims}"
            )
        if any(s <= 0 for s in self.spacing):
            raise VolumeError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        object.__setattr__(
            self,
            "intensity_range",
            (int(self.voxels.min()), int(self.voxels.max())),
        )

    @property
    def bits(self) -> int:
        return 8 if self.voxels.dtype == np.uint8 else 16

    @property
    def num_voxels(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @classmethod
    def from_array(
        cls,
        voxels: np.ndarray,
        spacing: tuple[float, float, float] = (1.0, 1.0, 1.0),
    ) -> "Volume":
        voxels = np.ascontiguousarray(voxels)
        return cls(dims=tuple(voxels.shape), voxels=voxels, spacing=spacing)

    def histogram(self, bins: int = 256) -> np.ndarray:
        """Fixed-width intensity histogram over the full representable range."""
        shift = self.bits - int(round(math.log2(bins)))
        if shift < 0:
            raise ValueError(f"cannot split {self.bits}-bit range into {bins} bins")
        coarse = self.voxels >> shift if shift else self.voxels
        return np.bincount(coarse.ravel().astype(np.int64), minlength=bins)


def load_raw(data_path: str | Path, meta_path: str | Path) -> Volume:
    """Load a RAW volume described by a JSON metadata file.

    The metadata requires ``dims`` and ``bits`` (8 or 16); ``endianness``
    ("le"/"be", default "le") and ``spacing`` (default 1,1,1) are optional.
    The RAW payload is x-fastest.
    """
    meta_path = Path(meta_path)
    data_path = Path(data_path)
    try:
        meta = json.loads(meta_path.read_text())
    except json.JSONDecodeError as exc:
        raise VolumeError(f"malformed metadata JSON in {meta_path}: {exc}") from exc
    for key in ("dims", "bits"):
        if key not in meta:
            raise VolumeError(f"metadata {meta_path} is missing required key {key!r}")
    dims = tuple(int(d) for d in meta["dims"])
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise VolumeError(f"metadata dims must be three positive integers, got {dims}")
    bits = int(meta["bits"])
    if bits not in _DTYPE_FOR_BITS:
        raise BitDepthError(f"unsupported bit depth {bits} (expected 8 or 16)")
    endianness = meta.get("endianness", "le")
    if endianness not in ("le", "be"):
        raise VolumeError(f"unsupported endianness {endianness!r}")
    spacing = tuple(float(s) for s in meta.get("spacing", (1.0, 1.0, 1.0)))

    raw = data_path.read_bytes()
    expected = dims[0] * dims[1] * dims[2] * (bits // 8)
    if len(raw) != expected:
        raise SizeMismatchError(
            f"{data_path} holds {len(raw)} bytes, expected {expected} "
            f"for dims {dims} at {bits} bits"
        )
    if bits == 8:
        dtype = np.dtype(np.uint8)
    else:
        dtype = np.dtype("<u2") if endianness == "le" else np.dtype(">u2")
    flat = np.frombuffer(raw, dtype=dtype)
    voxels = np.ascontiguousarray(
        flat.astype(_DTYPE_FOR_BITS[bits]).reshape(dims, order="F")
    )
    return Volume(dims=dims, voxels=voxels, spacing=spacing)


def save_raw(volume: Volume, data_path: str | Path, meta_path: str | Path) -> None:
    """Write a volume as little-endian x-fastest RAW plus JSON metadata."""
    data_path = Path(data_path)
    meta_path = Path(meta_path)
    flat = volume.voxels.flatten(order="F")
    if volume.bits == 16:
        flat = flat.astype("<u2")
    data_path.write_bytes(flat.tobytes())
    meta = {
        "dims": list(volume.dims),
        "bits": volume.bits,
        "endianness": "le",
        "spacing": list(volume.spacing),
    }
    meta_path.write_text(json.dumps(meta, indent=2) + "\n")


def _coordinate_grid(dims: tuple[int, int, int]) -> tuple[np.ndarray, ...]:
    axes = [np.arange(n, dtype=np.float64) for n in dims]
    return np.meshgrid(*axes, indexing="ij")


def _smooth(a: np.ndarray, passes: int = 2) -> np.ndarray:
    # Separable 3-tap box blur with clamped edges; cheap and deterministic.
    for _ in range(passes):
        for ax in range(3):
            m = np.swapaxes(a, 0, ax)
            out = m.copy()
            out[1:] += m[:-1]
            out[0] += m[0]
            out[:-1] += m[1:]
            out[-1] += m[-1]
            a = np.swapaxes(out / 3.0, 0, ax)
    return a


def synth_volume(
    kind: str,
    dims: int | tuple[int, int, int],
    seed: int = 0,
) -> Volume:
    """Build a deterministic 8-bit synthetic volume.

    Kinds: sphere_shell (hollow shell over empty background), two_spheres
    (two separated solid spheres at distinct intensity bands), noise
    (smoothed random field spanning the full range), background_dominant
    (at least 60% of the voxels at the minimum intensity).
    """
    if isinstance(dims, int):
        dims = (dims, dims, dims)
    dims = tuple(int(d) for d in dims)
    if any(d < 8 for d in dims):
        raise VolumeError(f"synthetic volumes need dims >= 8, got {dims}")
    if kind not in SYNTH_KINDS:
        raise VolumeError(f"unknown synthetic kind {kind!r}; expected one of {SYNTH_KINDS}")

    rng = np.random.default_rng(seed)
    x, y, z = _coordinate_grid(dims)
    center = [(d - 1) / 2.0 for d in dims]
    scale = min(dims) / 2.0
    r = np.sqrt(
        ((x - center[0]) / scale) ** 2
        + ((y - center[1]) / scale) ** 2
        + ((z - center[2]) / scale) ** 2
    )

    out = np.zeros(dims, dtype=np.float64)
    if kind == "sphere_shell":
        shell = np.abs(r - 0.7) < 0.12
        profile = 1.0 - np.abs(r - 0.7) / 0.12
        out[shell] = 120.0 + 130.0 * profile[shell]
        out += rng.uniform(0.0, 0.999, dims) * shell  # breaks ties, keeps support
    elif kind == "two_spheres":
        ca = [c - 0.35 * scale for c in center]
        cb = [c + 0.35 * scale for c in center]
        ra = np.sqrt((x - ca[0]) ** 2 + (y - ca[1]) ** 2 + (z - ca[2]) ** 2) / (0.3 * scale)
        rb = np.sqrt((x - cb[0]) ** 2 + (y - cb[1]) ** 2 + (z - cb[2]) ** 2) / (0.3 * scale)
        inside_a = ra < 1.0
        inside_b = rb < 1.0
        out[inside_a] = 80.0 + 40.0 * (1.0 - ra[inside_a])
        out[inside_b] = 180.0 + 60.0 * (1.0 - rb[inside_b])
    elif kind == "noise":
        field_ = _smooth(rng.random(dims))
        lo, hi = field_.min(), field_.max()
        out = (field_ - lo) / (hi - lo) * 255.0
    else:  # background_dominant
        ball = r < 0.55
        out[ball] = 1.0 + 220.0 * (1.0 - r[ball] / 0.55)
        out[ball] += rng.uniform(0.0, 30.0, dims)[ball]
        np.clip(out, 0.0, 255.0, out=out)

    voxels = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    if kind == "background_dominant":
        # ball voxels stay nonzero so the fill value is exactly the minimum
        voxels[(r < 0.55) & (voxels == 0)] = 1
    return Volume(dims=dims, voxels=voxels)


def _dilate3(a: np.ndarray) -> np.ndarray:
    for ax in range(3):
        m = np.swapaxes(a, 0, ax)
        out = m.copy()
        np.maximum(out[1:], m[:-1], out=out[1:])
        np.maximum(out[:-1], m[1:], out=out[:-1])
        a = np.swapaxes(out, 0, ax)
    return np.ascontiguousarray(a)


def _erode3(a: np.ndarray) -> np.ndarray:
    for ax in range(3):
        m = np.swapaxes(a, 0, ax)
        out = m.copy()
        np.minimum(out[1:], m[:-1], out=out[1:])
        np.minimum(out[:-1], m[1:], out=out[:-1])
        a = np.swapaxes(out, 0, ax)
    return np.ascontiguousarray(a)


def _block_reduce(a: np.ndarray, b: int, ufunc: np.ufunc) -> np.ndarray:
    for ax in range(3):
        idx = np.arange(0, a.shape[ax], b)
        a = ufunc.reduceat(a, idx, axis=ax)
    return np.ascontiguousarray(a)


def block_min_max(volume: Volume, grid: BlockGrid) -> tuple[np.ndarray, np.ndarray]:
    """Per-block intensity min/max over the block extended by a 1-voxel apron.

    The apron is clipped at the volume bounds. Returned arrays have shape
    ``grid.bdims`` and the volume's dtype.
    """
    if grid.dims != volume.dims:
        raise VolumeError(f"grid dims {grid.dims} do not match volume dims {volume.dims}")
    vox = volume.voxels
    mins = _block_reduce(_erode3(vox), grid.b, np.minimum)
    maxs = _block_reduce(_dilate3(vox), grid.b, np.maximum)
    return mins, maxs
