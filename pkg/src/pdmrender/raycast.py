"""Volume ray casting over a fixed sample grid with optional block skipping.

Rays march the grid t_k = t_entry + k*step in voxel arc length. Skipping
only ever jumps between grid indices, and evaluated sample positions are
recomputed from the index, so every skip mode composites bit-identical
framebuffers; only the work counters differ.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import _kernels
from .acceleration import DistanceMap, OccupancyMap
from .volume import BlockGrid, Volume

ESS_MODES = ("none", "block", "distance", "pdm")

DEFAULT_BLOCK_EDGE = 4


class EssModeError(ValueError):
    """Unknown empty-space-skipping mode or wrong accelerator type."""


class CameraError(ValueError):
    """Degenerate camera configuration."""


@dataclass(frozen=True)
class Camera:
    """Pinhole camera; orbit_angle spins the rig about the world vertical
    axis through the volume centre before rays are generated."""

    eye: tuple[float, float, float]
    look_at: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 1.0, 0.0)
    vertical_fov: float = 45.0
    orbit_angle: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.vertical_fov < 180.0:
            raise CameraError(f"vertical_fov must be in (0, 180), got {self.vertical_fov}")
        eye = np.asarray(self.eye, dtype=np.float64)
        at = np.asarray(self.look_at, dtype=np.float64)
        up = np.asarray(self.up, dtype=np.float64)
        forward = at - eye
        if np.linalg.norm(forward) == 0.0:
            raise CameraError("eye and look_at coincide")
        if np.linalg.norm(up) == 0.0:
            raise CameraError("up vector is zero")
        if np.linalg.norm(np.cross(forward, up)) == 0.0:
            raise CameraError("up vector is parallel to the view direction")
        object.__setattr__(self, "eye", tuple(float(v) for v in eye))
        object.__setattr__(self, "look_at", tuple(float(v) for v in at))
        object.__setattr__(self, "up", tuple(float(v) for v in up))


@dataclass(frozen=True)
class RenderSettings:
    width: int
    height: int
    step: float = 0.5
    ess_mode: str = "none"
    ert_enabled: bool = True
    ert_threshold: float = 0.98

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"viewport must be >= 1x1, got {self.width}x{self.height}")
        if not self.step > 0.0:
            raise ValueError(f"step must be positive, got {self.step}")
        if not 0.0 < self.ert_threshold <= 1.0:
            raise ValueError(f"ert_threshold must be in (0, 1], got {self.ert_threshold}")
        if self.ess_mode not in ESS_MODES:
            raise EssModeError(
                f"unknown ess mode {self.ess_mode!r}; expected one of {ESS_MODES}"
            )


@dataclass(frozen=True)
class Framebuffer:
    """rgba8 image; row 0 is the top scanline."""

    width: int
    height: int
    pixels: np.ndarray  # uint8, shape (height, width, 4)


@dataclass(frozen=True)
class RenderStats:
    """Work counters for one render.

    samples_evaluated + samples_skipped equals the fixed-grid sample count of
    every ray; skipped covers both block jumps and samples behind an early
    termination. blocks_skipped counts skip events, not blocks crossed.
    """

    rays: int
    samples_evaluated: int
    samples_skipped: int
    blocks_skipped: int
    ert_terminations: int
    wall_time: float

    def as_dict(self) -> dict:
        return {
            "rays": self.rays,
            "samples_evaluated": self.samples_evaluated,
            "samples_skipped": self.samples_skipped,
            "blocks_skipped": self.blocks_skipped,
            "ert_terminations": self.ert_terminations,
            "wall_time": self.wall_time,
        }


def _rotate_about_vertical(p: np.ndarray, centre: np.ndarray, angle: float) -> np.ndarray:
    c = math.cos(angle)
    s = math.sin(angle)
    q = p - centre
    return centre + np.array(
        [c * q[0] + s * q[2], q[1], -s * q[0] + c * q[2]], dtype=np.float64
    )


def volume_centre_world(volume: Volume) -> np.ndarray:
    dims = np.asarray(volume.dims, dtype=np.float64)
    sp = np.asarray(volume.spacing, dtype=np.float64)
    return (dims - 1.0) / 2.0 * sp


def orbit_camera(
    volume: Volume,
    angle: float = 0.0,
    vertical_fov: float = 45.0,
    elevation: float = 0.35,
    margin: float = 1.2,
) -> Camera:
    """Camera on an orbit ring around the volume, framed to fit it."""
    centre = volume_centre_world(volume)
    dims = np.asarray(volume.dims, dtype=np.float64)
    sp = np.asarray(volume.spacing, dtype=np.float64)
    half_diag = float(np.linalg.norm((dims - 1.0) * sp)) / 2.0
    distance = margin * half_diag / math.tan(math.radians(vertical_fov) / 2.0)
    phi = math.atan(elevation)
    offset = np.array(
        [0.0, distance * math.sin(phi), distance * math.cos(phi)], dtype=np.float64
    )
    return Camera(
        eye=tuple(centre + offset),
        look_at=tuple(centre),
        vertical_fov=vertical_fov,
        orbit_angle=angle,
    )


def camera_rays(
    camera: Camera, width: int, height: int, volume: Volume
) -> tuple[np.ndarray, np.ndarray]:
    """Voxel-space ray origin and per-pixel unit directions (row-major).

    Directions are normalized in voxel coordinates, so ray parameters are
    voxel arc length regardless of anisotropic spacing.
    """
    centre = volume_centre_world(volume)
    # mod keeps full turns exactly periodic through cos/sin
    angle = camera.orbit_angle % (2.0 * math.pi)
    eye = _rotate_about_vertical(np.asarray(camera.eye), centre, angle)
    at = _rotate_about_vertical(np.asarray(camera.look_at), centre, angle)
    up_hint = np.asarray(camera.up, dtype=np.float64)

    forward = at - eye
    forward /= np.linalg.norm(forward)
    right = np.cross(forward, up_hint)
    nr = np.linalg.norm(right)
    if nr == 0.0:
        raise CameraError("up vector is parallel to the view direction")
    right /= nr
    up = np.cross(right, forward)

    tan_half = math.tan(math.radians(camera.vertical_fov) / 2.0)
    aspect = width / height
    xs = (2.0 * (np.arange(width, dtype=np.float64) + 0.5) / width - 1.0) * tan_half * aspect
    ys = (1.0 - 2.0 * (np.arange(height, dtype=np.float64) + 0.5) / height) * tan_half
    dirs = (
        forward[None, None, :]
        + xs[None, :, None] * right[None, None, :]
        + ys[:, None, None] * up[None, None, :]
    )
    sp = np.asarray(volume.spacing, dtype=np.float64)
    dirs = dirs / sp[None, None, :]
    dirs /= np.linalg.norm(dirs, axis=2, keepdims=True)
    origin = eye / sp
    return origin, np.ascontiguousarray(dirs.reshape(-1, 3))


def _distance_field_for(
    volume: Volume, settings: RenderSettings, accel
) -> tuple[np.ndarray, int]:
    """Per-block skip distances plus block edge for the marcher."""
    mode = settings.ess_mode
    if mode == "none":
        if accel is not None:
            raise EssModeError("ess mode 'none' takes no accelerator")
        grid = BlockGrid.for_dims(volume.dims, DEFAULT_BLOCK_EDGE)
        return np.zeros(grid.bdims, dtype=np.uint8), grid.b
    if mode == "block":
        if not isinstance(accel, OccupancyMap):
            raise EssModeError("ess mode 'block' needs an OccupancyMap")
        field_ = np.where(accel.occupied, 0, 1).astype(np.uint8)
    elif mode in ("distance", "pdm"):
        if not isinstance(accel, DistanceMap):
            raise EssModeError(f"ess mode {mode!r} needs a DistanceMap")
        field_ = accel.dist
    else:  # pragma: no cover - settings validation rejects this earlier
        raise EssModeError(f"unknown ess mode {mode!r}")
    grid = BlockGrid.for_dims(volume.dims, accel.b)
    if grid.bdims != tuple(accel.bdims):
        raise EssModeError(
            f"accelerator block dims {accel.bdims} do not fit volume dims "
            f"{volume.dims} at block edge {accel.b}"
        )
    return field_, accel.b


def render(
    volume: Volume,
    tf,
    camera: Camera,
    settings: RenderSettings,
    accel=None,
) -> tuple[Framebuffer, RenderStats]:
    """Composite the volume front to back into an rgba8 framebuffer.

    accel must match settings.ess_mode: None for 'none', an OccupancyMap for
    'block', a DistanceMap for 'distance' or 'pdm'.
    """
    if tf.lut.shape[0] != (1 << volume.bits):
        raise ValueError(
            f"tf covers {tf.lut.shape[0]} intensities, volume needs {1 << volume.bits}"
        )
    start = time.perf_counter()
    dist_field, b = _distance_field_for(volume, settings, accel)
    origin, dirs = camera_rays(camera, settings.width, settings.height, volume)
    n_rays = dirs.shape[0]
    rgba = np.empty((n_rays, 4), dtype=np.float64)
    counters = np.empty((n_rays, 4), dtype=np.int64)
    _kernels.march_rays(
        volume.voxels,
        np.ascontiguousarray(tf.lut),
        dist_field,
        b,
        float(settings.step),
        settings.ert_enabled,
        float(settings.ert_threshold),
        origin,
        dirs,
        rgba,
        counters,
    )
    pixels = (
        (np.clip(rgba, 0.0, 1.0) * 255.0)
        .round()
        .astype(np.uint8)
        .reshape(settings.height, settings.width, 4)
    )
    wall = time.perf_counter() - start
    totals = counters.sum(axis=0)
    stats = RenderStats(
        rays=n_rays,
        samples_evaluated=int(totals[1]),
        samples_skipped=int(totals[0] - totals[1]),
        blocks_skipped=int(totals[2]),
        ert_terminations=int(totals[3]),
        wall_time=wall,
    )
    return Framebuffer(settings.width, settings.height, pixels), stats


def ess_advance(
    mode: str,
    accel,
    block_coord: tuple[int, int, int],
    ray: tuple[tuple[float, float, float], tuple[float, float, float]],
    t_current: float,
    grid: BlockGrid,
    t_entry: float,
    dt: float,
) -> float:
    """Next fixed-grid sample parameter after the skip rule at t_current.

    The ray is (origin, direction) in voxel coordinates. With no skip data
    (mode 'none' or an occupied block) this is simply the next grid sample;
    with distance d >= 1 it is the first grid sample at or beyond the exit
    of the safe region spanning blocks [B - (d-1), B + (d-1)], and always
    strictly beyond t_current.
    """
    if mode not in ESS_MODES:
        raise EssModeError(f"unknown ess mode {mode!r}; expected one of {ESS_MODES}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    origin, direction = (np.asarray(v, dtype=np.float64) for v in ray)
    k_cur = int(math.floor((t_current - t_entry) / dt + 1e-9))

    def grid_sample(k: int) -> float:
        return t_entry + k * dt

    if mode == "none":
        return grid_sample(k_cur + 1)
    bi, bj, bk = (int(c) for c in block_coord)
    if mode == "block":
        if not isinstance(accel, OccupancyMap):
            raise EssModeError("ess mode 'block' needs an OccupancyMap")
        d = 0 if accel.occupied[bi, bj, bk] else 1
    else:
        if not isinstance(accel, DistanceMap):
            raise EssModeError(f"ess mode {mode!r} needs a DistanceMap")
        d = int(accel.dist[bi, bj, bk])
    if d == 0:
        return grid_sample(k_cur + 1)
    nx, ny, nz = grid.dims
    t_exit = _kernels.safe_box_exit(
        origin[0], origin[1], origin[2],
        direction[0], direction[1], direction[2],
        bi, bj, bk, d - 1, grid.b,
        nx - 1.0, ny - 1.0, nz - 1.0,
    )
    k_next = int(math.ceil((t_exit - t_entry) / dt - 1e-9))
    if k_next <= k_cur:
        k_next = k_cur + 1
    return grid_sample(k_next)


def save_image(fb: Framebuffer, path: str | Path) -> None:
    """Write PNG (default) or binary PPM when the suffix is .ppm.

    PPM is P6 RGB and drops the alpha channel; PNG keeps all four channels.
    """
    if fb.width < 1 or fb.height < 1 or fb.pixels.size == 0:
        raise ValueError("cannot save an empty framebuffer")
    path = Path(path)
    if path.suffix.lower() == ".ppm":
        header = f"P6\n{fb.width} {fb.height}\n255\n".encode()
        path.write_bytes(header + fb.pixels[:, :, :3].tobytes())
    else:
        Image.fromarray(fb.pixels, mode="RGBA").save(path, format="PNG")


def encode_png(fb: Framebuffer) -> bytes:
    """PNG bytes for a framebuffer, identical to what save_image writes."""
    import io

    buf = io.BytesIO()
    Image.fromarray(fb.pixels, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()
