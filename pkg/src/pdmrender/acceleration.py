"""Empty-space-skipping structures: block occupancy maps, chessboard distance
maps, and per-partition distance map sets with cheap min-combine updates.

Distances are measured in blocks under the chessboard metric, stored as uint8
with saturation at 255; value 0 marks an occupied block. A full distance map
for one transfer function costs an occupancy scan plus a distance transform;
the per-partition set pays that once per partition up front, after which any
transfer function edit only needs an element-wise minimum over the selected
partitions' maps.
"""

from __future__ import annotations

import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels
from .transfer import (
    Partition,
    PartitionScheme,
    PartitionSelection,
    SelectionError,
    TransferFunction,
)
from .volume import BlockGrid, Volume, VolumeError, block_min_max

OCCUPANCY_MODES = ("voxel", "range_apron")

DIST_CLAMP = 255
_MAP_MAGIC = b"PDMD"
_SET_MAGIC = b"PDMS"


class OccupancyModeError(ValueError):
    """Unknown occupancy mode string."""


@dataclass(frozen=True)
class OccupancyMap:
    """One boolean per block: True where the block can contribute opacity."""

    b: int
    bdims: tuple[int, int, int]
    occupied: np.ndarray  # bool, shape bdims

    def __post_init__(self) -> None:
        if tuple(self.occupied.shape) != tuple(self.bdims):
            raise ValueError("occupancy array shape does not match bdims")

    @property
    def occupied_fraction(self) -> float:
        return float(np.count_nonzero(self.occupied)) / self.occupied.size


@dataclass(frozen=True)
class DistanceMap:
    """Chessboard block distance to the nearest occupied block, clamped at 255.

    A value of 0 means the block itself is occupied; with no occupied block
    anywhere every entry is 255.
    """

    b: int
    bdims: tuple[int, int, int]
    dist: np.ndarray  # uint8, shape bdims

    def __post_init__(self) -> None:
        if tuple(self.dist.shape) != tuple(self.bdims):
            raise ValueError("distance array shape does not match bdims")
        if self.dist.dtype != np.uint8:
            raise ValueError(f"distance array must be uint8, got {self.dist.dtype}")

    @property
    def occupied_fraction(self) -> float:
        return float(np.count_nonzero(self.dist == 0)) / self.dist.size


@dataclass(frozen=True)
class PdmSet:
    """One distance map per partition of a scheme, built in one pass."""

    grid: BlockGrid
    scheme: PartitionScheme
    pdms: tuple[DistanceMap, ...]
    occupancy_mode: str
    init_seconds: float

    @property
    def n(self) -> int:
        return len(self.pdms)

    def memory_bytes(self) -> int:
        # one uint8 per block per partition; equals n * volume_size / b^3
        # when the block edge divides every dimension
        return self.n * self.grid.num_blocks


def _require_mode(mode: str) -> None:
    if mode not in OCCUPANCY_MODES:
        raise OccupancyModeError(
            f"unknown occupancy mode {mode!r}; expected one of {OCCUPANCY_MODES}"
        )


def _check_pair(volume: Volume, grid: BlockGrid) -> None:
    if grid.dims != volume.dims:
        raise VolumeError(f"grid dims {grid.dims} do not match volume dims {volume.dims}")


def occupancy_for_partition(
    volume: Volume,
    grid: BlockGrid,
    partition: Partition,
    mode: str = "voxel",
    minmax: tuple[np.ndarray, np.ndarray] | None = None,
) -> OccupancyMap:
    """Mark blocks containing (voxel mode) or possibly reaching (range_apron
    mode) intensities inside the partition's range.

    range_apron tests the partition interval against the block's 1-voxel-apron
    [min, max]; it may overestimate but never misses a value an interpolated
    sample could take.
    """
    _require_mode(mode)
    _check_pair(volume, grid)
    bx, by, bz = grid.bdims
    if mode == "voxel":
        out = np.zeros(grid.bdims, dtype=np.bool_)
        _kernels.block_any_in_range(
            volume.voxels, grid.b, bx, by, bz,
            np.uint32(partition.rho_lo), np.uint32(partition.rho_hi), out,
        )
    else:
        mins, maxs = minmax if minmax is not None else block_min_max(volume, grid)
        out = (mins.astype(np.int64) <= partition.rho_hi) & (
            maxs.astype(np.int64) >= partition.rho_lo
        )
    return OccupancyMap(b=grid.b, bdims=grid.bdims, occupied=out)


def occupancy_for_tf(
    volume: Volume,
    grid: BlockGrid,
    tf: TransferFunction,
    mode: str = "voxel",
    minmax: tuple[np.ndarray, np.ndarray] | None = None,
) -> OccupancyMap:
    """Mark blocks that can contribute opacity under a transfer function.

    voxel mode scans each block with an early exit at the first nonzero-alpha
    voxel; range_apron counts nonzero-alpha intensities inside the block's
    apron [min, max] interval via a prefix sum over the alpha support.
    """
    _require_mode(mode)
    _check_pair(volume, grid)
    if tf.lut.shape[0] != (1 << volume.bits):
        raise VolumeError(
            f"tf covers {tf.lut.shape[0]} intensities, volume needs {1 << volume.bits}"
        )
    bx, by, bz = grid.bdims
    if mode == "voxel":
        nz_lut = (tf.lut[:, 3] > 0.0).astype(np.uint8)
        out = np.zeros(grid.bdims, dtype=np.bool_)
        _kernels.block_any_nonzero(volume.voxels, grid.b, bx, by, bz, nz_lut, out)
    else:
        mins, maxs = minmax if minmax is not None else block_min_max(volume, grid)
        nz = np.concatenate(([0], np.cumsum(tf.lut[:, 3] > 0.0)))
        counts = nz[maxs.astype(np.int64) + 1] - nz[mins.astype(np.int64)]
        out = counts > 0
    return OccupancyMap(b=grid.b, bdims=grid.bdims, occupied=out)


def distance_transform(occ: OccupancyMap) -> DistanceMap:
    """Chessboard distance in blocks to the nearest occupied block."""
    raw = _kernels.chamfer_chebyshev(occ.occupied)
    dist = np.minimum(raw, DIST_CLAMP).astype(np.uint8)
    return DistanceMap(b=occ.b, bdims=occ.bdims, dist=dist)


def standard_distance_map(
    volume: Volume,
    grid: BlockGrid,
    tf: TransferFunction,
    mode: str = "voxel",
    minmax: tuple[np.ndarray, np.ndarray] | None = None,
) -> DistanceMap:
    """Occupancy scan plus distance transform for one transfer function.

    This is the full recompute a transfer function edit costs without the
    per-partition set.
    """
    return distance_transform(occupancy_for_tf(volume, grid, tf, mode, minmax))


def build_pdm_set(
    volume: Volume,
    grid: BlockGrid,
    scheme: PartitionScheme,
    mode: str = "range_apron",
) -> PdmSet:
    """Build every partition's occupancy and distance map in one shot.

    The per-partition occupancy maps are transient; only the distance maps
    are kept. init_seconds records the one-time cost for benchmarking.
    """
    _require_mode(mode)
    _check_pair(volume, grid)
    if scheme.intensity_span != (1 << volume.bits):
        raise VolumeError(
            f"scheme spans {scheme.intensity_span} intensities, volume needs "
            f"{1 << volume.bits}"
        )
    start = time.perf_counter()
    bx, by, bz = grid.bdims
    if mode == "voxel":
        presence = np.zeros((scheme.n, bx, by, bz), dtype=np.bool_)
        _kernels.partition_presence(volume.voxels, grid.b, scheme.pid_lut(), presence)
        occs = list(presence)
    else:
        mins, maxs = block_min_max(volume, grid)
        lo = np.array([p.rho_lo for p in scheme.partitions], dtype=np.int64)
        hi = np.array([p.rho_hi for p in scheme.partitions], dtype=np.int64)
        m = mins.astype(np.int64)[None, ...]
        mx = maxs.astype(np.int64)[None, ...]
        occs = list((m <= hi[:, None, None, None]) & (mx >= lo[:, None, None, None]))
    pdms = tuple(
        distance_transform(OccupancyMap(b=grid.b, bdims=grid.bdims, occupied=o))
        for o in occs
    )
    elapsed = time.perf_counter() - start
    return PdmSet(
        grid=grid,
        scheme=scheme,
        pdms=pdms,
        occupancy_mode=mode,
        init_seconds=elapsed,
    )


def combine(
    pdm_set: PdmSet,
    selection: PartitionSelection,
    max_maps_per_pass: int | None = None,
) -> DistanceMap:
    """Element-wise minimum of the selected partitions' distance maps.

    An empty selection yields the all-255 map (nothing visible anywhere).
    max_maps_per_pass limits how many maps feed a single reduction, folding
    through an accumulator; the result is identical to the direct reduction.
    """
    if selection.n != pdm_set.n:
        raise SelectionError(
            f"selection is over {selection.n} partitions, set holds {pdm_set.n}"
        )
    grid = pdm_set.grid
    indices = selection.sorted
    if not indices:
        dist = np.full(grid.bdims, DIST_CLAMP, dtype=np.uint8)
        return DistanceMap(b=grid.b, bdims=grid.bdims, dist=dist)
    maps = [pdm_set.pdms[i - 1].dist for i in indices]
    if max_maps_per_pass is None:
        dist = maps[0].copy() if len(maps) == 1 else np.minimum.reduce(maps)
    else:
        if max_maps_per_pass < 1:
            raise ValueError(f"max_maps_per_pass must be >= 1, got {max_maps_per_pass}")
        acc: np.ndarray | None = None
        for i in range(0, len(maps), max_maps_per_pass):
            chunk = maps[i : i + max_maps_per_pass]
            part = chunk[0] if len(chunk) == 1 else np.minimum.reduce(chunk)
            acc = part.copy() if acc is None else np.minimum(acc, part)
        dist = acc
    return DistanceMap(b=grid.b, bdims=grid.bdims, dist=np.ascontiguousarray(dist))


def save_distance_map(dm: DistanceMap, path: str | Path) -> None:
    """Binary dump: magic, block edge, block dims, then raw uint8 payload."""
    header = _MAP_MAGIC + struct.pack("<4I", dm.b, *dm.bdims)
    Path(path).write_bytes(header + dm.dist.tobytes())


def load_distance_map(path: str | Path) -> DistanceMap:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAP_MAGIC:
        raise VolumeError(f"{path} is not a distance map dump")
    b, bx, by, bz = struct.unpack_from("<4I", raw, 4)
    payload = np.frombuffer(raw, dtype=np.uint8, offset=20)
    if payload.size != bx * by * bz:
        raise VolumeError(f"{path} payload size does not match header dims")
    dist = payload.reshape((bx, by, bz)).copy()
    return DistanceMap(b=b, bdims=(bx, by, bz), dist=dist)


def save_pdm_set(pdm_set: PdmSet, path: str | Path) -> None:
    """Binary dump of a partition set: geometry, scheme bounds, all maps."""
    grid = pdm_set.grid
    parts = [
        _SET_MAGIC,
        struct.pack(
            "<9I",
            grid.b,
            *grid.dims,
            *grid.bdims,
            pdm_set.n,
            0 if pdm_set.occupancy_mode == "voxel" else 1,
        ),
    ]
    for p in pdm_set.scheme.partitions:
        parts.append(struct.pack("<2I", p.rho_lo, p.rho_hi))
    for dm in pdm_set.pdms:
        parts.append(dm.dist.tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_pdm_set(path: str | Path) -> PdmSet:
    raw = Path(path).read_bytes()
    if raw[:4] != _SET_MAGIC:
        raise VolumeError(f"{path} is not a partition set dump")
    vals = struct.unpack_from("<9I", raw, 4)
    b = vals[0]
    dims = vals[1:4]
    bdims = vals[4:7]
    n = vals[7]
    mode = "voxel" if vals[8] == 0 else "range_apron"
    grid = BlockGrid.for_dims(dims, b)
    if grid.bdims != tuple(bdims):
        raise VolumeError(f"{path} header block dims are inconsistent")
    off = 4 + 9 * 4
    bounds = []
    for _ in range(n):
        lo, hi = struct.unpack_from("<2I", raw, off)
        bounds.append(Partition(lo, hi))
        off += 8
    scheme = PartitionScheme(tuple(bounds))
    per_map = bdims[0] * bdims[1] * bdims[2]
    if len(raw) - off != n * per_map:
        raise VolumeError(f"{path} payload size does not match header")
    pdms = []
    for _ in range(n):
        payload = np.frombuffer(raw, dtype=np.uint8, count=per_map, offset=off)
        pdms.append(
            DistanceMap(b=b, bdims=grid.bdims, dist=payload.reshape(grid.bdims).copy())
        )
        off += per_map
    return PdmSet(
        grid=grid,
        scheme=scheme,
        pdms=tuple(pdms),
        occupancy_mode=mode,
        init_seconds=0.0,
    )
