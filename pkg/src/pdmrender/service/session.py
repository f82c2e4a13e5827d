"""Session state for the render service.

One live session at a time: volume, block grid, partition scheme, and the
per-partition distance maps are immutable after load; the transfer function,
its selection, and the combined map swap together under a lock so a frame
render observes either the old or the new pair, never a mixture.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import numpy as np

from ..acceleration import (
    DistanceMap,
    OccupancyMap,
    PdmSet,
    build_pdm_set,
    combine,
    standard_distance_map,
)
from ..raycast import RenderSettings, orbit_camera, render
from ..transfer import PartitionScheme, PartitionSelection, TransferFunction, select_partitions
from ..volume import BlockGrid, Volume


class NoSessionError(RuntimeError):
    """An endpoint needing a loaded session was called before load."""


@dataclass(frozen=True)
class Session:
    volume: Volume
    grid: BlockGrid
    scheme: PartitionScheme
    pdm_set: PdmSet
    occupancy_mode: str
    tf: TransferFunction
    selection: PartitionSelection
    dprime: DistanceMap
    select_ms: float
    combine_ms: float


def _empty_tf(bits: int) -> TransferFunction:
    return TransferFunction(lut=np.zeros((1 << bits, 4), dtype=np.float64))


class SessionStore:
    """Holds the single live session; swaps are atomic, reads are snapshots."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._session: Session | None = None
        self._frame_counter = 0

    def load(
        self,
        volume: Volume,
        grid: BlockGrid,
        scheme: PartitionScheme,
        occupancy_mode: str = "range_apron",
    ) -> Session:
        pdm_set = build_pdm_set(volume, grid, scheme, occupancy_mode)
        tf = _empty_tf(volume.bits)
        selection = select_partitions(tf, scheme)
        dprime = combine(pdm_set, selection)
        session = Session(
            volume=volume,
            grid=grid,
            scheme=scheme,
            pdm_set=pdm_set,
            occupancy_mode=occupancy_mode,
            tf=tf,
            selection=selection,
            dprime=dprime,
            select_ms=0.0,
            combine_ms=0.0,
        )
        with self._lock:
            self._session = session
        return session

    def snapshot(self) -> Session:
        with self._lock:
            if self._session is None:
                raise NoSessionError("no volume loaded")
            return self._session

    def set_tf(self, tf: TransferFunction) -> Session:
        """Replace the transfer function and recompute selection + combined map.

        Everything is computed against the immutable structures, then the
        (tf, selection, dprime) triple swaps in one assignment.
        """
        with self._lock:
            if self._session is None:
                raise NoSessionError("no volume loaded")
            base = self._session
        if tf.bits != base.volume.bits:
            raise ValueError(
                f"transfer function is {tf.bits}-bit, session volume needs "
                f"{base.volume.bits}-bit"
            )
        t0 = time.perf_counter()
        selection = select_partitions(tf, base.scheme)
        t1 = time.perf_counter()
        dprime = combine(base.pdm_set, selection)
        t2 = time.perf_counter()
        session = Session(
            volume=base.volume,
            grid=base.grid,
            scheme=base.scheme,
            pdm_set=base.pdm_set,
            occupancy_mode=base.occupancy_mode,
            tf=tf,
            selection=selection,
            dprime=dprime,
            select_ms=(t1 - t0) * 1000.0,
            combine_ms=(t2 - t1) * 1000.0,
        )
        with self._lock:
            self._session = session
        return session

    def next_frame_id(self) -> int:
        with self._lock:
            self._frame_counter += 1
            return self._frame_counter

    def render_frame(
        self,
        angle: float,
        width: int,
        height: int,
        ess: str,
        step: float = 0.5,
    ):
        """Render one orbit frame against the current session snapshot."""
        session = self.snapshot()
        camera = orbit_camera(session.volume, angle)
        settings = RenderSettings(width=width, height=height, step=step, ess_mode=ess)
        accel = None
        if ess == "pdm":
            accel = session.dprime
        elif ess == "block":
            accel = OccupancyMap(
                b=session.grid.b,
                bdims=session.grid.bdims,
                occupied=session.dprime.dist == 0,
            )
        elif ess == "distance":
            accel = standard_distance_map(
                session.volume, session.grid, session.tf, session.occupancy_mode
            )
        fb, stats = render(session.volume, session.tf, camera, settings, accel)
        return fb, stats, session
