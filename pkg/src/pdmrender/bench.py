"""Benchmark harness: transfer-function update timings and orbit rendering
sweeps, reported as JSON or CSV.

Update benches time a full occupancy+distance-transform recompute against
select+combine over a prebuilt partition set. Rotation benches render
evenly spaced orbit frames per skip mode and record the work counters,
which are bit-reproducible for a fixed scenario; wall times are not.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import statistics
import time
from dataclasses import dataclass, field
from typing import Callable

import numba
import numpy as np

from .acceleration import (
    OccupancyMap,
    build_pdm_set,
    combine,
    standard_distance_map,
)
from .raycast import RenderSettings, orbit_camera, render
from .transfer import (
    TF_ARCHETYPES,
    TF_FIXTURES,
    TransferFunction,
    TransferFunctionError,
    scheme_uniform,
    scheme_with_min_special,
    select_partitions,
    fixture_tf,
    tf_archetype,
)
from .volume import BlockGrid, Volume, load_raw, synth_volume

DEFAULT_PARTITION_COUNTS = (16, 32, 64, 128, 256)

CSV_HEADER_PREFIX = ("dataset", "scheme", "computation", "tf")


class ScenarioError(ValueError):
    """Invalid benchmark scenario."""


@dataclass(frozen=True)
class BenchScenario:
    """One benchmark configuration.

    volume_spec is either {"synth": {"kind", "dims", "seed"}} or
    {"raw": {"data", "meta"}}. tf_names accepts the archetypes tf1-tf4,
    the packaged fixtures tf5/tf6, and "empty" (all-zero opacity).
    """

    name: str
    volume_spec: dict
    tf_names: tuple[str, ...] = ("tf1", "tf2", "tf3", "tf4")
    partition_counts: tuple[int, ...] = DEFAULT_PARTITION_COUNTS
    scheme_kind: str = "uniform"
    occupancy_mode: str = "voxel"
    block_edge: int = 4
    render: RenderSettings = field(
        default_factory=lambda: RenderSettings(width=256, height=256, step=1.0)
    )
    revolutions: float = 2.0
    frames: int = 8
    duration_model_s: float = 10.0
    repeats: int = 5

    def __post_init__(self) -> None:
        if not self.partition_counts:
            raise ScenarioError("partition_counts must be non-empty")
        if self.frames < 1:
            raise ScenarioError(f"frames must be >= 1, got {self.frames}")
        if self.repeats < 1:
            raise ScenarioError(f"repeats must be >= 1, got {self.repeats}")
        if self.scheme_kind not in ("uniform", "min_special"):
            raise ScenarioError(f"unknown scheme kind {self.scheme_kind!r}")


@dataclass
class BenchReport:
    """Environment record plus a list of bench sections (dict rows)."""

    environment: dict
    sections: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"environment": self.environment, "sections": self.sections}, indent=2
        )

    def to_csv(self) -> str:
        """Flat update-timing table: one row per (dataset, scheme,
        computation, tf), one millisecond column per partition count.

        Header: dataset,scheme,computation,tf,n=<k>... where computation is
        one_time_init_ms, update_ms_baseline, or update_ms_pdm.
        """
        counts: list[int] = []
        for sec in self.sections:
            if sec["kind"] == "update":
                for row in sec["rows"]:
                    if row["n"] not in counts:
                        counts.append(row["n"])
        counts.sort()
        out = io.StringIO()
        writer = csv.writer(out)
        writer.writerow(list(CSV_HEADER_PREFIX) + [f"n={c}" for c in counts])
        for sec in self.sections:
            if sec["kind"] != "update":
                continue
            dataset = sec["dataset"]
            scheme = sec["scheme"]
            init_by_n = {row["n"]: row["one_time_init_ms"] for row in sec["rows"]}
            seen_tfs: list[str] = []
            for row in sec["rows"]:
                if row["tf"] not in seen_tfs:
                    seen_tfs.append(row["tf"])
            writer.writerow(
                [dataset, scheme, "one_time_init_ms", "-"]
                + [_fmt_ms(init_by_n.get(c)) for c in counts]
            )
            for tf_name in seen_tfs:
                by_n = {r["n"]: r for r in sec["rows"] if r["tf"] == tf_name}
                for comp in ("update_ms_baseline", "update_ms_pdm"):
                    writer.writerow(
                        [dataset, scheme, comp, tf_name]
                        + [
                            _fmt_ms(by_n[c][comp]) if c in by_n else ""
                            for c in counts
                        ]
                    )
        return out.getvalue()


def _fmt_ms(value: float | None) -> str:
    return "" if value is None else f"{value:.4f}"


def environment_record() -> dict:
    return {
        "platform": platform.platform(),
        "machine": platform.machine(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "numba": numba.__version__,
        "threads": numba.get_num_threads(),
    }


def resolve_volume(spec: dict) -> Volume:
    if "synth" in spec:
        s = spec["synth"]
        return synth_volume(s["kind"], s.get("dims", 128), int(s.get("seed", 0)))
    if "raw" in spec:
        r = spec["raw"]
        return load_raw(r["data"], r["meta"])
    raise ScenarioError(f"volume spec needs 'synth' or 'raw', got {sorted(spec)}")


def resolve_tf(name: str, bits: int) -> TransferFunction:
    name = name.lower()
    if name in TF_ARCHETYPES:
        return tf_archetype(name, bits)
    if name in TF_FIXTURES:
        tf = fixture_tf(name)
        if tf.bits != bits:
            raise TransferFunctionError(
                f"fixture {name} is {tf.bits}-bit, volume needs {bits}-bit"
            )
        return tf
    if name == "empty":
        return TransferFunction(lut=np.zeros((1 << bits, 4), dtype=np.float64))
    raise TransferFunctionError(f"unknown transfer function name {name!r}")


def _scheme_for(kind: str, n: int, volume: Volume):
    if kind == "uniform":
        return scheme_uniform(n, volume.bits)
    rho_min = int(np.bincount(volume.voxels.ravel().astype(np.int64)).argmax())
    return scheme_with_min_special(n, volume.bits, rho_min)


def measure_ms(fn: Callable[[], object], repeats: int) -> tuple[float, list[float]]:
    """Median wall milliseconds over `repeats` runs after one discarded warmup."""
    fn()
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t0) * 1000.0)
    return statistics.median(times), times


def run_update_bench(scenario: BenchScenario) -> dict:
    """Time TF-change updates: full recompute vs select+combine, per n."""
    volume = resolve_volume(scenario.volume_spec)
    grid = BlockGrid.for_dims(volume.dims, scenario.block_edge)
    rows = []
    for n in scenario.partition_counts:
        scheme = _scheme_for(scenario.scheme_kind, n, volume)
        t0 = time.perf_counter()
        pdm_set = build_pdm_set(volume, grid, scheme, scenario.occupancy_mode)
        init_ms = (time.perf_counter() - t0) * 1000.0
        for tf_name in scenario.tf_names:
            tf = resolve_tf(tf_name, volume.bits)
            baseline_ms, _ = measure_ms(
                lambda: standard_distance_map(volume, grid, tf, scenario.occupancy_mode),
                scenario.repeats,
            )
            select_ms, _ = measure_ms(
                lambda: select_partitions(tf, scheme), scenario.repeats
            )
            selection = select_partitions(tf, scheme)
            combine_ms, _ = measure_ms(
                lambda: combine(pdm_set, selection), scenario.repeats
            )
            pdm_ms = select_ms + combine_ms
            speedup = baseline_ms / pdm_ms if pdm_ms > 0 else float("inf")
            rows.append(
                {
                    "n": n,
                    "tf": tf_name,
                    "one_time_init_ms": init_ms,
                    "update_ms_baseline": baseline_ms,
                    "update_ms_pdm": pdm_ms,
                    "select_ms": select_ms,
                    "combine_ms": combine_ms,
                    "speedup_ratio": speedup,
                    "slower_than_baseline": speedup < 1.0,
                    "selection_size": len(selection),
                }
            )
    return {
        "kind": "update",
        "dataset": scenario.name,
        "scheme": scenario.scheme_kind,
        "occupancy_mode": scenario.occupancy_mode,
        "repeats": scenario.repeats,
        "rows": rows,
    }


def _rotation_modes(volume, grid, scheme, pdm_set, tf, mode):
    """Accelerators per skip mode, derived from one structure family.

    The block row uses the union occupancy (combined map == 0) so that the
    per-row ordering distance <= pdm <= block holds unconditionally.
    """
    selection = select_partitions(tf, scheme)
    dprime = combine(pdm_set, selection)
    dmap = standard_distance_map(volume, grid, tf, mode)
    block = OccupancyMap(b=grid.b, bdims=grid.bdims, occupied=dprime.dist == 0)
    return {"none": None, "block": block, "distance": dmap, "pdm": dprime}


def run_rotation_bench(scenario: BenchScenario) -> dict:
    """Render orbit frames per (n, scheme, tf, ess mode), recording counters.

    At n=32 both uniform and min_special schemes are measured regardless of
    the scenario's scheme kind, exposing where coarse uniform partitioning
    breaks down on background-dominated data.
    """
    volume = resolve_volume(scenario.volume_spec)
    grid = BlockGrid.for_dims(volume.dims, scenario.block_edge)
    base = scenario.render
    angles = [
        scenario.revolutions * 2.0 * np.pi * f / scenario.frames
        for f in range(scenario.frames)
    ]
    rows = []
    for n in scenario.partition_counts:
        kinds = [scenario.scheme_kind]
        if n == 32:
            kinds = ["uniform", "min_special"]
            if scenario.scheme_kind not in kinds:
                kinds.append(scenario.scheme_kind)
        for kind in kinds:
            scheme = _scheme_for(kind, n, volume)
            pdm_set = build_pdm_set(volume, grid, scheme, scenario.occupancy_mode)
            for tf_name in scenario.tf_names:
                tf = resolve_tf(tf_name, volume.bits)
                accels = _rotation_modes(
                    volume, grid, scheme, pdm_set, tf, scenario.occupancy_mode
                )
                for mode, accel in accels.items():
                    settings = RenderSettings(
                        width=base.width,
                        height=base.height,
                        step=base.step,
                        ess_mode=mode,
                        ert_enabled=base.ert_enabled,
                        ert_threshold=base.ert_threshold,
                    )
                    for f, angle in enumerate(angles):
                        cam = orbit_camera(volume, angle)
                        _, stats = render(volume, tf, cam, settings, accel)
                        rows.append(
                            {
                                "n": n,
                                "scheme": kind,
                                "tf": tf_name,
                                "ess_mode": mode,
                                "frame": f,
                                "angle": angle,
                                "model_time_s": scenario.duration_model_s
                                * f
                                / scenario.frames,
                                "wall_ms": stats.wall_time * 1000.0,
                                "stats": stats.as_dict(),
                            }
                        )
    return {
        "kind": "rotation",
        "dataset": scenario.name,
        "occupancy_mode": scenario.occupancy_mode,
        "revolutions": scenario.revolutions,
        "frames": scenario.frames,
        "duration_model_s": scenario.duration_model_s,
        "rows": rows,
    }


def run_bench(scenario: BenchScenario, kinds: tuple[str, ...] = ("update", "rotation")) -> BenchReport:
    report = BenchReport(environment=environment_record())
    if "update" in kinds:
        report.sections.append(run_update_bench(scenario))
    if "rotation" in kinds:
        report.sections.append(run_rotation_bench(scenario))
    return report
