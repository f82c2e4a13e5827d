"""Command-line entry point: precompute, render, bench, serve.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 internal error.
Env overrides PDM_THREADS and PDM_PORT mirror --threads/--port; flags win.
"""

from __future__ import annotations

import argparse
import json
import os
import socket
import sys
from pathlib import Path

import numba
import numpy as np

from .acceleration import (
    build_pdm_set,
    combine,
    load_pdm_set,
    occupancy_for_tf,
    save_pdm_set,
    standard_distance_map,
)
from .bench import BenchScenario, run_bench
from .raycast import RenderSettings, orbit_camera, render, save_image
from .transfer import (
    TF_ARCHETYPES,
    TF_FIXTURES,
    SchemeError,
    SelectionError,
    TransferFunction,
    TransferFunctionError,
    load_tf_file,
    fixture_tf,
    scheme_uniform,
    scheme_with_min_special,
    select_partitions,
    tf_archetype,
)
from .volume import SYNTH_KINDS, BlockGrid, Volume, VolumeError, load_raw, synth_volume

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    """Bad flags or flag combinations; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # keep usage failures inside our exit-code scheme
        raise UsageError(message)


def _parse_dims(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    try:
        if len(parts) == 1:
            d = int(parts[0])
            dims = (d, d, d)
        elif len(parts) == 3:
            dims = tuple(int(p) for p in parts)
        else:
            raise ValueError
    except ValueError:
        raise UsageError(f"--dims expects N or NXxNYxNZ, got {text!r}") from None
    return dims


def _parse_size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        if len(parts) != 2:
            raise ValueError
        w, h = int(parts[0]), int(parts[1])
    except ValueError:
        raise UsageError(f"--size expects WxH, got {text!r}") from None
    if w < 1 or h < 1:
        raise UsageError(f"--size must be at least 1x1, got {text!r}")
    return w, h


def _add_volume_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--volume", help="RAW volume file")
    p.add_argument("--meta", help="JSON metadata for --volume (default: <volume>.json)")
    p.add_argument("--synth", choices=SYNTH_KINDS, help="synthetic volume kind")
    p.add_argument("--dims", default="128", help="synthetic dims: N or NXxNYxNZ")
    p.add_argument("--seed", type=int, default=0, help="synthetic volume seed")


def _add_accel_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--partitions", type=int, default=64, help="partition count n")
    p.add_argument("--scheme", choices=("uniform", "min-special"), default="uniform")
    p.add_argument("--occupancy", choices=("voxel", "range-apron"), default="range-apron")
    p.add_argument("--block-edge", type=int, default=4, help="block edge length b")
    p.add_argument(
        "--rho-min",
        type=int,
        default=None,
        help="background intensity for min-special (default: histogram peak)",
    )


def _add_render_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tf", default="tf3", help="TF name (tf1..tf6, empty) or JSON file")
    p.add_argument("--ess", choices=("none", "block", "distance", "pdm"), default="pdm")
    p.add_argument("--size", default="256x256", help="viewport WxH")
    p.add_argument("--step", type=float, default=0.5, help="sample step in voxels")
    p.add_argument("--ert", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--angle", type=float, default=0.7, help="orbit angle in radians")


def build_parser() -> _Parser:
    parser = _Parser(prog="pdmrender", description=__doc__)
    parser.add_argument("--threads", type=int, default=None, help="worker thread cap")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_pre = sub.add_parser("precompute", help="build the per-partition distance maps")
    _add_volume_flags(p_pre)
    _add_accel_flags(p_pre)
    p_pre.add_argument("--out", help="write the JSON report here instead of stdout")
    p_pre.add_argument("--dump", help="write the binary map set here")

    p_ren = sub.add_parser("render", help="render one frame")
    _add_volume_flags(p_ren)
    _add_accel_flags(p_ren)
    _add_render_flags(p_ren)
    p_ren.add_argument("--out", default="out.png", help="image path (.png or .ppm)")
    p_ren.add_argument("--pdms", help="reuse a binary map set from precompute --dump")

    p_ben = sub.add_parser("bench", help="run update/rotation benchmarks")
    _add_volume_flags(p_ben)
    p_ben.add_argument("--tfs", default="tf1,tf2,tf3,tf4", help="comma list of TF names")
    p_ben.add_argument(
        "--counts", default="16,32,64,128,256", help="comma list of partition counts"
    )
    p_ben.add_argument("--scheme", choices=("uniform", "min-special"), default="uniform")
    p_ben.add_argument("--occupancy", choices=("voxel", "range-apron"), default="voxel")
    p_ben.add_argument("--block-edge", type=int, default=4)
    p_ben.add_argument("--kind", choices=("update", "rotation", "both"), default="update")
    p_ben.add_argument("--frames", type=int, default=4)
    p_ben.add_argument("--repeats", type=int, default=5)
    p_ben.add_argument("--size", default="128x128")
    p_ben.add_argument("--step", type=float, default=1.0)
    p_ben.add_argument("--report", choices=("json", "csv"), default="json")
    p_ben.add_argument("--out", help="write the report here instead of stdout")

    p_srv = sub.add_parser("serve", help="run the render service")
    _add_volume_flags(p_srv)
    _add_accel_flags(p_srv)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=None, help="default: $PDM_PORT or 8765")
    p_srv.add_argument("--static", help="static frontend directory to mount at /")
    return parser


def _apply_threads(args) -> None:
    n = args.threads
    if n is None:
        env = os.environ.get("PDM_THREADS")
        n = int(env) if env else None
    if n is not None:
        if n < 1:
            raise UsageError(f"--threads must be >= 1, got {n}")
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _load_volume(args) -> Volume:
    if (args.volume is None) == (args.synth is None):
        raise UsageError("exactly one of --volume or --synth is required")
    if args.synth:
        return synth_volume(args.synth, _parse_dims(args.dims), args.seed)
    meta = args.meta or str(Path(args.volume).with_suffix(".json"))
    return load_raw(args.volume, meta)


def _resolve_tf(name_or_path: str, bits: int) -> TransferFunction:
    name = name_or_path.lower()
    if name in TF_ARCHETYPES:
        return tf_archetype(name, bits)
    if name in TF_FIXTURES:
        tf = fixture_tf(name)
    elif name == "empty":
        return TransferFunction(lut=np.zeros((1 << bits, 4), dtype=np.float64))
    else:
        tf = load_tf_file(name_or_path)
    if tf.bits != bits:
        raise TransferFunctionError(
            f"transfer function is {tf.bits}-bit, volume needs {bits}-bit"
        )
    return tf


def _validate_accel_flags(args) -> None:
    if args.partitions < 1:
        raise UsageError(f"--partitions must be >= 1, got {args.partitions}")
    if args.block_edge < 1:
        raise UsageError(f"--block-edge must be >= 1, got {args.block_edge}")


def _scheme_from_args(args, volume: Volume):
    if args.scheme == "uniform":
        return scheme_uniform(args.partitions, volume.bits)
    rho_min = args.rho_min
    if rho_min is None:
        rho_min = int(np.bincount(volume.voxels.ravel().astype(np.int64)).argmax())
    return scheme_with_min_special(args.partitions, volume.bits, rho_min)


def cmd_precompute(args) -> int:
    _validate_accel_flags(args)
    volume = _load_volume(args)
    scheme = _scheme_from_args(args, volume)
    grid = BlockGrid.for_dims(volume.dims, args.block_edge)
    mode = args.occupancy.replace("-", "_")
    pdm_set = build_pdm_set(volume, grid, scheme, mode)
    report = {
        "dims": list(volume.dims),
        "bits": volume.bits,
        "block_edge": grid.b,
        "bdims": list(grid.bdims),
        "n": scheme.n,
        "scheme": scheme.bounds(),
        "occupancy_mode": mode,
        "one_time_init_ms": pdm_set.init_seconds * 1000.0,
        "extra_memory_bytes": pdm_set.memory_bytes(),
        "per_partition_occupied_fraction": [dm.occupied_fraction for dm in pdm_set.pdms],
    }
    if args.dump:
        save_pdm_set(pdm_set, args.dump)
        report["dump"] = args.dump
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_render(args) -> int:
    _validate_accel_flags(args)
    volume = _load_volume(args)
    tf = _resolve_tf(args.tf, volume.bits)
    grid = BlockGrid.for_dims(volume.dims, args.block_edge)
    mode = args.occupancy.replace("-", "_")
    width, height = _parse_size(args.size)
    if args.step <= 0:
        raise UsageError(f"--step must be positive, got {args.step}")
    settings = RenderSettings(
        width=width, height=height, step=args.step, ess_mode=args.ess, ert_enabled=args.ert
    )

    accel = None
    if args.ess == "block":
        accel = occupancy_for_tf(volume, grid, tf, mode)
    elif args.ess == "distance":
        accel = standard_distance_map(volume, grid, tf, mode)
    elif args.ess == "pdm":
        scheme = _scheme_from_args(args, volume)
        if args.pdms:
            pdm_set = load_pdm_set(args.pdms)
            if pdm_set.grid.dims != volume.dims:
                raise VolumeError(
                    f"map set in {args.pdms} was built for dims {pdm_set.grid.dims}, "
                    f"volume has {volume.dims}"
                )
            scheme = pdm_set.scheme
        else:
            pdm_set = build_pdm_set(volume, grid, scheme, mode)
        accel = combine(pdm_set, select_partitions(tf, scheme))

    camera = orbit_camera(volume, args.angle)
    fb, stats = render(volume, tf, camera, settings, accel)
    save_image(fb, args.out)
    print(json.dumps({"out": str(args.out), "stats": stats.as_dict()}, indent=2))
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.volume is None and args.synth is None:
        raise UsageError("exactly one of --volume or --synth is required")
    if args.volume is not None and args.synth is not None:
        raise UsageError("exactly one of --volume or --synth is required")
    if args.synth:
        volume_spec = {
            "synth": {"kind": args.synth, "dims": _parse_dims(args.dims), "seed": args.seed}
        }
        name = f"{args.synth}-{args.dims}-seed{args.seed}"
    else:
        meta = args.meta or str(Path(args.volume).with_suffix(".json"))
        volume_spec = {"raw": {"data": args.volume, "meta": meta}}
        name = Path(args.volume).stem
    try:
        counts = tuple(int(c) for c in args.counts.split(",") if c)
    except ValueError:
        raise UsageError(f"--counts expects comma-separated integers, got {args.counts!r}")
    width, height = _parse_size(args.size)
    scenario = BenchScenario(
        name=name,
        volume_spec=volume_spec,
        tf_names=tuple(t.strip() for t in args.tfs.split(",") if t.strip()),
        partition_counts=counts,
        scheme_kind=args.scheme.replace("-", "_"),
        occupancy_mode=args.occupancy.replace("-", "_"),
        block_edge=args.block_edge,
        render=RenderSettings(width=width, height=height, step=args.step),
        frames=args.frames,
        repeats=args.repeats,
    )
    kinds = ("update", "rotation") if args.kind == "both" else (args.kind,)
    report = run_bench(scenario, kinds)
    text = report.to_csv() if args.report == "csv" else report.to_json()
    if args.out:
        Path(args.out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    port = args.port
    if port is None:
        port = int(os.environ.get("PDM_PORT", "8765"))
    # fail fast with a clean message instead of uvicorn's logged shutdown
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((args.host, port))
    except OSError as exc:
        raise OSError(f"cannot bind {args.host}:{port}: {exc}") from exc
    finally:
        probe.close()

    app = create_app(static_dir=args.static)
    if args.volume or args.synth:
        _validate_accel_flags(args)
        volume = _load_volume(args)
        scheme = _scheme_from_args(args, volume)
        grid = BlockGrid.for_dims(volume.dims, args.block_edge)
        app.state.store.load(
            volume, grid, scheme, args.occupancy.replace("-", "_")
        )
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _apply_threads(args)
        handler = {
            "precompute": cmd_precompute,
            "render": cmd_render,
            "bench": cmd_bench,
            "serve": cmd_serve,
        }[args.subcommand]
        return handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SchemeError, SelectionError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, VolumeError, TransferFunctionError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KeyboardInterrupt:
        return EXIT_OK
    except Exception as exc:  # internal invariant violations
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
