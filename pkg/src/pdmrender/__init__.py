"""Volume ray casting with partitioned-distance-map empty-space skipping.

The renderer marches rays over a fixed sample grid; per-block chessboard
distance maps let it leap empty regions without changing which samples
contribute, so every skip mode composites identical images. One distance
map per intensity partition is built once per volume; after that any
transfer-function edit refreshes the skip structure with an element-wise
minimum over the selected partitions' maps.
"""

from .acceleration import (
    DistanceMap,
    OccupancyMap,
    OccupancyModeError,
    PdmSet,
    build_pdm_set,
    combine,
    distance_transform,
    load_distance_map,
    load_pdm_set,
    occupancy_for_partition,
    occupancy_for_tf,
    save_distance_map,
    save_pdm_set,
    standard_distance_map,
)
from .bench import BenchReport, BenchScenario, run_bench, run_rotation_bench, run_update_bench
from .raycast import (
    Camera,
    CameraError,
    EssModeError,
    Framebuffer,
    RenderSettings,
    RenderStats,
    camera_rays,
    encode_png,
    ess_advance,
    orbit_camera,
    render,
    save_image,
)
from .transfer import (
    Partition,
    PartitionScheme,
    PartitionSelection,
    SchemeError,
    SelectionError,
    TransferFunction,
    TransferFunctionError,
    bake_lut,
    fixture_tf,
    load_tf_file,
    scheme_uniform,
    scheme_with_min_special,
    select_partitions,
    tf_archetype,
    tf_from_json,
    tf_to_json,
)
from .volume import (
    BitDepthError,
    BlockGrid,
    SizeMismatchError,
    Volume,
    VolumeError,
    block_min_max,
    load_raw,
    save_raw,
    synth_volume,
)

__version__ = "0.1.0"

__all__ = [
    "BenchReport",
    "BenchScenario",
    "BitDepthError",
    "BlockGrid",
    "Camera",
    "CameraError",
    "DistanceMap",
    "EssModeError",
    "Framebuffer",
    "OccupancyMap",
    "OccupancyModeError",
    "Partition",
    "PartitionScheme",
    "PartitionSelection",
    "PdmSet",
    "RenderSettings",
    "RenderStats",
    "SchemeError",
    "SelectionError",
    "SizeMismatchError",
    "TransferFunction",
    "TransferFunctionError",
    "Volume",
    "VolumeError",
    "bake_lut",
    "block_min_max",
    "build_pdm_set",
    "camera_rays",
    "combine",
    "distance_transform",
    "encode_png",
    "ess_advance",
    "fixture_tf",
    "load_distance_map",
    "load_pdm_set",
    "load_raw",
    "load_tf_file",
    "occupancy_for_partition",
    "occupancy_for_tf",
    "orbit_camera",
    "render",
    "run_bench",
    "run_rotation_bench",
    "run_update_bench",
    "save_distance_map",
    "save_image",
    "save_pdm_set",
    "save_raw",
    "scheme_uniform",
    "scheme_with_min_special",
    "select_partitions",
    "standard_distance_map",
    "synth_volume",
    "tf_archetype",
    "tf_from_json",
    "tf_to_json",
]
