"""Volume I/O, block geometry, synthetic volumes, and apron min/max."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from pdmrender import (
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


def _write_raw(tmp_path, name, payload: bytes, meta: dict):
    data = tmp_path / f"{name}.raw"
    metaf = tmp_path / f"{name}.json"
    data.write_bytes(payload)
    metaf.write_text(json.dumps(meta))
    return data, metaf


def _apron_minmax_oracle(vox: np.ndarray, b: int):
    nx, ny, nz = vox.shape
    bd = [-(-n // b) for n in (nx, ny, nz)]
    mins = np.empty(bd, dtype=vox.dtype)
    maxs = np.empty(bd, dtype=vox.dtype)
    for i in range(bd[0]):
        for j in range(bd[1]):
            for k in range(bd[2]):
                sub = vox[
                    max(i * b - 1, 0) : min((i + 1) * b + 1, nx),
                    max(j * b - 1, 0) : min((j + 1) * b + 1, ny),
                    max(k * b - 1, 0) : min((k + 1) * b + 1, nz),
                ]
                mins[i, j, k] = sub.min()
                maxs[i, j, k] = sub.max()
    return mins, maxs


class TestLoadRaw:
    def test_intensity_range_from_values(self, tmp_path):
        data, meta = _write_raw(
            tmp_path, "v", bytes([0, 0, 0, 7]), {"dims": [2, 2, 1], "bits": 8}
        )
        vol = load_raw(data, meta)
        assert vol.intensity_range == (0, 7)
        assert vol.dims == (2, 2, 1)

    def test_size_mismatch(self, tmp_path):
        data, meta = _write_raw(
            tmp_path, "v", bytes(10), {"dims": [2, 2, 2], "bits": 8}
        )
        with pytest.raises(SizeMismatchError):
            load_raw(data, meta)

    def test_constant_volume(self, tmp_path):
        data, meta = _write_raw(
            tmp_path, "v", bytes([5] * 64), {"dims": [4, 4, 4], "bits": 8}
        )
        vol = load_raw(data, meta)
        assert vol.intensity_range == (5, 5)

    def test_unsupported_bit_depth(self, tmp_path):
        data, meta = _write_raw(
            tmp_path, "v", bytes(8), {"dims": [2, 2, 2], "bits": 12}
        )
        with pytest.raises(BitDepthError):
            load_raw(data, meta)

    def test_sixteen_bit_endianness(self, tmp_path):
        values = np.array([300, 7, 0, 65535], dtype=np.uint16)
        data, meta = _write_raw(
            tmp_path,
            "be",
            values.astype(">u2").tobytes(),
            {"dims": [4, 1, 1], "bits": 16, "endianness": "be"},
        )
        vol = load_raw(data, meta)
        assert vol.voxels[:, 0, 0].tolist() == values.tolist()
        assert vol.bits == 16

    def test_x_fastest_layout(self, tmp_path):
        # value at flat index x + nx*(y + ny*z)
        payload = bytes(range(8))
        data, meta = _write_raw(tmp_path, "v", payload, {"dims": [2, 2, 2], "bits": 8})
        vol = load_raw(data, meta)
        assert vol.voxels[1, 0, 0] == 1
        assert vol.voxels[0, 1, 0] == 2
        assert vol.voxels[0, 0, 1] == 4

    def test_missing_meta_key(self, tmp_path):
        data, meta = _write_raw(tmp_path, "v", bytes(8), {"dims": [2, 2, 2]})
        with pytest.raises(VolumeError):
            load_raw(data, meta)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(11)
        for bits, dtype in ((8, np.uint8), (16, np.uint16)):
            vox = rng.integers(0, 1 << bits, size=(5, 6, 7)).astype(dtype)
            vol = Volume.from_array(vox, spacing=(1.0, 2.0, 0.5))
            data = tmp_path / f"rt{bits}.raw"
            meta = tmp_path / f"rt{bits}.json"
            save_raw(vol, data, meta)
            back = load_raw(data, meta)
            assert np.array_equal(back.voxels, vol.voxels)
            assert back.spacing == vol.spacing


class TestBlockGrid:
    def test_ceil_division(self):
        grid = BlockGrid.for_dims((10, 8, 5), 4)
        assert grid.bdims == (3, 2, 2)
        assert grid.num_blocks == 12

    @pytest.mark.parametrize("dims", [(8, 8, 8), (9, 13, 4), (1, 1, 1), (17, 3, 100)])
    @pytest.mark.parametrize("b", [1, 2, 4, 7])
    def test_bounds_invariants(self, dims, b):
        grid = BlockGrid.for_dims(dims, b)
        for d, bd in zip(dims, grid.bdims):
            assert bd * b >= d
            assert (bd - 1) * b < d

    def test_bad_edge(self):
        with pytest.raises(ValueError):
            BlockGrid.for_dims((8, 8, 8), 0)


class TestSynthVolume:
    def test_deterministic(self):
        a = synth_volume("sphere_shell", 64, seed=1)
        b = synth_volume("sphere_shell", 64, seed=1)
        assert np.array_equal(a.voxels, b.voxels)

    def test_background_dominant_fraction(self):
        vol = synth_volume("background_dominant", 64, seed=1)
        rho_min = vol.intensity_range[0]
        frac = np.count_nonzero(vol.voxels == rho_min) / vol.num_voxels
        assert frac >= 0.6

    @pytest.mark.parametrize("kind", ["sphere_shell", "two_spheres", "noise", "background_dominant"])
    def test_bounds_attained(self, kind):
        vol = synth_volume(kind, 32, seed=2)
        lo, hi = vol.intensity_range
        assert vol.voxels.min() == lo
        assert vol.voxels.max() == hi

    def test_dims_too_small(self):
        with pytest.raises(VolumeError):
            synth_volume("noise", (8, 8, 4), seed=0)

    def test_unknown_kind(self):
        with pytest.raises(VolumeError):
            synth_volume("torus", 16, seed=0)

    def test_seed_changes_content(self):
        a = synth_volume("noise", 16, seed=1)
        b = synth_volume("noise", 16, seed=2)
        assert not np.array_equal(a.voxels, b.voxels)


class TestBlockMinMax:
    def test_constant(self):
        vol = Volume.from_array(np.full((8, 8, 8), 5, dtype=np.uint8))
        grid = BlockGrid.for_dims(vol.dims, 4)
        mins, maxs = block_min_max(vol, grid)
        assert np.all(mins == 5)
        assert np.all(maxs == 5)

    def test_apron_reach(self):
        vox = np.zeros((8, 8, 8), dtype=np.uint8)
        vox[0, 0, 0] = 9
        vol = Volume.from_array(vox)
        grid = BlockGrid.for_dims(vol.dims, 4)
        mins, maxs = block_min_max(vol, grid)
        assert maxs[0, 0, 0] == 9
        # voxel (0,0,0) is outside the apron [3,8) of block (1,0,0)
        assert maxs[1, 0, 0] == 0

    def test_apron_boundary_voxel(self):
        vox = np.zeros((8, 8, 8), dtype=np.uint8)
        vox[3, 0, 0] = 9  # one voxel left of block (1,0,0), inside its apron
        vol = Volume.from_array(vox)
        grid = BlockGrid.for_dims(vol.dims, 4)
        _, maxs = block_min_max(vol, grid)
        assert maxs[0, 0, 0] == 9
        assert maxs[1, 0, 0] == 9

    def test_single_block(self):
        rng = np.random.default_rng(5)
        vol = Volume.from_array(rng.integers(3, 200, size=(4, 4, 4)).astype(np.uint8))
        grid = BlockGrid.for_dims(vol.dims, 4)
        mins, maxs = block_min_max(vol, grid)
        assert mins.shape == (1, 1, 1)
        assert (int(mins[0, 0, 0]), int(maxs[0, 0, 0])) == vol.intensity_range

    @pytest.mark.parametrize("dims,b", [((8, 8, 8), 4), ((9, 13, 6), 4), ((7, 7, 7), 2), ((12, 5, 9), 3)])
    def test_matches_oracle(self, dims, b):
        rng = np.random.default_rng(sum(dims) + b)
        vox = rng.integers(0, 256, size=dims).astype(np.uint8)
        vol = Volume.from_array(vox)
        grid = BlockGrid.for_dims(dims, b)
        mins, maxs = block_min_max(vol, grid)
        omin, omax = _apron_minmax_oracle(vox, b)
        assert np.array_equal(mins, omin)
        assert np.array_equal(maxs, omax)

    def test_sandwich_invariant(self):
        rng = np.random.default_rng(9)
        vox = rng.integers(0, 256, size=(11, 9, 10)).astype(np.uint8)
        vol = Volume.from_array(vox)
        b = 4
        grid = BlockGrid.for_dims(vol.dims, b)
        mins, maxs = block_min_max(vol, grid)
        for i in range(grid.bdims[0]):
            for j in range(grid.bdims[1]):
                for k in range(grid.bdims[2]):
                    interior = vox[
                        i * b : min((i + 1) * b, vol.dims[0]),
                        j * b : min((j + 1) * b, vol.dims[1]),
                        k * b : min((k + 1) * b, vol.dims[2]),
                    ]
                    assert mins[i, j, k] <= interior.min() <= interior.max() <= maxs[i, j, k]


class TestHistogram:
    def test_sums_to_voxel_count(self):
        vol = synth_volume("two_spheres", 32, seed=4)
        h = vol.histogram(256)
        assert h.sum() == vol.num_voxels

    def test_sixteen_bit_bins(self):
        vox = np.array([[[0, 256, 65535, 513]]], dtype=np.uint16).reshape(4, 1, 1)
        vol = Volume.from_array(vox)
        h = vol.histogram(256)
        assert h[0] == 1  # intensity 0
        assert h[1] == 1  # 256
        assert h[2] == 1  # 513
        assert h[255] == 1
        assert h.sum() == 4
