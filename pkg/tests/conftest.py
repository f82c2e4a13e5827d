"""Shared test fixtures and brute-force oracles."""

from __future__ import annotations

import numpy as np
import pytest

from pdmrender import (
    BlockGrid,
    TransferFunction,
    Volume,
    build_pdm_set,
    combine,
    select_partitions,
)


def chebyshev_oracle(occ: np.ndarray, clamp: int = 255) -> np.ndarray:
    """All-pairs chessboard distance to the nearest occupied cell.

    Quadratic reference implementation; clamps to `clamp` and returns that
    value everywhere when nothing is occupied.
    """
    occ = np.asarray(occ, dtype=bool)
    pts = np.argwhere(occ)
    if pts.shape[0] == 0:
        return np.full(occ.shape, clamp, dtype=np.int64)
    coords = np.indices(occ.shape, dtype=np.int64)  # (3, nx, ny, nz)
    diffs = np.abs(coords[None, :, :, :, :] - pts[:, :, None, None, None])
    cheb = diffs.max(axis=1).min(axis=0)
    return np.minimum(cheb, clamp)


def tf_from_support(support: np.ndarray, rng: np.random.Generator | None = None) -> TransferFunction:
    """A transfer function whose alpha is nonzero exactly on `support`."""
    support = np.asarray(support, dtype=bool)
    length = support.shape[0]
    lut = np.zeros((length, 4), dtype=np.float64)
    if rng is None:
        vals = np.linspace(0.1, 0.9, length)
    else:
        vals = rng.uniform(0.05, 1.0, length)
    lut[support, 0] = 0.8
    lut[support, 1] = 0.4
    lut[support, 2] = 0.6
    lut[support, 3] = vals[support]
    return TransferFunction(lut=lut)


def aligned_tf(scheme, selected: set[int], rng=None) -> TransferFunction:
    """TF whose support is exactly the union of the given 1-based partitions."""
    support = np.zeros(scheme.intensity_span, dtype=bool)
    for p in selected:
        part = scheme.partitions[p - 1]
        support[part.rho_lo : part.rho_hi + 1] = True
    return tf_from_support(support, rng)


def random_structured_volume(
    rng: np.random.Generator, dims: tuple[int, int, int], bits: int = 8
) -> Volume:
    """Sparse blobby volume: background zero plus a few intensity-banded boxes.

    Random uniform noise makes every block occupied for every partition,
    which trivializes distance-map tests; banded boxes keep occupancy varied.
    """
    length = 1 << bits
    vox = np.zeros(dims, dtype=np.uint8 if bits == 8 else np.uint16)
    for _ in range(int(rng.integers(2, 6))):
        lo = [int(rng.integers(0, max(1, d - 2))) for d in dims]
        size = [int(rng.integers(1, max(2, d // 2))) for d in dims]
        hi = [min(d, l + s) for l, s, d in zip(lo, size, dims)]
        band_lo = int(rng.integers(0, length))
        band_hi = min(length - 1, band_lo + int(rng.integers(0, max(2, length // 4))))
        region = tuple(slice(l, h) for l, h in zip(lo, hi))
        shape = tuple(h - l for l, h in zip(lo, hi))
        vox[region] = rng.integers(band_lo, band_hi + 1, size=shape)
    return Volume.from_array(vox)


def dprime_for(volume, grid, scheme, tf, mode: str):
    pdm_set = build_pdm_set(volume, grid, scheme, mode)
    return combine(pdm_set, select_partitions(tf, scheme))


@pytest.fixture(scope="session")
def shell_volume_64():
    from pdmrender import synth_volume

    return synth_volume("sphere_shell", 64, seed=3)


@pytest.fixture(scope="session")
def grid_64(shell_volume_64):
    return BlockGrid.for_dims(shell_volume_64.dims, 4)
